//! The four outage campaigns: SNR spread against the number of users,
//! outage against users at fixed thresholds, outage against threshold,
//! and outage against mirror size.

use std::time::Instant;

use oris_core::allocation::AllocationError;
use oris_core::scene::{GridSpec, SceneError};
use oris_core::{build_scene, RadioConfig, Scene, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::montecarlo::{
    estimate_outage, run_trial_thresholds, sample_trial, trial_seed, Algorithm, OutageEstimate, PointLabel, TrialRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("scene: {0}")]
    Scene(#[from] SceneError),
    #[error("solver: {0}")]
    Solver(#[from] AllocationError),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Wall time spent on one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointTiming {
    pub point: String,
    pub trials: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Campaign {
    pub experiment: Experiment,
    pub rows: Vec<OutageEstimate>,
    pub timings: Vec<PointTiming>,
}

impl Campaign {
    pub fn node_limit_trials(&self) -> usize {
        self.rows.iter().map(|r| r.node_limit_trials).sum()
    }

    /// Rows of one algorithm, in sweep order.
    pub fn rows_of(&self, algorithm: Algorithm) -> impl Iterator<Item = &OutageEstimate> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }
}

/// Everything a campaign needs besides its sweep.
pub struct Setup {
    pub config: RunConfig,
    pub radio: RadioConfig,
    pub solver: SolverConfig,
    pool: rayon::ThreadPool,
}

impl Setup {
    pub fn new(config: &RunConfig) -> Result<Self, CampaignError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build()?;
        Ok(Setup { config: config.clone(), radio: config.radio_config(), solver: config.solver_config(), pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn scene(&self, grid: GridSpec) -> Result<Scene, SceneError> {
        build_scene(&self.config.scene_config_with_grid(grid))
    }

    fn base_grid(&self) -> GridSpec {
        self.config.scene.oris_grid.clone().into()
    }

    /// Runs `trials` independent trials in the worker pool and returns the
    /// results in trial order.
    fn trials<T: Send>(
        &self,
        trials: usize,
        f: impl Fn(usize) -> Result<T, CampaignError> + Sync,
    ) -> Result<Vec<T>, CampaignError> {
        self.pool.install(|| (0..trials).into_par_iter().map(&f).collect())
    }
}

fn label(experiment: Experiment, users: String, gamma_th_db: String, scene: &Scene) -> PointLabel {
    PointLabel {
        experiment: experiment.id().to_string(),
        users,
        gamma_th_db,
        grid: scene.oris_grid.to_string(),
        element_area_m2: scene.oris_element_area(),
    }
}

fn range_label(lo: impl std::fmt::Display, hi: impl std::fmt::Display) -> String {
    format!("{lo}-{hi}")
}

fn draw_threshold(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// SNR spread per user count; each trial draws its own threshold, which
/// only affects the pruning loop.
pub fn experiment_fig1(setup: &Setup) -> Result<Campaign, CampaignError> {
    let plan = &setup.config.experiment.fig1;
    let trials = setup.config.experiment.trials;
    let base = setup.scene(setup.base_grid())?;
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for (point, &u) in plan.users.iter().enumerate() {
        let t0 = Instant::now();
        let records = setup.trials(trials, |t| {
            let seed = trial_seed(setup.config.seed, point as u64, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = draw_threshold(&mut rng, plan.gamma_th_db_range);
            let users = sample_trial(&mut rng, u, &base.room, &base.body);
            let scene = base.clone().with_users(users)?;
            let mut r = run_trial_thresholds(&scene, &setup.radio, &[th], &Algorithm::ALL, &setup.solver, seed)?;
            Ok(r.remove(0))
        })?;
        let refs: Vec<&TrialRecord> = records.iter().collect();
        let [lo, hi] = plan.gamma_th_db_range;
        let l = label(Experiment::Fig1, u.to_string(), range_label(lo, hi), &base);
        for a in Algorithm::ALL {
            rows.push(estimate_outage(&l, a, &refs));
        }
        timings.push(PointTiming { point: format!("U={u}"), trials, seconds: t0.elapsed().as_secs_f64() });
    }
    Ok(Campaign { experiment: Experiment::Fig1, rows, timings })
}

/// Outage on a (threshold × users) grid. Every threshold is evaluated on
/// the same deployments, so curves over the threshold are exact empirical
/// distribution functions.
pub fn threshold_sweep(
    setup: &Setup,
    experiment: Experiment,
    users: &[usize],
    thresholds_db: &[f64],
) -> Result<Campaign, CampaignError> {
    let trials = setup.config.experiment.trials;
    let base = setup.scene(setup.base_grid())?;
    let mut per_point = Vec::new();
    let mut timings = Vec::new();
    for (point, &u) in users.iter().enumerate() {
        let t0 = Instant::now();
        let records = setup.trials(trials, |t| {
            let seed = trial_seed(setup.config.seed, point as u64, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let placed = sample_trial(&mut rng, u, &base.room, &base.body);
            let scene = base.clone().with_users(placed)?;
            Ok(run_trial_thresholds(&scene, &setup.radio, thresholds_db, &Algorithm::ALL, &setup.solver, seed)?)
        })?;
        per_point.push(records);
        timings.push(PointTiming { point: format!("U={u}"), trials, seconds: t0.elapsed().as_secs_f64() });
    }
    let mut rows = Vec::new();
    for (i, &th) in thresholds_db.iter().enumerate() {
        for (records, &u) in per_point.iter().zip(users) {
            let refs: Vec<&TrialRecord> = records.iter().map(|r| &r[i]).collect();
            let l = label(experiment, u.to_string(), th.to_string(), &base);
            for a in Algorithm::ALL {
                rows.push(estimate_outage(&l, a, &refs));
            }
        }
    }
    Ok(Campaign { experiment, rows, timings })
}

pub fn experiment_fig2(setup: &Setup) -> Result<Campaign, CampaignError> {
    let plan = &setup.config.experiment.fig2;
    threshold_sweep(setup, Experiment::Fig2, &plan.users, &plan.gamma_th_db)
}

pub fn experiment_fig3(setup: &Setup) -> Result<Campaign, CampaignError> {
    let plan = &setup.config.experiment.fig3;
    threshold_sweep(setup, Experiment::Fig3, &plan.users, &plan.gamma_th_db)
}

/// Outage against mirror size. Each trial draws its user count and
/// threshold; trial `t` uses the same deployment for every grid.
pub fn experiment_fig4(setup: &Setup) -> Result<Campaign, CampaignError> {
    let plan = &setup.config.experiment.fig4;
    let default_trials = setup.config.experiment.trials;
    let [u_lo, u_hi] = plan.users_range;
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for g in &plan.grids {
        let grid = GridSpec::new(g.cols, g.rows);
        let trials = g.trials.map_or(default_trials, |t| t.min(default_trials));
        let base = setup.scene(grid)?;
        let t0 = Instant::now();
        let records = setup.trials(trials, |t| {
            let seed = trial_seed(setup.config.seed, 0, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = rng.random_range(u_lo..=u_hi);
            let th = draw_threshold(&mut rng, plan.gamma_th_db_range);
            let placed = sample_trial(&mut rng, u, &base.room, &base.body);
            let scene = base.clone().with_users(placed)?;
            let mut r = run_trial_thresholds(&scene, &setup.radio, &[th], &Algorithm::ALL, &setup.solver, seed)?;
            Ok(r.remove(0))
        })?;
        let refs: Vec<&TrialRecord> = records.iter().collect();
        let [th_lo, th_hi] = plan.gamma_th_db_range;
        let l = label(Experiment::Fig4, range_label(u_lo, u_hi), range_label(th_lo, th_hi), &base);
        for a in Algorithm::ALL {
            rows.push(estimate_outage(&l, a, &refs));
        }
        timings.push(PointTiming { point: format!("grid={grid}"), trials, seconds: t0.elapsed().as_secs_f64() });
    }
    Ok(Campaign { experiment: Experiment::Fig4, rows, timings })
}

pub fn run_experiment(setup: &Setup, experiment: Experiment) -> Result<Campaign, CampaignError> {
    match experiment {
        Experiment::Fig1 => experiment_fig1(setup),
        Experiment::Fig2 => experiment_fig2(setup),
        Experiment::Fig3 => experiment_fig3(setup),
        Experiment::Fig4 => experiment_fig4(setup),
    }
}
