//! Random deployments, per-trial evaluation of the three allocation
//! strategies, and outage statistics.

use std::f64::consts::TAU;

use oris_core::allocation::{
    algorithm1_chain, no_oris_baseline, select_from_chain, solve_single_shot, AllocationError, SolveStatus,
};
use oris_core::channel::{assemble_coefficients, snr_db_conversions, snr_db_from_gamma_prime};
use oris_core::scene::{pd_position, BodySpec, RoomSpec};
use oris_core::{blockage_indicators, Allocation, RadioConfig, Scene, SolverConfig, UserState};
use rand::Rng;
use serde::Serialize;

/// Reported SNRs are clamped here so a fully dark receiver stays finite.
pub const SNR_DB_FLOOR: f64 = -100.0;

const WILSON_Z: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    NoOris,
    SingleShot,
    Algorithm1,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::NoOris, Algorithm::SingleShot, Algorithm::Algorithm1];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::NoOris => "no-oris",
            Algorithm::SingleShot => "single-shot",
            Algorithm::Algorithm1 => "algorithm1",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.id() == s)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial; any trial can be re-run on its own from these three
/// numbers.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point) ^ trial)
}

/// `U` users with body centers uniform over the floor shrunk by the body
/// radius and device directions uniform in `[0, 2π)`. A user whose device
/// would leave the room is drawn again.
pub fn sample_trial<R: Rng + ?Sized>(rng: &mut R, users: usize, room: &RoomSpec, body: &BodySpec) -> Vec<UserState> {
    let r = body.radius;
    let mut out = Vec::with_capacity(users);
    while out.len() < users {
        let x = rng.random_range(r..=room.width - r);
        let y = rng.random_range(r..=room.depth - r);
        let theta = rng.random_range(0.0..TAU);
        let user = UserState::new(body, x, y, theta);
        if room.contains(pd_position(&user)) {
            out.push(user);
        }
    }
    out
}

/// Optical-SNR threshold for a dB value; `-inf` maps to zero.
pub fn gamma_prime_threshold(gamma_th_db: f64) -> f64 {
    if gamma_th_db == f64::NEG_INFINITY {
        0.0
    } else {
        snr_db_conversions(gamma_th_db).1
    }
}

pub fn snr_db(gamma_prime: f64) -> f64 {
    if gamma_prime > 0.0 {
        snr_db_from_gamma_prime(gamma_prime).max(SNR_DB_FLOOR)
    } else {
        SNR_DB_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmOutcome {
    pub algorithm: Algorithm,
    pub snr_db: Vec<f64>,
    pub outage: Vec<bool>,
    pub gamma_prime_min: f64,
    pub oris_used: usize,
    pub supported: Vec<usize>,
    pub status: SolveStatus,
}

impl AlgorithmOutcome {
    fn new(algorithm: Algorithm, alloc: &Allocation, gamma_prime_th: f64) -> Self {
        let n = alloc.per_user_gamma_prime.len();
        AlgorithmOutcome {
            algorithm,
            snr_db: alloc.per_user_gamma_prime.iter().map(|&g| snr_db(g)).collect(),
            outage: (0..n).map(|u| !alloc.user_served(u, gamma_prime_th)).collect(),
            gamma_prime_min: alloc.gamma_prime_min,
            oris_used: alloc.oris_used,
            supported: alloc.supported_users.clone(),
            status: alloc.status,
        }
    }

    pub fn outages(&self) -> usize {
        self.outage.iter().filter(|o| **o).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub users: Vec<UserState>,
    pub gamma_th_db: f64,
    pub outcomes: Vec<AlgorithmOutcome>,
}

impl TrialRecord {
    pub fn outcome(&self, algorithm: Algorithm) -> Option<&AlgorithmOutcome> {
        self.outcomes.iter().find(|o| o.algorithm == algorithm)
    }
}

/// Evaluates one deployment (users already placed in `scene`) at a single
/// threshold.
pub fn run_trial(
    scene: &Scene,
    radio: &RadioConfig,
    gamma_th_db: f64,
    algorithms: &[Algorithm],
    solver: &SolverConfig,
    seed: u64,
) -> Result<TrialRecord, AllocationError> {
    Ok(run_trial_thresholds(scene, radio, &[gamma_th_db], algorithms, solver, seed)?.remove(0))
}

/// Evaluates one deployment at several thresholds, solving each
/// optimization once: the single-shot solution does not depend on the
/// threshold, and the pruning loop is run against the largest one.
pub fn run_trial_thresholds(
    scene: &Scene,
    radio: &RadioConfig,
    thresholds_db: &[f64],
    algorithms: &[Algorithm],
    solver: &SolverConfig,
    seed: u64,
) -> Result<Vec<TrialRecord>, AllocationError> {
    let blockage = blockage_indicators(scene);
    let coeffs = assemble_coefficients(scene, &blockage, radio);
    let all: Vec<usize> = (0..scene.users.len()).collect();
    let gp: Vec<f64> = thresholds_db.iter().map(|&t| gamma_prime_threshold(t)).collect();
    let max_gp = gp.iter().cloned().fold(0.0, f64::max);

    let mut baseline = None;
    let mut single = None;
    let mut chain = None;
    for &a in algorithms {
        match a {
            Algorithm::NoOris => baseline = Some(no_oris_baseline(&coeffs)),
            Algorithm::SingleShot if all.is_empty() => single = Some(no_oris_baseline(&coeffs)),
            Algorithm::SingleShot => single = Some(solve_single_shot(&coeffs, &all, solver)?),
            Algorithm::Algorithm1 => chain = Some(algorithm1_chain(&coeffs, max_gp, solver)?),
        }
    }
    let records = gp
        .iter()
        .zip(thresholds_db)
        .map(|(&th, &th_db)| {
            let outcomes = algorithms
                .iter()
                .map(|&a| {
                    let alloc = match a {
                        Algorithm::NoOris => baseline.clone().expect("computed above"),
                        Algorithm::SingleShot => single.clone().expect("computed above"),
                        Algorithm::Algorithm1 => select_from_chain(chain.as_deref().expect("computed above"), th),
                    };
                    AlgorithmOutcome::new(a, &alloc, th)
                })
                .collect();
            TrialRecord { seed, users: scene.users.clone(), gamma_th_db: th_db, outcomes }
        })
        .collect();
    Ok(records)
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if p == 1.0 { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Box-plot summary: quartiles as medians of the lower and upper halves
/// (the middle sample excluded for odd counts) and whiskers at the most
/// extreme samples within 1.5 IQR of the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

impl BoxStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return BoxStats {
                mean: f64::NAN,
                median: f64::NAN,
                q1: f64::NAN,
                q3: f64::NAN,
                whisker_low: f64::NAN,
                whisker_high: f64::NAN,
            };
        }
        let half = n / 2;
        let (q1, q3) = if n == 1 { (v[0], v[0]) } else { (median_sorted(&v[..half]), median_sorted(&v[n - half..])) };
        let iqr = q3 - q1;
        let lo_fence = q1 - 1.5 * iqr;
        let hi_fence = q3 + 1.5 * iqr;
        let whisker_low = v.iter().cloned().find(|x| *x >= lo_fence).unwrap_or(v[0]);
        let whisker_high = v.iter().rev().cloned().find(|x| *x <= hi_fence).unwrap_or(v[n - 1]);
        BoxStats {
            mean: v.iter().sum::<f64>() / n as f64,
            median: median_sorted(&v),
            q1,
            q3,
            whisker_low,
            whisker_high,
        }
    }
}

/// One CSV row: an algorithm at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageEstimate {
    pub experiment: String,
    pub algorithm: Algorithm,
    /// User count, or `lo-hi` when drawn per trial.
    pub users: String,
    /// Threshold in dB, or `lo-hi` when drawn per trial.
    pub gamma_th_db: String,
    pub grid: String,
    pub element_area_m2: f64,
    pub trials: usize,
    pub user_events: usize,
    pub outages: usize,
    pub p_out: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_oris_used: f64,
    pub mean_snr_db: f64,
    pub median_snr_db: f64,
    pub q1_snr_db: f64,
    pub q3_snr_db: f64,
    pub whisker_low_snr_db: f64,
    pub whisker_high_snr_db: f64,
    pub node_limit_trials: usize,
}

/// Labels attached to an aggregated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLabel {
    pub experiment: String,
    pub users: String,
    pub gamma_th_db: String,
    pub grid: String,
    pub element_area_m2: f64,
}

/// Pools user events over `records`: `P_out = outages / (Σ U)`. Records
/// are folded in the given order, so the result does not depend on how
/// trials were scheduled.
pub fn estimate_outage(label: &PointLabel, algorithm: Algorithm, records: &[&TrialRecord]) -> OutageEstimate {
    let mut events = 0;
    let mut outages = 0;
    let mut oris = 0usize;
    let mut limited = 0;
    let mut snr = Vec::new();
    for r in records {
        let o = r.outcome(algorithm).expect("algorithm was evaluated");
        events += o.outage.len();
        outages += o.outages();
        oris += o.oris_used;
        limited += usize::from(o.status == SolveStatus::NodeLimit);
        snr.extend_from_slice(&o.snr_db);
    }
    let stats = BoxStats::from_samples(&snr);
    let (ci_low, ci_high) = wilson_interval(outages, events);
    let trials = records.len();
    OutageEstimate {
        experiment: label.experiment.clone(),
        algorithm,
        users: label.users.clone(),
        gamma_th_db: label.gamma_th_db.clone(),
        grid: label.grid.clone(),
        element_area_m2: label.element_area_m2,
        trials,
        user_events: events,
        outages,
        p_out: if events == 0 { 0.0 } else { outages as f64 / events as f64 },
        ci_low,
        ci_high,
        mean_oris_used: if trials == 0 { 0.0 } else { oris as f64 / trials as f64 },
        mean_snr_db: stats.mean,
        median_snr_db: stats.median,
        q1_snr_db: stats.q1,
        q3_snr_db: stats.q3,
        whisker_low_snr_db: stats.whisker_low,
        whisker_high_snr_db: stats.whisker_high,
        node_limit_trials: limited,
    }
}
