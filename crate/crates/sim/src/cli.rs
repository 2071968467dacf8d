//! The `oris` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use oris_core::allocation::{algorithm1, no_oris_baseline, solve_single_shot, Assignment, SolveStatus};
use oris_core::channel::{assemble_coefficients, gain_records, ChannelGains};
use oris_core::scene::GridSpec;
use oris_core::{blockage_indicators, build_scene, Allocation, UserState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConfigError, Fig4Grid, Grid, RunConfig};
use crate::experiments::{run_experiment, CampaignError, Experiment, Setup};
use crate::montecarlo::{gamma_prime_threshold, sample_trial, snr_db};
use crate::output::{plot_file, write_campaign, OutputError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_SOLVER: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "oris", version, about = "Mirror-assisted multi-user VLC: allocation and outage campaigns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Overrides {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// User count, or a comma-separated sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub users: Option<Vec<usize>>,
    /// SNR threshold in dB, or a comma-separated sweep.
    #[arg(long = "gamma-th-db", global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub gamma_th_db: Option<Vec<f64>>,
    /// Mirror grid per wall, COLSxROWS.
    #[arg(long = "oris-grid", global = true)]
    pub oris_grid: Option<Grid>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place users at random and print all three allocations as JSON.
    Solve {
        #[command(flatten)]
        o: Overrides,
    },
    /// SNR spread against the number of users.
    Fig1 {
        #[command(flatten)]
        o: Overrides,
    },
    /// Outage against the number of users at fixed thresholds.
    Fig2 {
        #[command(flatten)]
        o: Overrides,
    },
    /// Outage against the SNR threshold.
    Fig3 {
        #[command(flatten)]
        o: Overrides,
    },
    /// Outage against mirror size.
    Fig4 {
        #[command(flatten)]
        o: Overrides,
    },
    /// Write every gain with its blockage flag, and the optical-SNR
    /// coefficients, for one random deployment.
    DumpChannel {
        #[command(flatten)]
        o: Overrides,
    },
    /// Check a configuration file (or the defaults) and print it normalized.
    ValidateConfig {
        #[command(flatten)]
        o: Overrides,
    },
    /// Render a campaign CSV to SVG.
    Plot {
        csv: PathBuf,
        /// Output SVG; defaults to the CSV path with an .svg extension.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Campaign(#[from] CampaignError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Parse(_)) => EXIT_PARSE,
            CliError::Config(ConfigError::Schema(_)) => EXIT_SCHEMA,
            CliError::Read { .. } => EXIT_IO,
            CliError::Output(OutputError::Io { .. }) => EXIT_IO,
            CliError::Output(_) => EXIT_PARSE,
            CliError::Campaign(CampaignError::Scene(_)) => EXIT_SCHEMA,
            CliError::Campaign(_) => EXIT_SOLVER,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

fn load(o: &Overrides, experiment: Option<Experiment>) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            serde_json::from_str(&text).map_err(ConfigError::from)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &o.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.trials {
        cfg.experiment.trials = v;
    }
    if let Some(v) = o.workers {
        cfg.workers = v;
    }
    if let Some(g) = &o.oris_grid {
        cfg.scene.oris_grid = g.clone();
        if experiment == Some(Experiment::Fig4) {
            cfg.experiment.fig4.grids = vec![Fig4Grid { cols: g.cols, rows: g.rows, trials: None }];
        }
    }
    let x = &mut cfg.experiment;
    if let Some(users) = &o.users {
        match experiment {
            Some(Experiment::Fig1) => x.fig1.users = users.clone(),
            Some(Experiment::Fig2) => x.fig2.users = users.clone(),
            Some(Experiment::Fig3) => x.fig3.users = users.clone(),
            Some(Experiment::Fig4) => {
                let lo = users.iter().copied().min().unwrap_or(0);
                let hi = users.iter().copied().max().unwrap_or(0);
                x.fig4.users_range = [lo, hi];
            }
            None => {}
        }
    }
    if let Some(th) = &o.gamma_th_db {
        let range = |th: &[f64]| {
            let lo = th.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = th.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        };
        match experiment {
            Some(Experiment::Fig1) => x.fig1.gamma_th_db_range = range(th),
            Some(Experiment::Fig2) => x.fig2.gamma_th_db = th.clone(),
            Some(Experiment::Fig3) => x.fig3.gamma_th_db = th.clone(),
            Some(Experiment::Fig4) => x.fig4.gamma_th_db_range = range(th),
            None => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn single_value<T: Copy>(v: &Option<Vec<T>>, default: T, what: &str) -> Result<T, CliError> {
    match v.as_deref() {
        None => Ok(default),
        Some([x]) => Ok(*x),
        Some(_) => Err(CliError::Usage(format!("{what} takes a single value here"))),
    }
}

#[derive(Serialize)]
struct AllocationRecord {
    algorithm: &'static str,
    assignments: Vec<[usize; 3]>,
    per_user_gamma_prime: Vec<f64>,
    per_user_snr_db: Vec<f64>,
    outage: Vec<bool>,
    supported_users: Vec<usize>,
    removed_users: Vec<usize>,
    oris_used: usize,
    gamma_prime_min: f64,
    status: SolveStatus,
    gap: f64,
    nodes: usize,
    solves: usize,
}

impl AllocationRecord {
    fn new(algorithm: &'static str, a: &Allocation, th: f64) -> Self {
        AllocationRecord {
            algorithm,
            assignments: a.assignments.iter().map(|&Assignment { led, element, user }| [led, element, user]).collect(),
            per_user_snr_db: a.per_user_gamma_prime.iter().map(|&g| snr_db(g)).collect(),
            outage: (0..a.per_user_gamma_prime.len()).map(|u| !a.user_served(u, th)).collect(),
            per_user_gamma_prime: a.per_user_gamma_prime.clone(),
            supported_users: a.supported_users.clone(),
            removed_users: a.removed_users.clone(),
            oris_used: a.oris_used,
            gamma_prime_min: a.gamma_prime_min,
            status: a.status,
            gap: a.gap,
            nodes: a.nodes,
            solves: a.solves,
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    seed: u64,
    gamma_th_db: f64,
    oris_grid: String,
    users: Vec<UserState>,
    allocations: Vec<AllocationRecord>,
}

fn deployment(cfg: &RunConfig, users: usize) -> Result<oris_core::Scene, CliError> {
    let base = build_scene(&cfg.scene_config()).map_err(|e| ConfigError::Schema(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let placed = sample_trial(&mut rng, users, &base.room, &base.body);
    Ok(base.with_users(placed).map_err(CampaignError::from)?)
}

fn solve(o: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(o, None)?;
    let users = single_value(&o.users, 4, "--users")?;
    if users == 0 {
        return Err(CliError::Usage("--users must be at least 1".into()));
    }
    let th_db = single_value(&o.gamma_th_db, 20.0, "--gamma-th-db")?;
    let scene = deployment(&cfg, users)?;
    let coeffs = assemble_coefficients(&scene, &blockage_indicators(&scene), &cfg.radio_config());
    let solver = cfg.solver_config();
    let th = gamma_prime_threshold(th_db);
    let all: Vec<usize> = (0..users).collect();
    let solver_err = |e| CliError::Campaign(CampaignError::Solver(e));
    let single = solve_single_shot(&coeffs, &all, &solver).map_err(solver_err)?;
    let pruned = if th > 0.0 { algorithm1(&coeffs, th, &solver).map_err(solver_err)? } else { single.clone() };
    let record = SolveOutput {
        seed: cfg.seed,
        gamma_th_db: th_db,
        oris_grid: GridSpec::from(cfg.scene.oris_grid.clone()).to_string(),
        users: scene.users.clone(),
        allocations: vec![
            AllocationRecord::new("no-oris", &no_oris_baseline(&coeffs), th),
            AllocationRecord::new("single-shot", &single, th),
            AllocationRecord::new("algorithm1", &pruned, th),
        ],
    };
    let text = serde_json::to_string_pretty(&record).expect("record serializes");
    writeln!(out, "{text}").map_err(|source| CliError::Read { path: "<stdout>".into(), source })
}

fn dump_channel(o: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(o, None)?;
    let users = single_value(&o.users, 4, "--users")?;
    let scene = deployment(&cfg, users)?;
    let blockage = blockage_indicators(&scene);
    let gains = ChannelGains::compute(&scene);
    let coeffs = assemble_coefficients(&scene, &blockage, &cfg.radio_config());
    let dir = cfg.output_dir.clone();
    let io = |path: &PathBuf| {
        let path = path.clone();
        move |source| CliError::Output(OutputError::Io { path, source })
    };
    fs::create_dir_all(&dir).map_err(io(&dir))?;

    let gains_path = dir.join("channel_gains.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "l", "k_or_w", "u", "gain", "blocked"]).map_err(OutputError::from)?;
    for r in gain_records(&gains, &blockage) {
        w.write_record([
            r.path.as_str().to_string(),
            r.led.to_string(),
            r.reflector.to_string(),
            r.user.to_string(),
            format!("{:e}", r.gain),
            u8::from(r.blocked).to_string(),
        ])
        .map_err(OutputError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    fs::write(&gains_path, bytes).map_err(io(&gains_path))?;

    let coeff_path = dir.join("channel_coefficients.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "l", "k", "u", "value"]).map_err(OutputError::from)?;
    for (u, c) in coeffs.c.iter().enumerate() {
        w.write_record(["c".to_string(), String::new(), String::new(), u.to_string(), format!("{c:e}")])
            .map_err(OutputError::from)?;
    }
    for t in &coeffs.a {
        w.write_record([
            "a".to_string(),
            t.led.to_string(),
            t.element.to_string(),
            t.user.to_string(),
            format!("{:e}", t.value),
        ])
        .map_err(OutputError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    fs::write(&coeff_path, bytes).map_err(io(&coeff_path))?;
    let _ = writeln!(out, "{}\n{}", gains_path.display(), coeff_path.display());
    Ok(())
}

fn campaign(o: &Overrides, experiment: Experiment, command: Vec<String>, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(o, Some(experiment))?;
    let setup = Setup::new(&cfg)?;
    let result = run_experiment(&setup, experiment)?;
    let workers = setup.workers();
    let written = write_campaign(&cfg.output_dir, &cfg, &result, command, workers)?;
    let _ = writeln!(out, "{}\n{}\n{}", written.csv.display(), written.svg.display(), written.manifest.display());
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { o } => solve(o, out),
        Command::Fig1 { o } => campaign(o, Experiment::Fig1, command, out),
        Command::Fig2 { o } => campaign(o, Experiment::Fig2, command, out),
        Command::Fig3 { o } => campaign(o, Experiment::Fig3, command, out),
        Command::Fig4 { o } => campaign(o, Experiment::Fig4, command, out),
        Command::DumpChannel { o } => dump_channel(o, out),
        Command::ValidateConfig { o } => load(o, None).map(|cfg| {
            let _ = write!(out, "{}", cfg.to_json());
        }),
        Command::Plot { csv, svg } => {
            let target = svg.clone().unwrap_or_else(|| csv.with_extension("svg"));
            plot_file(csv, &target).map_err(CliError::from).map(|_| {
                let _ = writeln!(out, "{}", target.display());
            })
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
