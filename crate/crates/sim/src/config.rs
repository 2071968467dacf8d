//! Run configuration as stored on disk: angles in degrees, everything else
//! SI. Converted to the core model types once, at load.

use std::path::PathBuf;

use oris_core::allocation::TieBreak;
use oris_core::milp::MilpConfig;
use oris_core::scene::{validate_config, BodySpec, GridSpec, PdSpec, RoomSpec};
use oris_core::{NoiseBandwidth, RadioConfig, SceneConfig, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(serde_json::Error),
    #[error("invalid configuration: {0}")]
    Schema(String),
}

impl From<serde_json::Error> for ConfigError {
    /// Well-formed JSON of the wrong shape is a schema error.
    fn from(e: serde_json::Error) -> Self {
        match e.classify() {
            serde_json::error::Category::Data => ConfigError::Schema(e.to_string()),
            _ => ConfigError::Parse(e),
        }
    }
}

fn schema(msg: impl Into<String>) -> ConfigError {
    ConfigError::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub cols: u32,
    pub rows: u32,
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec::new(g.cols, g.rows)
    }
}

impl From<GridSpec> for Grid {
    fn from(g: GridSpec) -> Self {
        Grid { cols: g.cols, rows: g.rows }
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    /// Parses `COLSxROWS`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (c, r) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected COLSxROWS, got {s:?}"))?;
        let cols = c.trim().parse().map_err(|_| format!("bad column count in {s:?}"))?;
        let rows = r.trim().parse().map_err(|_| format!("bad row count in {s:?}"))?;
        Ok(Grid { cols, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    pub width_m: f64,
    pub depth_m: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSection {
    pub area_m2: f64,
    pub fov_semiangle_deg: f64,
    pub responsivity_a_per_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    pub radius_m: f64,
    pub height_m: f64,
    pub device_offset_m: f64,
    pub device_height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub room: RoomSection,
    pub led_positions_m: Vec<[f64; 2]>,
    pub half_power_semiangle_deg: f64,
    pub pd: PdSection,
    pub body: BodySection,
    pub oris_grid: Grid,
    /// `null` tiles the lower band with patches the size of the mirrors.
    pub wall_grid: Option<Grid>,
    pub oris_band_fraction: f64,
    pub reflectance_oris: f64,
    pub reflectance_wall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub total_power_w: f64,
    pub subcarriers: u32,
    pub noise_psd_w_per_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_bandwidth: NoiseBandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub epsilon: f64,
    pub node_limit: usize,
    pub gap_tolerance: f64,
    pub integrality_tolerance: f64,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Plan {
    pub users: Vec<usize>,
    pub gamma_th_db_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Plan {
    pub users: Vec<usize>,
    pub gamma_th_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Plan {
    pub users: Vec<usize>,
    pub gamma_th_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Grid {
    pub cols: u32,
    pub rows: u32,
    /// Overrides the experiment trial count for this grid.
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Plan {
    pub grids: Vec<Fig4Grid>,
    pub users_range: [usize; 2],
    pub gamma_th_db_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub trials: usize,
    pub fig1: Fig1Plan,
    pub fig2: Fig2Plan,
    pub fig3: Fig3Plan,
    pub fig4: Fig4Plan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSection,
    pub radio: RadioSection,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scene = SceneConfig::default();
        let radio = RadioConfig::default();
        RunConfig {
            scene: SceneSection {
                room: RoomSection { width_m: scene.room.width, depth_m: scene.room.depth, height_m: scene.room.height },
                led_positions_m: scene.led_positions.clone(),
                half_power_semiangle_deg: 80.0,
                pd: PdSection {
                    area_m2: scene.pd.area,
                    fov_semiangle_deg: 40.0,
                    responsivity_a_per_w: scene.pd.responsivity,
                },
                body: BodySection {
                    radius_m: scene.body.radius,
                    height_m: scene.body.height,
                    device_offset_m: scene.body.device_offset,
                    device_height_m: scene.body.device_height,
                },
                oris_grid: scene.oris_grid.into(),
                wall_grid: None,
                oris_band_fraction: scene.oris_band_fraction,
                reflectance_oris: scene.reflectance_oris,
                reflectance_wall: scene.reflectance_wall,
            },
            radio: RadioSection {
                total_power_w: radio.total_power,
                subcarriers: radio.subcarriers,
                noise_psd_w_per_hz: radio.noise_psd,
                bandwidth_hz: radio.bandwidth,
                noise_bandwidth: radio.noise_bandwidth,
            },
            solver: SolverSection {
                epsilon: 1e-3,
                node_limit: 500,
                gap_tolerance: 1e-9,
                integrality_tolerance: 1e-9,
                tie_break: TieBreak::LowestIndex,
            },
            experiment: ExperimentSection {
                trials: 1000,
                fig1: Fig1Plan { users: (1..=15).collect(), gamma_th_db_range: [0.0, 50.0] },
                fig2: Fig2Plan { users: (1..=15).collect(), gamma_th_db: vec![5.0, 20.0, 35.0] },
                fig3: Fig3Plan { users: vec![1, 5, 9], gamma_th_db: (0..=20).map(|i| 2.5 * i as f64).collect() },
                fig4: Fig4Plan {
                    grids: vec![
                        Fig4Grid { cols: 15, rows: 2, trials: None },
                        Fig4Grid { cols: 30, rows: 5, trials: None },
                        Fig4Grid { cols: 90, rows: 20, trials: Some(100) },
                    ],
                    users_range: [1, 15],
                    gamma_th_db_range: [0.0, 50.0],
                },
            },
            output_dir: PathBuf::from("results"),
            workers: 0,
            seed: 20240501,
        }
    }
}

fn check_users(users: &[usize], what: &str) -> Result<(), ConfigError> {
    if users.is_empty() {
        return Err(schema(format!("{what}: user sweep is empty")));
    }
    if users.contains(&0) {
        return Err(schema(format!("{what}: user counts must be at least 1")));
    }
    Ok(())
}

fn check_range(r: [f64; 2], what: &str) -> Result<(), ConfigError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
        return Err(schema(format!("{what}: range must be finite and ordered")));
    }
    Ok(())
}

fn check_thresholds(th: &[f64], what: &str) -> Result<(), ConfigError> {
    if th.is_empty() {
        return Err(schema(format!("{what}: threshold sweep is empty")));
    }
    if th.iter().any(|t| t.is_nan() || *t == f64::INFINITY) {
        return Err(schema(format!("{what}: thresholds must be below +inf")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("configuration serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        validate_config(&self.scene_config()).map_err(|e| schema(e.to_string()))?;
        if let Some(g) = &self.scene.wall_grid {
            if g.cols == 0 || g.rows == 0 {
                return Err(schema("wall grid must have at least one row and one column"));
            }
        }
        self.radio_config().validate().map_err(|e| schema(e.to_string()))?;
        self.solver_config().validate().map_err(|e| schema(e.to_string()))?;
        let x = &self.experiment;
        if x.trials == 0 {
            return Err(schema("trials must be at least 1"));
        }
        check_users(&x.fig1.users, "fig1")?;
        check_range(x.fig1.gamma_th_db_range, "fig1")?;
        check_users(&x.fig2.users, "fig2")?;
        check_thresholds(&x.fig2.gamma_th_db, "fig2")?;
        check_users(&x.fig3.users, "fig3")?;
        check_thresholds(&x.fig3.gamma_th_db, "fig3")?;
        if x.fig4.grids.is_empty() {
            return Err(schema("fig4: grid sweep is empty"));
        }
        for g in &x.fig4.grids {
            if g.cols == 0 || g.rows == 0 || g.trials == Some(0) {
                return Err(schema("fig4: grids need rows, columns and at least one trial"));
            }
        }
        let [lo, hi] = x.fig4.users_range;
        if lo == 0 || lo > hi {
            return Err(schema("fig4: user range must be ordered and start at 1 or more"));
        }
        check_range(x.fig4.gamma_th_db_range, "fig4")?;
        Ok(())
    }

    /// Scene description in SI units with radians.
    pub fn scene_config(&self) -> SceneConfig {
        let s = &self.scene;
        let oris: GridSpec = s.oris_grid.clone().into();
        let wall = match &s.wall_grid {
            Some(g) => g.clone().into(),
            None => SceneConfig::matching_wall_grid(oris, s.oris_band_fraction),
        };
        SceneConfig {
            room: RoomSpec { width: s.room.width_m, depth: s.room.depth_m, height: s.room.height_m },
            led_positions: s.led_positions_m.clone(),
            half_power_semiangle: s.half_power_semiangle_deg.to_radians(),
            pd: PdSpec {
                area: s.pd.area_m2,
                fov_semiangle: s.pd.fov_semiangle_deg.to_radians(),
                responsivity: s.pd.responsivity_a_per_w,
            },
            body: BodySpec {
                radius: s.body.radius_m,
                height: s.body.height_m,
                device_offset: s.body.device_offset_m,
                device_height: s.body.device_height_m,
            },
            oris_grid: oris,
            wall_grid: wall,
            oris_band_fraction: s.oris_band_fraction,
            reflectance_oris: s.reflectance_oris,
            reflectance_wall: s.reflectance_wall,
        }
    }

    /// Scene description with a different mirror grid (and, unless a wall
    /// grid is pinned, matching wall patches).
    pub fn scene_config_with_grid(&self, grid: GridSpec) -> SceneConfig {
        let mut copy = self.clone();
        copy.scene.oris_grid = grid.into();
        copy.scene_config()
    }

    pub fn radio_config(&self) -> RadioConfig {
        let r = &self.radio;
        RadioConfig {
            total_power: r.total_power_w,
            subcarriers: r.subcarriers,
            noise_psd: r.noise_psd_w_per_hz,
            bandwidth: r.bandwidth_hz,
            noise_bandwidth: r.noise_bandwidth,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            epsilon: s.epsilon,
            milp: MilpConfig {
                node_limit: s.node_limit,
                gap_tolerance: s.gap_tolerance,
                integrality_tolerance: s.integrality_tolerance,
            },
            tie_break: s.tie_break,
        }
    }
}
