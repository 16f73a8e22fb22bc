//! Scenario files: one TOML document per run, keyed by the usual parameter
//! names (`n_t`, `v_t_max`, `n_a`, `v_a_min`, …). Physical parameters have no
//! defaults; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cooperation::CoopParams;
use crate::error::{Error, Result};
use crate::geometry::{Direction, Vec2};
use crate::guidance::{GuidanceGains, GuidanceLaw};
use crate::planner::PlannerConfig;
use crate::sim::{ConvoyModel, Integrator, PathShape, SimParams, SpeedProfile, World};
use crate::speed::SpeedEnvelope;

fn default_dt() -> f64 {
    0.02
}
fn default_threshold() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.2
}
fn default_k_z() -> f64 {
    1.0
}
fn default_mission_altitude() -> f64 {
    1.0
}
fn default_altitude_separation() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,

    pub n_t: usize,
    pub convoy_path: PathShape,
    pub convoy_speed_profile: SpeedProfile,
    /// Arc-length gap between consecutive vehicles (m).
    pub convoy_spacing: f64,
    /// Lead vehicle arc-length position at t = 0 (m).
    #[serde(default)]
    pub convoy_start: f64,
    pub v_t_max: f64,

    pub n_a: usize,
    pub v_a_min: f64,
    pub v_a_max: f64,
    pub omega_max: f64,
    pub d_c: i64,
    pub k_s: f64,
    pub k_psi: f64,
    pub k_gamma: f64,
    pub delta: f64,

    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration: f64,

    #[serde(default = "default_threshold")]
    pub gamma_th: f64,
    #[serde(default = "default_threshold")]
    pub d_th: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub shape_smoothing: Option<f64>,
    #[serde(default)]
    pub literal_b_term: bool,
    #[serde(default)]
    pub guidance_law: GuidanceLaw,
    #[serde(default)]
    pub integrator: Integrator,

    #[serde(default = "default_k_z")]
    pub k_z: f64,
    #[serde(default = "default_mission_altitude")]
    pub z_mission: f64,
    #[serde(default = "default_altitude_separation")]
    pub z_separation: f64,

    pub initial: InitialPlacement,

    #[serde(default)]
    pub output: OutputFiles,
}

/// Agent start poses: explicit `[x, y, psi]` triples, or uniform in a square
/// box around the initial convoy centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InitialPlacement {
    Explicit { poses: Vec<[f64; 3]> },
    Random { seed: u64, half_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFiles {
    #[serde(default = "OutputFiles::default_metrics")]
    pub metrics: String,
    #[serde(default = "OutputFiles::default_summary")]
    pub summary: String,
}

impl OutputFiles {
    fn default_metrics() -> String {
        "metrics.csv".into()
    }
    fn default_summary() -> String {
        "summary.json".into()
    }
}

impl Default for OutputFiles {
    fn default() -> Self {
        Self {
            metrics: Self::default_metrics(),
            summary: Self::default_summary(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must be positive")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 {
            return Err(Error::config("n_t", "convoy needs at least two vehicles"));
        }
        if self.n_a == 0 || self.n_a > u8::MAX as usize {
            return Err(Error::config("n_a", format!("{} outside 1..=255", self.n_a)));
        }
        Direction::from_sign(self.d_c).map_err(|e| Error::config("d_c", e.to_string()))?;
        SpeedEnvelope::build(self.v_a_min, self.v_a_max, self.v_t_max, self.delta).map_err(|e| match e {
            Error::InvalidDelta(_) => Error::config("delta", e.to_string()),
            other => Error::config("v_a_min/v_a_max/v_t_max", other.to_string()),
        })?;
        for (field, v) in [
            ("omega_max", self.omega_max),
            ("k_s", self.k_s),
            ("k_psi", self.k_psi),
            ("k_gamma", self.k_gamma),
            ("dt", self.dt),
            ("gamma_th", self.gamma_th),
            ("d_th", self.d_th),
            ("k_z", self.k_z),
            ("convoy_spacing", self.convoy_spacing),
        ] {
            positive(field, v)?;
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::config("duration", "must be a finite non-negative time"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("alpha", "must lie in (0, 1]"));
        }
        if let Some(b) = self.shape_smoothing {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::config("shape_smoothing", "must lie in (0, 1]"));
            }
        }
        if !(self.z_separation >= 0.0) {
            return Err(Error::config("z_separation", "must be non-negative"));
        }
        match &self.initial {
            InitialPlacement::Explicit { poses } if poses.len() != self.n_a => {
                return Err(Error::config("initial.poses", format!("{} poses for n_a = {}", poses.len(), self.n_a)));
            }
            InitialPlacement::Random { half_width, .. } => positive("initial.half_width", *half_width)?,
            _ => {}
        }
        self.convoy()?;
        Ok(())
    }

    pub fn direction(&self) -> Direction {
        Direction::from_sign(self.d_c).expect("validated")
    }

    pub fn envelope(&self) -> Result<SpeedEnvelope> {
        SpeedEnvelope::build(self.v_a_min, self.v_a_max, self.v_t_max, self.delta)
    }

    pub fn convoy(&self) -> Result<ConvoyModel> {
        ConvoyModel::new(
            self.convoy_path.clone(),
            self.convoy_speed_profile,
            self.n_t,
            self.convoy_spacing,
            self.convoy_start,
            self.v_t_max,
        )
    }

    pub fn sim_params(&self) -> Result<SimParams> {
        Ok(SimParams {
            dt: self.dt,
            direction: self.direction(),
            gains: GuidanceGains {
                k_gamma: self.k_gamma,
                k_psi: self.k_psi,
                omega_max: self.omega_max,
            },
            law: self.guidance_law,
            coop: CoopParams {
                n_agents: self.n_a,
                k_s: self.k_s,
                gamma_threshold: self.gamma_th,
                separation_threshold: self.d_th,
            },
            planner: PlannerConfig {
                omega_max: self.omega_max,
                alpha: self.alpha,
                shape_smoothing: self.shape_smoothing,
                literal_b_term: self.literal_b_term,
            },
            envelope: self.envelope()?,
            k_z: self.k_z,
            z_mission: self.z_mission,
            z_separation: self.z_separation,
            integrator: self.integrator,
        })
    }

    pub fn initial_poses(&self, convoy: &ConvoyModel) -> Vec<(f64, f64, f64)> {
        match &self.initial {
            InitialPlacement::Explicit { poses } => poses.iter().map(|p| (p[0], p[1], p[2])).collect(),
            InitialPlacement::Random { seed, half_width } => {
                let start = convoy.positions(0.0);
                let c = start.iter().fold(Vec2::zeros(), |a, p| a + p) / start.len() as f64;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..self.n_a)
                    .map(|_| {
                        let x = c.x + rng.gen_range(-half_width..=*half_width);
                        let y = c.y + rng.gen_range(-half_width..=*half_width);
                        let psi = rng.gen_range(-PI..PI);
                        (x, y, psi)
                    })
                    .collect()
            }
        }
    }

    pub fn build_world(&self) -> Result<World> {
        self.validate()?;
        let convoy = self.convoy()?;
        let poses = self.initial_poses(&convoy);
        World::new(self.sim_params()?, convoy, &poses)
    }

    /// Number of control ticks covering `duration`.
    pub fn ticks(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = ScenarioConfig::from_toml_str(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Scenario files shipped with the crate, one per parameter row.
pub const BUNDLED: &[(&str, &str)] = &[
    ("matlab_sim_1", include_str!("../scenarios/matlab_sim_1.toml")),
    ("matlab_sim_2", include_str!("../scenarios/matlab_sim_2.toml")),
    ("matlab_sim_3", include_str!("../scenarios/matlab_sim_3.toml")),
    ("sitl_sim", include_str!("../scenarios/sitl_sim.toml")),
    ("hardware_exp_1", include_str!("../scenarios/hardware_exp_1.toml")),
    ("hardware_exp_2", include_str!("../scenarios/hardware_exp_2.toml")),
];

pub fn bundled(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::config("scenario", format!("no bundled scenario named `{name}`")))?;
    let cfg = ScenarioConfig::from_toml_str(text).map_err(|message| Error::Parse {
        path: format!("<bundled:{name}>").into(),
        message,
    })?;
    cfg.validate()?;
    Ok(cfg)
}
