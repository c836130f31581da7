//! JSON configuration files.
//!
//! Every field has a built-in default, so `{}` is a valid file. Units are
//! part of the field names. Unknown fields are rejected so that typos fail
//! loudly instead of silently running the default.

use std::path::Path;

use anyhow::{bail, Context};
use mi_seeker_core::models::{max_bank_for_radius, AgentState, MotionParams, SensorParams, TargetPosition};
use mi_seeker_core::planner::{ActionGrid, SearchMode};
use mi_seeker_core::sim::{default_topology, Algorithm, CollapsePolicy, EpisodeConfig, Region};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionFile {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
}

impl Default for RegionFile {
    fn default() -> Self {
        Self {
            x_min_m: 0.0,
            x_max_m: 40.0,
            y_min_m: 0.0,
            y_max_m: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    pub x_m: f64,
    pub y_m: f64,
    pub psi_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorFile {
    pub alpha: f64,
    pub beta_m2: f64,
    pub gamma: f64,
    pub noise_var: f64,
}

impl Default for SensorFile {
    fn default() -> Self {
        let p = SensorParams::default();
        Self {
            alpha: p.alpha,
            beta_m2: p.beta,
            gamma: p.gamma,
            noise_var: p.r_var,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionFile {
    pub speed_mps: f64,
    pub dt_s: f64,
    pub gravity_mps2: f64,
    pub min_turn_radius_m: f64,
}

impl Default for MotionFile {
    fn default() -> Self {
        Self {
            speed_mps: 1.0,
            dt_s: 1.0,
            gravity_mps2: mi_seeker_core::models::GRAVITY,
            min_turn_radius_m: 3.0,
        }
    }
}

/// Standard deviations of the reference process noise; the injected
/// covariance is `noise_multiplier * diag(sigma^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseNoiseFile {
    pub sigma_x_m: f64,
    pub sigma_y_m: f64,
    pub sigma_psi_rad: f64,
}

impl Default for BaseNoiseFile {
    fn default() -> Self {
        Self {
            sigma_x_m: 0.05,
            sigma_y_m: 0.05,
            sigma_psi_rad: 0.0436,
        }
    }
}

impl BaseNoiseFile {
    pub fn covariance(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(
            self.sigma_x_m * self.sigma_x_m,
            self.sigma_y_m * self.sigma_y_m,
            self.sigma_psi_rad * self.sigma_psi_rad,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SearchFile {
    /// Exhaustive for up to three agents, sequential-greedy beyond.
    #[default]
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerFile {
    /// Odd number of bank angles spread evenly over `[-u_max, u_max]`.
    pub bank_levels: usize,
    pub search: SearchFile,
}

impl Default for PlannerFile {
    fn default() -> Self {
        Self {
            bank_levels: 5,
            search: SearchFile::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepFile {
    pub levels: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<String>,
}

impl Default for SweepFile {
    fn default() -> Self {
        Self {
            levels: vec![0.0, 0.5, 1.0, 2.0, 4.0, 6.0],
            trials: 30,
            algorithms: vec!["pf-only".into(), "proposed".into()],
        }
    }
}

/// Top-level configuration shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Trial index of a single `run`; sweeps enumerate their own.
    pub trial: u64,
    pub horizon_steps: usize,
    pub n_particles: usize,
    pub algorithm: String,
    pub noise_multiplier: f64,
    pub base_noise: BaseNoiseFile,
    pub region: RegionFile,
    pub n_agents: usize,
    /// Explicit initial agent states; overrides `n_agents` when present.
    pub agents: Option<Vec<AgentFile>>,
    /// Fixed target; drawn uniformly over the region when absent.
    pub target: Option<TargetFile>,
    pub sensor: SensorFile,
    pub motion: MotionFile,
    pub planner: PlannerFile,
    /// `halt` or `reseed`.
    pub on_collapse: String,
    pub sweep: SweepFile,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            trial: 0,
            horizon_steps: 100,
            n_particles: 500,
            algorithm: "proposed".into(),
            noise_multiplier: 0.0,
            base_noise: BaseNoiseFile::default(),
            region: RegionFile::default(),
            n_agents: 4,
            agents: None,
            target: None,
            sensor: SensorFile::default(),
            motion: MotionFile::default(),
            planner: PlannerFile::default(),
            on_collapse: "halt".into(),
            sweep: SweepFile::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algorithm: Option<String>,
    pub noise_multiplier: Option<f64>,
    pub trials: Option<usize>,
}

impl Config {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!("line {}, column {}: {}", e.line(), e.column(), e)
        })
    }

    /// Reads `path`, or returns the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("{}: cannot read config", p.display()))?;
                Self::from_json(&text).with_context(|| format!("{}: invalid config", p.display()))
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(a) = &o.algorithm {
            self.algorithm = a.clone();
        }
        if let Some(m) = o.noise_multiplier {
            self.noise_multiplier = m;
        }
        if let Some(t) = o.trials {
            self.sweep.trials = t;
        }
    }

    pub fn algorithm(&self) -> anyhow::Result<Algorithm> {
        parse_algorithm(&self.algorithm)
    }

    pub fn collapse_policy(&self) -> anyhow::Result<CollapsePolicy> {
        match self.on_collapse.as_str() {
            "halt" => Ok(CollapsePolicy::Halt),
            "reseed" => Ok(CollapsePolicy::Reseed),
            other => bail!("on_collapse: expected 'halt' or 'reseed', got '{other}'"),
        }
    }

    pub fn motion_params(&self) -> anyhow::Result<MotionParams> {
        let m = &self.motion;
        if m.min_turn_radius_m.is_nan() || m.min_turn_radius_m <= 0.0 {
            bail!("motion.min_turn_radius_m must be positive");
        }
        let u_max = max_bank_for_radius(m.speed_mps, m.min_turn_radius_m, m.gravity_mps2);
        MotionParams::new(m.speed_mps, m.dt_s, m.gravity_mps2, u_max, Matrix3::zeros())
            .context("motion")
    }

    /// Episode for `algorithm` with the world noise at `multiplier` times the
    /// reference covariance.
    pub fn episode(&self, algorithm: Algorithm, multiplier: f64, trial: u64) -> anyhow::Result<EpisodeConfig> {
        if !(multiplier >= 0.0 && multiplier.is_finite()) {
            bail!("noise multiplier must be finite and nonnegative, got {multiplier}");
        }
        let r = &self.region;
        let region = Region::new(r.x_min_m, r.x_max_m, r.y_min_m, r.y_max_m).context("region")?;
        let s = &self.sensor;
        let sensor = SensorParams::new(s.alpha, s.beta_m2, s.gamma, s.noise_var).context("sensor")?;
        let motion = self.motion_params()?;
        let initial_agents = match &self.agents {
            Some(list) => list.iter().map(|a| AgentState::new(a.x_m, a.y_m, a.psi_rad)).collect(),
            None => {
                if self.n_agents == 0 {
                    bail!("n_agents must be at least 1");
                }
                default_topology(&region, self.n_agents)
            }
        };
        let mode = match self.planner.search {
            SearchFile::Auto => SearchMode::default_for(initial_agents.len()),
            SearchFile::Exhaustive => SearchMode::ExhaustiveJoint,
            SearchFile::Greedy => SearchMode::SequentialGreedy,
        };
        let grid = ActionGrid::new(self.planner.bank_levels, motion.u_max, mode).context("planner")?;
        let cfg = EpisodeConfig {
            region,
            initial_agents,
            target: self.target.map(|t| TargetPosition::new(t.x_m, t.y_m)),
            true_noise_cov: Matrix3::zeros(),
            sensor,
            motion,
            n_particles: self.n_particles,
            grid,
            horizon: self.horizon_steps,
            seed: self.seed,
            trial,
            algorithm,
            on_collapse: self.collapse_policy()?,
        }
        .with_noise(self.base_noise.covariance() * multiplier, algorithm);
        cfg.validate().context("episode")?;
        Ok(cfg)
    }

    /// Episode for a single `run`.
    pub fn run_episode_config(&self) -> anyhow::Result<EpisodeConfig> {
        self.episode(self.algorithm()?, self.noise_multiplier, self.trial)
    }
}

pub fn parse_algorithm(name: &str) -> anyhow::Result<Algorithm> {
    name.parse::<Algorithm>().map_err(|e| anyhow::anyhow!("algorithm: {e}"))
}
