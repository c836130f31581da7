//! Ground-truth world and the closed-loop episode: plan, move, observe,
//! update.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::belief::{
    agent_marginal_estimate, effective_sample_size, ekf_correct, low_variance_resample, needs_resample,
    target_mmse_estimate, weight_update, GaussianBelief, HybridBelief,
};
use crate::error::{Error, Result};
use crate::models::{check_psd, fixedwing_step, AgentState, MotionParams, SensorParams, TargetPosition};
use crate::noise::{NoiseChecksum, NoiseStreams, StreamTag};
use crate::planner::{plan_step, ActionGrid, JointAction, SearchMode};

/// Which estimator drives the planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Particle filter over the target with an EKF bank over the agents.
    Proposed,
    /// Same machinery with zero assumed process noise: agents are dead-reckoned.
    PfOnly,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::PfOnly => "pf-only",
        }
    }

    /// Process noise the filters assume when the world injects `true_cov`.
    pub fn assumed_noise_cov(&self, true_cov: &Matrix3<f64>) -> Matrix3<f64> {
        match self {
            Algorithm::Proposed => *true_cov,
            Algorithm::PfOnly => Matrix3::zeros(),
        }
    }
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Algorithm::Proposed),
            "pf-only" => Ok(Algorithm::PfOnly),
            other => Err(Error::InvalidConfig(alloc::format!("unknown algorithm '{other}'"))),
        }
    }
}

/// What to do when every particle likelihood vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollapsePolicy {
    #[default]
    Halt,
    /// Redraw particles uniformly over the region and keep going.
    Reseed,
}

/// Axis-aligned search region; bounds the target prior, not the flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if finite && self.x_max > self.x_min && self.y_max > self.y_min {
            Ok(())
        } else {
            Err(Error::InvalidConfig("region must have positive extent".into()))
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> TargetPosition {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        TargetPosition::new(
            self.x_min + u * (self.x_max - self.x_min),
            self.y_min + v * (self.y_max - self.y_min),
        )
    }
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 40.0,
            y_min: 0.0,
            y_max: 40.0,
        }
    }
}

/// `n` agents on the region boundary, evenly spread in angle about the
/// center starting from the bottom edge, each heading toward the center.
/// For four agents these are the edge midpoints.
pub fn default_topology(region: &Region, n: usize) -> Vec<AgentState> {
    let (cx, cy) = region.center();
    let hx = 0.5 * (region.x_max - region.x_min);
    let hy = 0.5 * (region.y_max - region.y_min);
    (0..n)
        .map(|j| {
            let a = -PI / 2.0 + 2.0 * PI * j as f64 / n as f64;
            let (s, c) = (libm::sin(a), libm::cos(a));
            let reach = (hx / libm::fabs(c)).min(hy / libm::fabs(s));
            AgentState::new(cx + reach * c, cy + reach * s, a + PI)
        })
        .collect()
}

/// Everything that determines an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub region: Region,
    pub initial_agents: Vec<AgentState>,
    /// Fixed true target; drawn uniformly over the region when `None`.
    pub target: Option<TargetPosition>,
    /// Process-noise covariance the world injects.
    pub true_noise_cov: Matrix3<f64>,
    pub sensor: SensorParams,
    /// Kinematics; `motion.q_cov` is the process noise the filters assume.
    pub motion: MotionParams,
    pub n_particles: usize,
    pub grid: ActionGrid,
    pub horizon: usize,
    pub seed: u64,
    pub trial: u64,
    pub algorithm: Algorithm,
    pub on_collapse: CollapsePolicy,
}

impl EpisodeConfig {
    /// Four agents on a 40 m x 40 m region, noise-free, 500 particles,
    /// five bank levels, 100 steps.
    pub fn standard(seed: u64) -> Self {
        let region = Region::default();
        let motion = MotionParams::default();
        let n_agents = 4;
        Self {
            initial_agents: default_topology(&region, n_agents),
            region,
            target: None,
            true_noise_cov: Matrix3::zeros(),
            sensor: SensorParams::default(),
            grid: ActionGrid::new(5, motion.u_max, SearchMode::default_for(n_agents))
                .expect("static grid is valid"),
            motion,
            n_particles: 500,
            horizon: 100,
            seed,
            trial: 0,
            algorithm: Algorithm::Proposed,
            on_collapse: CollapsePolicy::Halt,
        }
    }

    /// Sets the world's process noise and the matching assumed noise for
    /// `algorithm`.
    pub fn with_noise(mut self, true_cov: Matrix3<f64>, algorithm: Algorithm) -> Self {
        self.true_noise_cov = true_cov;
        self.algorithm = algorithm;
        self.motion = self.motion.with_q_cov(algorithm.assumed_noise_cov(&true_cov));
        self
    }

    pub fn n_agents(&self) -> usize {
        self.initial_agents.len()
    }

    pub fn assumed_noise_cov(&self) -> &Matrix3<f64> {
        &self.motion.q_cov
    }

    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.sensor.validate()?;
        self.motion.validate()?;
        check_psd(&self.true_noise_cov, "true process-noise covariance")?;
        if self.initial_agents.is_empty() {
            return Err(Error::InvalidConfig("at least one agent is required".into()));
        }
        if self.n_particles == 0 {
            return Err(Error::InvalidConfig("at least one particle is required".into()));
        }
        if self.grid.values().iter().any(|u| libm::fabs(*u) > self.motion.u_max) {
            return Err(Error::InvalidConfig("action grid exceeds the bank limit".into()));
        }
        if self.algorithm == Algorithm::PfOnly && self.motion.q_cov != Matrix3::zeros() {
            return Err(Error::InvalidConfig(
                "pf-only requires zero assumed process noise".into(),
            ));
        }
        if let Some(t) = self.target {
            if !(t.tx.is_finite() && t.ty.is_finite()) {
                return Err(Error::InvalidConfig("target position must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub agents: Vec<AgentState>,
    pub target: TargetPosition,
    pub time_step: usize,
}

/// Square-root factor of a PSD process-noise covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoise {
    factor: Matrix3<f64>,
}

impl ProcessNoise {
    pub fn new(cov: &Matrix3<f64>) -> Result<Self> {
        check_psd(cov, "process-noise covariance")?;
        if *cov == Matrix3::zeros() {
            return Ok(Self {
                factor: Matrix3::zeros(),
            });
        }
        let eig = cov.symmetric_eigen();
        let roots = eig.eigenvalues.map(|v| libm::sqrt(v.max(0.0)));
        Ok(Self {
            factor: eig.eigenvectors * Matrix3::from_diagonal(&roots),
        })
    }

    /// Maps a standard-normal draw to a draw with this covariance.
    pub fn shape(&self, standard: &Vector3<f64>) -> Vector3<f64> {
        self.factor * standard
    }
}

/// Draws the true target (unless fixed) and the initial particles, and sets
/// every bank entry to the exactly known initial agent pose.
pub fn init_episode(cfg: &EpisodeConfig, streams: &NoiseStreams) -> Result<(WorldState, HybridBelief)> {
    cfg.validate()?;
    let mut rng = streams.init_rng();
    // always consumed so particle draws do not depend on whether the target is fixed
    let drawn = cfg.region.sample(&mut rng);
    let target = cfg.target.unwrap_or(drawn);
    let particles = (0..cfg.n_particles).map(|_| cfg.region.sample(&mut rng)).collect();
    let bank: Vec<_> = cfg.initial_agents.iter().map(GaussianBelief::certain).collect();
    let belief = HybridBelief::new(particles, &bank)?;
    Ok((
        WorldState {
            agents: cfg.initial_agents.clone(),
            target,
            time_step: 0,
        },
        belief,
    ))
}

/// Advances the true agents one step with injected process noise. The
/// target does not move.
pub fn step_world(
    w: &WorldState,
    action: &JointAction,
    m: &MotionParams,
    noise: &ProcessNoise,
    streams: &NoiseStreams,
    checksum: &mut NoiseChecksum,
) -> Result<WorldState> {
    let step = w.time_step + 1;
    let agents = w
        .agents
        .iter()
        .zip(&action.banks)
        .enumerate()
        .map(|(i, (a, u))| {
            let next = fixedwing_step(a, *u, m)?;
            let nu = noise.shape(&streams.motion(step as u64, i as u32));
            nu.iter().for_each(|v| checksum.absorb(*v));
            Ok(AgentState::from_vector(&(next.to_vector() + nu)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WorldState {
        agents,
        target: w.target,
        time_step: step,
    })
}

/// Noisy SNR measurement from every agent.
pub fn observe(
    w: &WorldState,
    p: &SensorParams,
    streams: &NoiseStreams,
    checksum: &mut NoiseChecksum,
) -> Vec<f64> {
    let sd = libm::sqrt(p.r_var);
    w.agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let n = sd * streams.measurement(w.time_step as u64, i as u32);
            checksum.absorb(n);
            crate::models::snr_measure(a, &w.target, p) + n
        })
        .collect()
}

/// What happened at one time step, after the filter update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub time_step: usize,
    /// Bank angles chosen from the belief at the previous step.
    pub action: Vec<f64>,
    pub true_agents: Vec<AgentState>,
    pub measurements: Vec<f64>,
    pub target_estimate: TargetPosition,
    /// Moment-matched agent means.
    pub agent_estimates: Vec<AgentState>,
    pub target_error: f64,
    /// Position error of each agent.
    pub agent_errors: Vec<f64>,
    /// Mean of `agent_errors`.
    pub agent_error: f64,
    /// Effective sample size after the weight update, before any resampling.
    pub n_eff: f64,
    /// Particles were resampled (or re-seeded after a collapse).
    pub resampled: bool,
    pub objective: f64,
}

/// Why an episode stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Halt {
    pub time_step: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub records: Vec<StepRecord>,
    pub halt: Option<Halt>,
    pub true_target: TargetPosition,
    /// Fold of every motion and measurement noise value injected.
    pub noise_checksum: u64,
    pub psd_repairs: u64,
}

/// A running episode, advanced one step at a time.
pub struct Episode {
    cfg: EpisodeConfig,
    streams: NoiseStreams,
    noise: ProcessNoise,
    world: WorldState,
    belief: HybridBelief,
    checksum: NoiseChecksum,
}

impl Episode {
    pub fn new(cfg: EpisodeConfig) -> Result<Self> {
        let streams = NoiseStreams::new(cfg.seed, cfg.trial);
        let (world, belief) = init_episode(&cfg, &streams)?;
        let noise = ProcessNoise::new(&cfg.true_noise_cov)?;
        Ok(Self {
            cfg,
            streams,
            noise,
            world,
            belief,
            checksum: NoiseChecksum::default(),
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn belief(&self) -> &HybridBelief {
        &self.belief
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn noise_checksum(&self) -> u64 {
        self.checksum.0
    }

    /// Plans from the current belief, moves the world, observes, and updates
    /// the filters.
    pub fn step(&mut self) -> Result<StepRecord> {
        let plan = plan_step(&self.belief, &self.cfg.grid, &self.cfg.motion, &self.cfg.sensor)?;
        self.world = step_world(
            &self.world,
            &plan.best,
            &self.cfg.motion,
            &self.noise,
            &self.streams,
            &mut self.checksum,
        )?;
        let t = self.world.time_step;
        let z = observe(&self.world, &self.cfg.sensor, &self.streams, &mut self.checksum);

        let n_v = self.belief.n_agents();
        let mut resampled = false;
        let n_eff;
        match weight_update(self.belief.weights(), &plan.table.moments, &z) {
            Ok(weights) => {
                let mut bank = Vec::with_capacity(plan.table.priors.len());
                for (k, theta) in self.belief.particles().iter().enumerate() {
                    for (i, zi) in z.iter().enumerate() {
                        bank.push(ekf_correct(&plan.table.priors[k * n_v + i], *zi, theta, &self.cfg.sensor)?);
                    }
                }
                self.belief.set_bank(bank)?;
                self.belief.set_weights(weights)?;
                n_eff = effective_sample_size(self.belief.weights());
                if needs_resample(self.belief.weights()) {
                    let offset = self.streams.resample_offset(t as u64) / self.belief.n_particles() as f64;
                    self.belief = low_variance_resample(&self.belief, offset);
                    resampled = true;
                }
            }
            Err(Error::WeightCollapse) if self.cfg.on_collapse == CollapsePolicy::Reseed => {
                let predicted = HybridBelief::from_parts(
                    self.belief.particles().to_vec(),
                    self.belief.weights().to_vec(),
                    plan.table.priors.clone(),
                    n_v,
                )?;
                let agents: Vec<_> = (0..n_v).map(|i| agent_marginal_estimate(&predicted, i)).collect();
                let mut rng = self.streams.rng(StreamTag::Init, t as u64, 0);
                let particles = (0..self.cfg.n_particles)
                    .map(|_| self.cfg.region.sample(&mut rng))
                    .collect();
                self.belief.reseed(particles, &agents)?;
                n_eff = self.belief.n_particles() as f64;
                resampled = true;
            }
            Err(e) => return Err(e),
        }

        let target_estimate = target_mmse_estimate(&self.belief);
        let agent_estimates: Vec<AgentState> = (0..n_v)
            .map(|i| agent_marginal_estimate(&self.belief, i).state())
            .collect();
        let agent_errors: Vec<f64> = agent_estimates
            .iter()
            .zip(&self.world.agents)
            .map(|(e, a)| e.position_distance(a))
            .collect();
        Ok(StepRecord {
            time_step: t,
            action: plan.best.banks,
            true_agents: self.world.agents.clone(),
            measurements: z,
            target_error: target_estimate.distance(&self.world.target),
            target_estimate,
            agent_estimates,
            agent_error: agent_errors.iter().sum::<f64>() / n_v as f64,
            agent_errors,
            n_eff,
            resampled,
            objective: plan.objective,
        })
    }
}

/// Runs a whole episode. Configuration problems are errors; filter or
/// planner failures halt the episode and are reported in the outcome.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeOutcome> {
    let mut ep = Episode::new(cfg.clone())?;
    let mut records = Vec::with_capacity(cfg.horizon);
    let mut halt = None;
    for _ in 0..cfg.horizon {
        match ep.step() {
            Ok(r) => records.push(r),
            Err(error) => {
                halt = Some(Halt {
                    time_step: ep.world.time_step,
                    error,
                });
                break;
            }
        }
    }
    Ok(EpisodeOutcome {
        records,
        halt,
        true_target: ep.world.target,
        noise_checksum: ep.checksum.0,
        psd_repairs: ep.belief.psd_repairs,
    })
}
