//! One-step mutual-information planner.
//!
//! For a candidate joint action every (agent, particle) belief is pushed
//! through the EKF prediction and mapped to predicted measurement moments.
//! The measurement mixture is replaced by the Gaussian with the same first two
//! moments, which turns the mutual information into a difference of log
//! determinants that is cheap to score.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::belief::{ekf_predict, predicted_measurement_moments, GaussianBelief, HybridBelief, MeasurementMoments};
use crate::error::{Error, Result};
use crate::models::{MotionModel, MotionParams, SensorModel};

/// One bank-angle command per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAction {
    pub banks: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Scores the full Cartesian product of per-agent levels.
    ExhaustiveJoint,
    /// Optimizes agents one at a time in index order; agents not yet visited
    /// fly straight.
    SequentialGreedy,
}

impl SearchMode {
    pub fn default_for(n_agents: usize) -> Self {
        if n_agents <= 3 {
            SearchMode::ExhaustiveJoint
        } else {
            SearchMode::SequentialGreedy
        }
    }
}

/// Discrete per-agent bank angles, symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    values: Vec<f64>,
    mode: SearchMode,
}

impl ActionGrid {
    /// `levels` evenly spaced angles from `-u_max` to `u_max`; `levels` must be odd.
    pub fn new(levels: usize, u_max: f64, mode: SearchMode) -> Result<Self> {
        if levels == 0 || levels.is_multiple_of(2) {
            return Err(Error::InvalidConfig(
                "action grid needs an odd number of levels".into(),
            ));
        }
        if !(u_max.is_finite() && u_max > 0.0) {
            return Err(Error::InvalidConfig("u_max must be positive".into()));
        }
        let half = (levels / 2) as f64;
        let values = (0..levels)
            .map(|j| {
                if levels == 1 {
                    0.0
                } else {
                    u_max * (j as f64 - half) / half
                }
            })
            .collect();
        Ok(Self { values, mode })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn levels(&self) -> usize {
        self.values.len()
    }

    pub fn mode(&self) -> SearchMode {
        self.mode
    }

    /// Index of the zero (straight flight) level.
    pub fn zero_index(&self) -> usize {
        self.values.len() / 2
    }

    pub fn action(&self, level_indices: &[usize]) -> JointAction {
        JointAction {
            banks: level_indices.iter().map(|l| self.values[*l]).collect(),
        }
    }
}

/// Hypothetical priors and predicted measurement moments for one joint
/// action, row-major `n_particles x n_agents`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub n_agents: usize,
    pub priors: Vec<GaussianBelief>,
    pub moments: Vec<MeasurementMoments>,
}

/// Predicts every agent belief under `action` and evaluates the measurement
/// moments against every particle. The belief itself is not modified.
pub fn candidate_moments<M: MotionModel, S: SensorModel>(
    hb: &HybridBelief,
    action: &JointAction,
    motion: &M,
    sensor: &S,
) -> Result<MomentTable> {
    let n_v = hb.n_agents();
    if action.banks.len() != n_v {
        return Err(Error::InvalidConfig("action length differs from agent count".into()));
    }
    let mut priors = Vec::with_capacity(hb.bank().len());
    let mut moments = Vec::with_capacity(hb.bank().len());
    for (k, theta) in hb.particles().iter().enumerate() {
        for (b, u) in hb.row(k).iter().zip(&action.banks) {
            let prior = ekf_predict(b, *u, motion)?;
            moments.push(predicted_measurement_moments(&prior, theta, sensor)?);
            priors.push(prior);
        }
    }
    Ok(MomentTable {
        n_agents: n_v,
        priors,
        moments,
    })
}

/// Mean and covariance of the predicted measurement mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

fn mixture_with<F>(weights: &[f64], n_v: usize, get: F) -> MixtureMoments
where
    F: Fn(usize, usize) -> MeasurementMoments,
{
    let mut mean = DVector::zeros(n_v);
    for (k, w) in weights.iter().enumerate() {
        for i in 0..n_v {
            mean[i] += w * get(k, i).mean;
        }
    }
    let mut cov = DMatrix::zeros(n_v, n_v);
    let mut centered = alloc::vec![0.0; n_v];
    for (k, w) in weights.iter().enumerate() {
        for (i, c) in centered.iter_mut().enumerate() {
            *c = get(k, i).mean - mean[i];
        }
        for i in 0..n_v {
            cov[(i, i)] += w * (get(k, i).var + centered[i] * centered[i]);
            for j in 0..i {
                cov[(i, j)] += w * centered[i] * centered[j];
            }
        }
    }
    for i in 0..n_v {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
    }
    MixtureMoments { mean, cov }
}

/// Moment-matched Gaussian of the predicted measurement mixture.
pub fn mixture_moments(weights: &[f64], moments: &[MeasurementMoments], n_v: usize) -> MixtureMoments {
    mixture_with(weights, n_v, |k, i| moments[k * n_v + i])
}

/// `ln |cov|` via Cholesky; fails if `cov` is not positive definite.
pub fn log_det_spd(cov: &DMatrix<f64>) -> Result<f64> {
    let chol = cov.clone().cholesky().ok_or(Error::MomentDegenerate)?;
    let l = chol.l_dirty();
    let log_det = 2.0 * (0..cov.nrows()).map(|i| libm::log(l[(i, i)])).sum::<f64>();
    if log_det.is_finite() {
        Ok(log_det)
    } else {
        Err(Error::MomentDegenerate)
    }
}

fn weighted_log_var_with<F>(weights: &[f64], n_v: usize, get: F) -> f64
where
    F: Fn(usize, usize) -> MeasurementMoments,
{
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * (0..n_v).map(|i| libm::log(get(k, i).var)).sum::<f64>())
        .sum()
}

fn objective_with<F>(weights: &[f64], n_v: usize, get: F) -> Result<f64>
where
    F: Fn(usize, usize) -> MeasurementMoments + Copy,
{
    let mm = mixture_with(weights, n_v, get);
    Ok(log_det_spd(&mm.cov)? - weighted_log_var_with(weights, n_v, get))
}

/// Reduced information objective `ln|cov_hat| - sum_k w_k sum_i ln var_ik`.
pub fn mi_objective(
    weights: &[f64],
    moments: &[MeasurementMoments],
    n_v: usize,
    mm: &MixtureMoments,
) -> Result<f64> {
    Ok(log_det_spd(&mm.cov)? - weighted_log_var_with(weights, n_v, |k, i| moments[k * n_v + i]))
}

/// Entropy of the moment-matched Gaussian approximation of the measurement.
pub fn gaussian_entropy(mm: &MixtureMoments) -> Result<f64> {
    let n = mm.cov.nrows() as f64;
    Ok(0.5 * (n * (1.0 + libm::log(2.0 * PI)) + log_det_spd(&mm.cov)?))
}

/// Conditional measurement entropy given the target, with each per-particle
/// predictive treated as Gaussian.
pub fn conditional_entropy(weights: &[f64], moments: &[MeasurementMoments], n_v: usize) -> f64 {
    let c = 1.0 + libm::log(2.0 * PI);
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            w * moments[k * n_v..(k + 1) * n_v]
                .iter()
                .map(|m| 0.5 * (c + libm::log(m.var)))
                .sum::<f64>()
        })
        .sum()
}

/// The filter configuration of the particle-filter-only baseline: identical
/// kinematics, zero assumed process noise.
pub fn baseline_config(motion: &MotionParams) -> MotionParams {
    motion.with_q_cov(Matrix3::zeros())
}

/// Objectives closer than this are ties.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Result of one planning step.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub best: JointAction,
    pub level_indices: Vec<usize>,
    pub objective: f64,
    /// Priors and moments of the chosen action, reused by the filter update.
    pub table: MomentTable,
}

struct Column {
    priors: Vec<GaussianBelief>,
    moments: Vec<MeasurementMoments>,
}

/// Per-agent, per-level predictions. An agent's moments depend only on its
/// own bank angle, so joint candidates are assembled from these columns.
fn columns<M: MotionModel, S: SensorModel>(
    hb: &HybridBelief,
    grid: &ActionGrid,
    motion: &M,
    sensor: &S,
) -> Vec<Vec<Option<Column>>> {
    (0..hb.n_agents())
        .map(|i| {
            grid.values()
                .iter()
                .map(|u| {
                    let mut priors = Vec::with_capacity(hb.n_particles());
                    let mut moments = Vec::with_capacity(hb.n_particles());
                    for (k, theta) in hb.particles().iter().enumerate() {
                        let prior = ekf_predict(hb.agent(k, i), *u, motion).ok()?;
                        moments.push(predicted_measurement_moments(&prior, theta, sensor).ok()?);
                        priors.push(prior);
                    }
                    Some(Column { priors, moments })
                })
                .collect()
        })
        .collect()
}

fn score(hb: &HybridBelief, cols: &[Vec<Option<Column>>], levels: &[usize]) -> f64 {
    let picked: Option<Vec<&Column>> = levels
        .iter()
        .enumerate()
        .map(|(i, l)| cols[i][*l].as_ref())
        .collect();
    let Some(picked) = picked else {
        return f64::NEG_INFINITY;
    };
    match objective_with(hb.weights(), levels.len(), |k, i| picked[i].moments[k]) {
        Ok(v) if !v.is_nan() => v,
        _ => f64::NEG_INFINITY,
    }
}

/// Chooses the joint action maximizing the information objective.
///
/// Ties go to the lexicographically smallest level-index vector (agent 0
/// most significant).
pub fn plan_step<M: MotionModel, S: SensorModel>(
    hb: &HybridBelief,
    grid: &ActionGrid,
    motion: &M,
    sensor: &S,
) -> Result<PlanOutcome> {
    let n_v = hb.n_agents();
    let n_levels = grid.levels();
    let cols = columns(hb, grid, motion, sensor);

    let mut best_levels: Option<Vec<usize>> = None;
    let mut best_score = f64::NEG_INFINITY;
    match grid.mode() {
        SearchMode::ExhaustiveJoint => {
            let mut levels = alloc::vec![0usize; n_v];
            'outer: loop {
                let s = score(hb, &cols, &levels);
                if s > best_score + TIE_TOLERANCE {
                    best_score = s;
                    best_levels = Some(levels.clone());
                }
                // mixed-radix increment, last agent fastest
                for i in (0..n_v).rev() {
                    levels[i] += 1;
                    if levels[i] < n_levels {
                        continue 'outer;
                    }
                    levels[i] = 0;
                }
                break;
            }
        }
        SearchMode::SequentialGreedy => {
            let mut levels = alloc::vec![grid.zero_index(); n_v];
            for i in 0..n_v {
                let mut agent_best = None;
                let mut agent_score = f64::NEG_INFINITY;
                for l in 0..n_levels {
                    levels[i] = l;
                    let s = score(hb, &cols, &levels);
                    if s > agent_score + TIE_TOLERANCE {
                        agent_score = s;
                        agent_best = Some(l);
                    }
                }
                levels[i] = agent_best.unwrap_or(grid.zero_index());
                if agent_best.is_some() {
                    best_score = agent_score;
                    best_levels = Some(levels.clone());
                } else {
                    best_levels = None;
                }
            }
        }
    }

    let level_indices = best_levels.ok_or(Error::PlannerStarved)?;
    let mut priors = Vec::with_capacity(hb.bank().len());
    let mut moments = Vec::with_capacity(hb.bank().len());
    for k in 0..hb.n_particles() {
        for (i, l) in level_indices.iter().enumerate() {
            let col = cols[i][*l].as_ref().ok_or(Error::PlannerStarved)?;
            priors.push(col.priors[k]);
            moments.push(col.moments[k]);
        }
    }
    Ok(PlanOutcome {
        best: grid.action(&level_indices),
        level_indices,
        objective: best_score,
        table: MomentTable {
            n_agents: n_v,
            priors,
            moments,
        },
    })
}
