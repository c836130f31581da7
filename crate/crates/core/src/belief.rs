//! Rao-Blackwellized belief over the target and the agents.
//!
//! The target posterior is a set of motionless weighted particles. Each
//! particle carries its own bank of Gaussian agent beliefs, one per agent,
//! conditioned on that particle's target hypothesis. Agent beliefs are
//! propagated and corrected with an EKF; particle weights are rescaled by the
//! predictive likelihood of the measurements.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::models::{wrap_angle, AgentState, MotionModel, SensorModel, TargetPosition};

/// Gaussian belief over one agent's `(x, y, psi)` state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief {
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
}

impl GaussianBelief {
    pub fn new(mean: Vector3<f64>, cov: Matrix3<f64>) -> Self {
        Self { mean, cov }
    }

    /// Exactly known state (zero covariance).
    pub fn certain(state: &AgentState) -> Self {
        Self {
            mean: state.to_vector(),
            cov: Matrix3::zeros(),
        }
    }

    pub fn state(&self) -> AgentState {
        AgentState::from_vector(&self.mean)
    }

    /// Forces exact symmetry and, if an eigenvalue fell below `-1e-10`,
    /// clips the spectrum at zero. Returns whether a clip was needed.
    pub fn condition(&mut self) -> bool {
        self.cov = symmetrize(&self.cov);
        if self.cov.iter().all(|v| *v == 0.0) {
            return false;
        }
        // a successful factorization of the shifted matrix settles most calls
        if (self.cov + Matrix3::identity() * 1e-10).cholesky().is_some() {
            return false;
        }
        let eig = self.cov.symmetric_eigen();
        if eig.eigenvalues.min() >= -1e-10 {
            return false;
        }
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        self.cov = symmetrize(
            &(eig.eigenvectors * Matrix3::from_diagonal(&clipped) * eig.eigenvectors.transpose()),
        );
        true
    }
}

pub(crate) fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// Predicted measurement distribution for one (agent, particle) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementMoments {
    pub mean: f64,
    pub var: f64,
}

/// EKF prediction: `mean <- f(mean, u)`, `cov <- F cov F^T + Q`.
pub fn ekf_predict<M: MotionModel>(b: &GaussianBelief, u: f64, m: &M) -> Result<GaussianBelief> {
    let state = b.state();
    let next = m.step(&state, u)?;
    let f = m.jacobian(&state, u)?;
    let cov = symmetrize(&(f * b.cov * f.transpose() + m.process_noise()));
    Ok(GaussianBelief {
        mean: next.to_vector(),
        cov,
    })
}

/// Mean and variance of the measurement predicted from a prior agent belief
/// and a target hypothesis.
pub fn predicted_measurement_moments<S: SensorModel>(
    prior: &GaussianBelief,
    theta: &TargetPosition,
    s: &S,
) -> Result<MeasurementMoments> {
    let state = prior.state();
    let h = s.jacobian(&state, theta)?;
    let spread = (h * prior.cov * h.transpose())[0];
    Ok(MeasurementMoments {
        mean: s.measure(&state, theta),
        var: spread.max(0.0) + s.noise_var(),
    })
}

/// EKF correction with a scalar measurement `z`.
pub fn ekf_correct<S: SensorModel>(
    prior: &GaussianBelief,
    z: f64,
    theta: &TargetPosition,
    s: &S,
) -> Result<GaussianBelief> {
    let state = prior.state();
    let h = s.jacobian(&state, theta)?;
    let innovation_var = (h * prior.cov * h.transpose())[0] + s.noise_var();
    let gain = prior.cov * h.transpose() / innovation_var;
    let innovation = z - s.measure(&state, theta);
    let mut mean = prior.mean + gain * innovation;
    mean[2] = wrap_angle(mean[2]);
    let cov = (Matrix3::identity() - gain * h) * prior.cov;
    Ok(GaussianBelief {
        mean,
        cov: symmetrize(&cov),
    })
}

/// Weighted target particles, each carrying a bank of agent beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBelief {
    particles: Vec<TargetPosition>,
    weights: Vec<f64>,
    /// Row-major `n_particles x n_agents`.
    bank: Vec<GaussianBelief>,
    n_agents: usize,
    /// Number of covariance spectra clipped back to PSD so far.
    pub psd_repairs: u64,
}

impl HybridBelief {
    /// Uniform weights, every bank row set to `agents`.
    pub fn new(particles: Vec<TargetPosition>, agents: &[GaussianBelief]) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidConfig("at least one particle is required".into()));
        }
        if agents.is_empty() {
            return Err(Error::InvalidConfig("at least one agent is required".into()));
        }
        let n = particles.len();
        let mut bank = Vec::with_capacity(n * agents.len());
        for _ in 0..n {
            bank.extend_from_slice(agents);
        }
        Ok(Self {
            weights: alloc::vec![1.0 / n as f64; n],
            particles,
            bank,
            n_agents: agents.len(),
            psd_repairs: 0,
        })
    }

    /// Assembles a belief from explicit parts; weights must be normalized.
    pub fn from_parts(
        particles: Vec<TargetPosition>,
        weights: Vec<f64>,
        bank: Vec<GaussianBelief>,
        n_agents: usize,
    ) -> Result<Self> {
        let n = particles.len();
        if n == 0 || n_agents == 0 || weights.len() != n || bank.len() != n * n_agents {
            return Err(Error::InvalidConfig("inconsistent belief dimensions".into()));
        }
        check_weights(&weights)?;
        Ok(Self {
            particles,
            weights,
            bank,
            n_agents,
            psd_repairs: 0,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn particles(&self) -> &[TargetPosition] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bank(&self) -> &[GaussianBelief] {
        &self.bank
    }

    /// Agent beliefs conditioned on particle `k`.
    pub fn row(&self, k: usize) -> &[GaussianBelief] {
        &self.bank[k * self.n_agents..(k + 1) * self.n_agents]
    }

    pub fn agent(&self, k: usize, i: usize) -> &GaussianBelief {
        &self.bank[k * self.n_agents + i]
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.weights.len() {
            return Err(Error::InvalidConfig("weight count mismatch".into()));
        }
        check_weights(&weights)?;
        self.weights = weights;
        Ok(())
    }

    /// Replaces the whole bank; covariances are conditioned and repairs counted.
    pub fn set_bank(&mut self, mut bank: Vec<GaussianBelief>) -> Result<()> {
        if bank.len() != self.bank.len() {
            return Err(Error::InvalidConfig("bank size mismatch".into()));
        }
        for b in bank.iter_mut() {
            if b.condition() {
                self.psd_repairs += 1;
            }
        }
        self.bank = bank;
        Ok(())
    }

    /// Replaces the particles, resetting weights to uniform and every bank row
    /// to `agents`.
    pub fn reseed(&mut self, particles: Vec<TargetPosition>, agents: &[GaussianBelief]) -> Result<()> {
        let repairs = self.psd_repairs;
        *self = Self::new(particles, agents)?;
        self.psd_repairs = repairs;
        Ok(())
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(
            "weights must be nonnegative and sum to one".into(),
        ));
    }
    Ok(())
}

/// `ln N(z; mean, var)`.
pub fn log_normal_pdf(z: f64, mean: f64, var: f64) -> f64 {
    let r = z - mean;
    -0.5 * (libm::log(2.0 * PI * var) + r * r / var)
}

/// Rescales particle weights by the product over agents of the predictive
/// measurement likelihoods.
///
/// `moments` is row-major `n_particles x n_agents`. Accumulation happens in
/// the log domain with the maximum subtracted before exponentiation.
pub fn weight_update(weights: &[f64], moments: &[MeasurementMoments], z: &[f64]) -> Result<Vec<f64>> {
    let n_v = z.len();
    if n_v == 0 || moments.len() != weights.len() * n_v {
        return Err(Error::InvalidConfig("moment table does not match weights".into()));
    }
    let log_w: Vec<f64> = weights
        .iter()
        .zip(moments.chunks_exact(n_v))
        .map(|(w, row)| {
            if *w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            row.iter()
                .zip(z)
                .fold(libm::log(*w), |acc, (m, zi)| acc + log_normal_pdf(*zi, m.mean, m.var))
        })
        .collect();
    let max = log_w
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::WeightCollapse);
    }
    let mut out: Vec<f64> = log_w
        .iter()
        .map(|v| if v.is_nan() { 0.0 } else { libm::exp(v - max) })
        .collect();
    let total: f64 = out.iter().sum();
    for w in out.iter_mut() {
        *w /= total;
    }
    Ok(out)
}

/// `1 / sum(w^2)`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Resampling fires strictly below half the particle count.
pub fn needs_resample(weights: &[f64]) -> bool {
    effective_sample_size(weights) < weights.len() as f64 / 2.0
}

/// Indices selected by a systematic comb with first tooth at `offset`.
///
/// `offset` must lie in `[0, 1/n)`.
pub fn systematic_indices(weights: &[f64], offset: f64) -> Vec<usize> {
    let n = weights.len();
    let step = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0;
    for m in 0..n {
        let tooth = offset + m as f64 * step;
        while tooth >= cumulative && i + 1 < n {
            i += 1;
            cumulative += weights[i];
        }
        out.push(i);
    }
    out
}

/// Low-variance resampling. Survivors keep their positions and carry a copy
/// of their whole bank row; weights become uniform.
pub fn low_variance_resample(hb: &HybridBelief, offset: f64) -> HybridBelief {
    let n = hb.n_particles();
    let idx = systematic_indices(&hb.weights, offset);
    let mut particles = Vec::with_capacity(n);
    let mut bank = Vec::with_capacity(hb.bank.len());
    for k in idx {
        particles.push(hb.particles[k]);
        bank.extend_from_slice(hb.row(k));
    }
    HybridBelief {
        particles,
        weights: alloc::vec![1.0 / n as f64; n],
        bank,
        n_agents: hb.n_agents,
        psd_repairs: hb.psd_repairs,
    }
}

/// Weighted particle mean.
pub fn target_mmse_estimate(hb: &HybridBelief) -> TargetPosition {
    let (tx, ty) = hb
        .particles
        .iter()
        .zip(&hb.weights)
        .fold((0.0, 0.0), |(x, y), (p, w)| (x + w * p.tx, y + w * p.ty));
    TargetPosition::new(tx, ty)
}

/// Moment-matched marginal of agent `i` over the particle mixture.
///
/// Means are accumulated as offsets from the first component, with heading
/// offsets wrapped, so identical components reproduce their mean exactly and
/// components straddling the `+-pi` seam do not cancel.
pub fn agent_marginal_estimate(hb: &HybridBelief, i: usize) -> GaussianBelief {
    let reference = hb.agent(0, i).mean;
    let offset = |b: &GaussianBelief| {
        let mut d = b.mean - reference;
        d[2] = wrap_angle(d[2]);
        d
    };
    let mut shift = Vector3::zeros();
    for (k, w) in hb.weights.iter().enumerate() {
        shift += offset(hb.agent(k, i)) * *w;
    }
    let mut second = Matrix3::zeros();
    for (k, w) in hb.weights.iter().enumerate() {
        let b = hb.agent(k, i);
        let d = offset(b) - shift;
        second += (b.cov + d * d.transpose()) * *w;
    }
    let mut mean = reference + shift;
    mean[2] = wrap_angle(mean[2]);
    GaussianBelief {
        mean,
        cov: symmetrize(&second),
    }
}
