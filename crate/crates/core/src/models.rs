//! Sensor and motion models.
//!
//! Both models are exposed through small "value + Jacobian" traits so the
//! filters and the planner stay agnostic of the concrete physics. The shipped
//! instances are the SNR sensor (range- and bearing-attenuated) and planar
//! fixed-wing kinematics at constant speed and altitude.

use core::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, RowVector3, Vector3};

use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = libm::remainder(angle, TAU);
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Planar pose of one fixed-wing agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    /// Heading, always within `(-pi, pi]`.
    pub psi: f64,
}

impl AgentState {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
        }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.psi)
    }

    /// Euclidean distance between the positions of two poses.
    pub fn position_distance(&self, other: &AgentState) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Position of the stationary target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPosition {
    pub tx: f64,
    pub ty: f64,
}

impl TargetPosition {
    pub fn new(tx: f64, ty: f64) -> Self {
        Self { tx, ty }
    }

    pub fn distance(&self, other: &TargetPosition) -> f64 {
        libm::hypot(self.tx - other.tx, self.ty - other.ty)
    }
}

/// Constants of the SNR sensor `alpha * gamma^(-phi^2) / (range^2 + beta)`
/// with additive Gaussian noise of variance `r_var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r_var: f64,
}

impl SensorParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, r_var: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            r_var,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.alpha, self.beta, self.gamma, self.r_var]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "sensor alpha, beta, gamma and noise variance must be positive".into(),
            ))
        }
    }
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            alpha: 1000.0,
            beta: 100.0,
            gamma: 3.375,
            r_var: 2.0,
        }
    }
}

/// Fixed-wing kinematics plus the process-noise covariance the filters assume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    pub speed: f64,
    pub dt: f64,
    pub g: f64,
    pub u_max: f64,
    /// Process-noise covariance assumed by the filters (not the world's).
    pub q_cov: Matrix3<f64>,
}

pub const GRAVITY: f64 = 9.81;

impl MotionParams {
    pub fn new(speed: f64, dt: f64, g: f64, u_max: f64, q_cov: Matrix3<f64>) -> Result<Self> {
        let m = Self {
            speed,
            dt,
            g,
            u_max,
            q_cov,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds the parameters from a minimum turn radius instead of a bank limit.
    pub fn from_turn_radius(
        speed: f64,
        dt: f64,
        g: f64,
        r_min: f64,
        q_cov: Matrix3<f64>,
    ) -> Result<Self> {
        if !(speed > 0.0 && g > 0.0 && r_min > 0.0) {
            return Err(Error::InvalidConfig(
                "speed, gravity and turn radius must be positive".into(),
            ));
        }
        Self::new(speed, dt, g, max_bank_for_radius(speed, r_min, g), q_cov)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::InvalidConfig("speed must be positive".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::InvalidConfig("gravity must be positive".into()));
        }
        if !(self.u_max > 0.0 && self.u_max < PI / 2.0) {
            return Err(Error::InvalidConfig("u_max must lie in (0, pi/2)".into()));
        }
        check_psd(&self.q_cov, "process-noise covariance")
    }

    /// Same kinematics with a different assumed process noise.
    pub fn with_q_cov(mut self, q_cov: Matrix3<f64>) -> Self {
        self.q_cov = q_cov;
        self
    }
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            speed: 1.0,
            dt: 1.0,
            g: GRAVITY,
            u_max: max_bank_for_radius(1.0, 3.0, GRAVITY),
            q_cov: Matrix3::zeros(),
        }
    }
}

pub(crate) fn check_psd(m: &Matrix3<f64>, what: &str) -> Result<()> {
    let asym = (m - m.transpose()).abs().max();
    if !m.iter().all(|v| v.is_finite()) || asym > 1e-12 {
        return Err(Error::InvalidConfig(alloc::format!(
            "{what} must be finite and symmetric"
        )));
    }
    let min_eig = m.symmetric_eigenvalues().min();
    if min_eig < -1e-12 {
        return Err(Error::InvalidConfig(alloc::format!(
            "{what} must be positive semi-definite"
        )));
    }
    Ok(())
}

/// Angle between the agent's heading and its line of sight to the target,
/// in `(-pi, pi]`. Returns 0 when the positions coincide.
pub fn bearing(a: &AgentState, t: &TargetPosition) -> f64 {
    let dx = t.tx - a.x;
    let dy = t.ty - a.y;
    if dx == 0.0 && dy == 0.0 {
        return 0.0;
    }
    wrap_angle(libm::atan2(dy, dx) - a.psi)
}

/// Noise-free SNR measurement.
pub fn snr_measure(a: &AgentState, t: &TargetPosition, p: &SensorParams) -> f64 {
    let dx = t.tx - a.x;
    let dy = t.ty - a.y;
    let phi = bearing(a, t);
    p.alpha * libm::pow(p.gamma, -phi * phi) / (dx * dx + dy * dy + p.beta)
}

/// Gradient of [`snr_measure`] with respect to the agent state `(x, y, psi)`.
pub fn snr_jacobian(a: &AgentState, t: &TargetPosition, p: &SensorParams) -> Result<RowVector3<f64>> {
    let dx = t.tx - a.x;
    let dy = t.ty - a.y;
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Err(Error::JacobianSingular);
    }
    let phi = bearing(a, t);
    let h = snr_measure(a, t, p);
    let denom = d2 + p.beta;
    // d(gamma^(-phi^2))/d(phi) / gamma^(-phi^2)
    let k = -2.0 * libm::log(p.gamma) * phi;
    // dphi/dx = dy/d2, dphi/dy = -dx/d2, dphi/dpsi = -1
    Ok(RowVector3::new(
        h * (k * dy / d2 + 2.0 * dx / denom),
        h * (-k * dx / d2 + 2.0 * dy / denom),
        -h * k,
    ))
}

/// Deterministic fixed-wing step under bank angle `u`.
pub fn fixedwing_step(a: &AgentState, u: f64, m: &MotionParams) -> Result<AgentState> {
    check_bank(u, m)?;
    Ok(AgentState::new(
        a.x + m.speed * libm::cos(a.psi) * m.dt,
        a.y + m.speed * libm::sin(a.psi) * m.dt,
        a.psi + m.g / m.speed * libm::tan(u) * m.dt,
    ))
}

/// Jacobian of [`fixedwing_step`] with respect to the state.
pub fn fixedwing_jacobian(a: &AgentState, u: f64, m: &MotionParams) -> Result<Matrix3<f64>> {
    check_bank(u, m)?;
    let vdt = m.speed * m.dt;
    Ok(Matrix3::new(
        1.0,
        0.0,
        -vdt * libm::sin(a.psi),
        0.0,
        1.0,
        vdt * libm::cos(a.psi),
        0.0,
        0.0,
        1.0,
    ))
}

fn check_bank(u: f64, m: &MotionParams) -> Result<()> {
    if u.is_nan() || libm::fabs(u) > m.u_max {
        return Err(Error::ControlOutOfBounds {
            bank: u,
            u_max: m.u_max,
        });
    }
    Ok(())
}

/// Bank angle giving minimum turn radius `r_min` at speed `v` under a
/// coordinated turn.
pub fn max_bank_for_radius(v: f64, r_min: f64, g: f64) -> f64 {
    libm::atan(v * v / (g * r_min))
}

/// A measurement model usable by the filters and the planner.
pub trait SensorModel {
    fn measure(&self, a: &AgentState, t: &TargetPosition) -> f64;
    fn jacobian(&self, a: &AgentState, t: &TargetPosition) -> Result<RowVector3<f64>>;
    fn noise_var(&self) -> f64;
}

/// A motion model usable by the filters and the simulator.
pub trait MotionModel {
    fn step(&self, a: &AgentState, u: f64) -> Result<AgentState>;
    fn jacobian(&self, a: &AgentState, u: f64) -> Result<Matrix3<f64>>;
    fn process_noise(&self) -> &Matrix3<f64>;
    fn max_bank(&self) -> f64;
}

impl SensorModel for SensorParams {
    fn measure(&self, a: &AgentState, t: &TargetPosition) -> f64 {
        snr_measure(a, t, self)
    }

    fn jacobian(&self, a: &AgentState, t: &TargetPosition) -> Result<RowVector3<f64>> {
        snr_jacobian(a, t, self)
    }

    fn noise_var(&self) -> f64 {
        self.r_var
    }
}

impl MotionModel for MotionParams {
    fn step(&self, a: &AgentState, u: f64) -> Result<AgentState> {
        fixedwing_step(a, u, self)
    }

    fn jacobian(&self, a: &AgentState, u: f64) -> Result<Matrix3<f64>> {
        fixedwing_jacobian(a, u, self)
    }

    fn process_noise(&self) -> &Matrix3<f64> {
        &self.q_cov
    }

    fn max_bank(&self) -> f64 {
        self.u_max
    }
}
