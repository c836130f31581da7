//! Numerical self-checks run by `mi-seeker check`.
//!
//! Each suite compares a library routine against an independent estimate:
//! finite differences, sampling, or a direct formula. Suites are generic over
//! the model traits so that a deliberately broken model can be checked too.

use std::fmt;

use mi_seeker_core::belief::{systematic_indices, GaussianBelief, HybridBelief, MeasurementMoments};
use mi_seeker_core::models::{wrap_angle, AgentState, MotionModel, SensorModel, TargetPosition};
use mi_seeker_core::planner::{
    candidate_moments, conditional_entropy, gaussian_entropy, mi_objective, mixture_moments, JointAction,
    MixtureMoments,
};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const SUITES: [&str; 4] = ["jacobian", "moments", "resampler", "objective"];

pub const FD_STEP: f64 = 1e-5;
pub const JACOBIAN_TOL: f64 = 1e-5;
pub const IDENTITY_TOL: f64 = 1e-12;
/// Standard errors allowed between a sampled and an exact moment.
pub const SE_BOUND: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub samples: usize,
    /// Worst observed value of the suite's statistic.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteReport {
    fn new(name: &'static str, samples: usize, worst: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: worst <= tolerance,
            samples,
            worst,
            tolerance,
            detail,
        }
    }

    pub fn margin(&self) -> f64 {
        self.tolerance - self.worst
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<10} {}  samples={:<7} worst={:.3e}  tol={:.3e}  margin={:.3e}  {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.samples,
            self.worst,
            self.tolerance,
            self.margin(),
            self.detail
        )
    }
}

/// Largest `|a - b|` in a row relative to the row's largest entry.
fn row_rel_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn nudge(a: &AgentState, j: usize, h: f64) -> AgentState {
    // the heading is not wrapped here so that the difference stays smooth
    let mut s = *a;
    match j {
        0 => s.x += h,
        1 => s.y += h,
        _ => s.psi += h,
    }
    s
}

/// Analytic Jacobians against central differences on `n` random states.
pub fn jacobian_suite<S: SensorModel, M: MotionModel>(sensor: &S, motion: &M, n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_sensor = 0.0f64;
    let mut worst_motion = 0.0f64;
    let mut failures = 0usize;
    let mut taken = 0;
    while taken < n {
        let a = AgentState::new(
            rng.random_range(-10.0..50.0),
            rng.random_range(-10.0..50.0),
            rng.random_range(-3.1..3.1),
        );
        let t = TargetPosition::new(rng.random_range(0.0..40.0), rng.random_range(0.0..40.0));
        let dist = ((t.tx - a.x).powi(2) + (t.ty - a.y).powi(2)).sqrt();
        let phi = mi_seeker_core::models::bearing(&a, &t);
        // the squared bearing has a kink where it wraps through +-pi
        if dist < 0.1 || phi.abs() > std::f64::consts::PI - 1e-3 {
            continue;
        }
        taken += 1;

        match sensor.jacobian(&a, &t) {
            Ok(h) => {
                let fd: Vec<f64> = (0..3)
                    .map(|j| {
                        (sensor.measure(&nudge(&a, j, FD_STEP), &t) - sensor.measure(&nudge(&a, j, -FD_STEP), &t))
                            / (2.0 * FD_STEP)
                    })
                    .collect();
                worst_sensor = worst_sensor.max(row_rel_error(h.as_slice(), &fd));
            }
            Err(_) => failures += 1,
        }

        let u = rng.random_range(-1.0..1.0) * motion.max_bank();
        let (Ok(f), Ok(_)) = (motion.jacobian(&a, u), motion.step(&a, u)) else {
            failures += 1;
            continue;
        };
        let mut fd = Matrix3::zeros();
        for j in 0..3 {
            let (Ok(p), Ok(m)) = (motion.step(&nudge(&a, j, FD_STEP), u), motion.step(&nudge(&a, j, -FD_STEP), u))
            else {
                failures += 1;
                continue;
            };
            let d = Vector3::new(p.x - m.x, p.y - m.y, wrap_angle(p.psi - m.psi)) / (2.0 * FD_STEP);
            fd.set_column(j, &d);
        }
        for r in 0..3 {
            let an: Vec<f64> = f.row(r).iter().copied().collect();
            let num: Vec<f64> = fd.row(r).iter().copied().collect();
            worst_motion = worst_motion.max(row_rel_error(&an, &num));
        }
    }
    let worst = if failures > 0 { f64::INFINITY } else { worst_sensor.max(worst_motion) };
    SuiteReport::new(
        "jacobian",
        n,
        worst,
        JACOBIAN_TOL,
        format!("sensor={worst_sensor:.2e} motion={worst_motion:.2e} failures={failures} step={FD_STEP:e}"),
    )
}

/// A random belief with `n_p` particles over `n_v` agents and a random
/// admissible action.
pub fn random_belief<M: MotionModel, R: Rng>(
    rng: &mut R,
    motion: &M,
    n_p: usize,
    n_v: usize,
) -> (HybridBelief, JointAction) {
    let particles: Vec<TargetPosition> = (0..n_p)
        .map(|_| TargetPosition::new(rng.random_range(0.0..40.0), rng.random_range(0.0..40.0)))
        .collect();
    let mut bank = Vec::with_capacity(n_p * n_v);
    for _ in 0..n_p {
        for i in 0..n_v {
            let mean = Vector3::new(
                5.0 + 10.0 * i as f64 + rng.random_range(-2.0..2.0),
                rng.random_range(0.0..40.0),
                rng.random_range(-3.0..3.0),
            );
            let l = Matrix3::from_fn(|r, c| if r >= c { rng.random_range(-0.3..0.3) } else { 0.0 });
            bank.push(GaussianBelief::new(mean, l * l.transpose() + Matrix3::identity() * 1e-3));
        }
    }
    let mut weights: Vec<f64> = (0..n_p).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);
    let hb = HybridBelief::from_parts(particles, weights, bank, n_v).expect("valid random belief");
    let action = JointAction {
        banks: (0..n_v).map(|_| rng.random_range(-1.0..1.0) * motion.max_bank()).collect(),
    };
    (hb, action)
}

/// Draws `n` samples of the measurement mixture and returns, for every
/// mean and covariance entry, `|sample - exact| / standard_error`.
pub fn mixture_z_scores<R: Rng>(
    rng: &mut R,
    weights: &[f64],
    moments: &[MeasurementMoments],
    n_v: usize,
    exact: &MixtureMoments,
    n: usize,
) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let mut z = vec![0.0; n_v];
    let mut sum = vec![0.0; n_v];
    let mut sum2 = vec![0.0; n_v];
    // products are taken about the exact mean so their expectation is the
    // exact covariance
    let n_pairs = n_v * (n_v + 1) / 2;
    let mut psum = vec![0.0; n_pairs];
    let mut psum2 = vec![0.0; n_pairs];
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|c| *c <= u).min(weights.len() - 1);
        for i in 0..n_v {
            let m = moments[k * n_v + i];
            let e: f64 = StandardNormal.sample(rng);
            z[i] = m.mean + m.var.sqrt() * e;
            sum[i] += z[i];
            sum2[i] += z[i] * z[i];
        }
        let mut p = 0;
        for i in 0..n_v {
            for j in 0..=i {
                let v = (z[i] - exact.mean[i]) * (z[j] - exact.mean[j]);
                psum[p] += v;
                psum2[p] += v * v;
                p += 1;
            }
        }
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n_v + n_pairs);
    for i in 0..n_v {
        let mean = sum[i] / nf;
        let var = (sum2[i] / nf - mean * mean) * nf / (nf - 1.0);
        out.push((mean - exact.mean[i]).abs() / (var / nf).sqrt());
    }
    let mut p = 0;
    for i in 0..n_v {
        for j in 0..=i {
            let mean = psum[p] / nf;
            let var = (psum2[p] / nf - mean * mean) * nf / (nf - 1.0);
            out.push((mean - exact.cov[(i, j)]).abs() / (var / nf).sqrt());
            p += 1;
        }
    }
    out
}

/// Moment-matched mixture against sample moments of `draws` mixture draws on
/// `instances` random beliefs.
pub fn moments_suite<S: SensorModel, M: MotionModel>(
    sensor: &S,
    motion: &M,
    instances: usize,
    draws: usize,
    seed: u64,
) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut entries = 0;
    for _ in 0..instances {
        let n_v = rng.random_range(1..=3);
        let n_p = rng.random_range(1..=10);
        let (hb, action) = random_belief(&mut rng, motion, n_p, n_v);
        let Ok(table) = candidate_moments(&hb, &action, motion, sensor) else {
            worst = f64::INFINITY;
            continue;
        };
        let exact = mixture_moments(hb.weights(), &table.moments, n_v);
        let z = mixture_z_scores(&mut rng, hb.weights(), &table.moments, n_v, &exact, draws);
        entries += z.len();
        worst = z.iter().fold(worst, |m, v| m.max(*v));
    }
    SuiteReport::new(
        "moments",
        instances,
        worst,
        SE_BOUND,
        format!("draws={draws} entries={entries} statistic=max |sample-exact|/SE"),
    )
}

/// Selection counts of the systematic comb averaged over a midpoint grid of
/// `combs` offsets must equal `n w` (unbiasedness), and every single comb must
/// pick each particle `floor(n w)` or `ceil(n w)` times.
///
/// A particle's count is a step function of the offset with at most two
/// jumps, so the grid average is within `2 / combs` of the exact expectation.
/// The statistic is the worst deviation in units of `1 / combs`.
pub fn resampler_suite(instances: usize, combs: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut spread_violations = 0;
    for _ in 0..instances {
        let n = rng.random_range(2..=12);
        let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3) + 1e-9).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let mut counts = vec![0.0f64; n];
        for j in 0..combs {
            let offset = (j as f64 + 0.5) / (combs * n) as f64;
            let mut c = vec![0usize; n];
            for k in systematic_indices(&w, offset) {
                c[k] += 1;
            }
            for (k, ck) in c.iter().enumerate() {
                let e = n as f64 * w[k];
                if (*ck as f64) < e.floor() - 1e-9 || (*ck as f64) > e.ceil() + 1e-9 {
                    spread_violations += 1;
                }
                counts[k] += *ck as f64;
            }
        }
        for k in 0..n {
            worst = worst.max((counts[k] / combs as f64 - n as f64 * w[k]).abs() * combs as f64);
        }
    }
    if spread_violations > 0 {
        worst = f64::INFINITY;
    }
    SuiteReport::new(
        "resampler",
        instances,
        worst,
        2.0,
        format!("combs={combs} spread_violations={spread_violations} statistic=max |mean count - n w| * combs"),
    )
}

/// Monte Carlo estimate of the mixture entropy `-E[ln p(z)]` and its
/// standard error.
pub fn mixture_entropy_mc<R: Rng>(
    rng: &mut R,
    weights: &[f64],
    moments: &[MeasurementMoments],
    n_v: usize,
    n: usize,
) -> (f64, f64) {
    let n_p = weights.len();
    let mut z = vec![0.0; n_v];
    let mut logs = vec![0.0; n_p];
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut k = 0;
        let mut acc = weights[0];
        while u >= acc && k + 1 < n_p {
            k += 1;
            acc += weights[k];
        }
        for (i, zi) in z.iter_mut().enumerate() {
            let m = moments[k * n_v + i];
            let e: f64 = StandardNormal.sample(rng);
            *zi = m.mean + m.var.sqrt() * e;
        }
        for (j, l) in logs.iter_mut().enumerate() {
            *l = weights[j].ln()
                + (0..n_v)
                    .map(|i| mi_seeker_core::belief::log_normal_pdf(z[i], moments[j * n_v + i].mean, moments[j * n_v + i].var))
                    .sum::<f64>();
        }
        let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lp = mx + logs.iter().map(|l| (l - mx).exp()).sum::<f64>().ln();
        s += -lp;
        s2 += lp * lp;
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean) * nf / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// `mi_objective` against twice the entropy difference built from the
/// Gaussian and conditional entropies, and the Gaussian entropy against a
/// sampled mixture entropy (which it must not undercut).
pub fn objective_suite<S: SensorModel, M: MotionModel>(
    sensor: &S,
    motion: &M,
    instances: usize,
    entropy_instances: usize,
    draws: usize,
    seed: u64,
) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_identity = 0.0f64;
    let mut worst_bound = f64::NEG_INFINITY;
    let mut bad = 0;
    for idx in 0..instances {
        let n_v = rng.random_range(1..=4);
        let n_p = rng.random_range(1..=12);
        let (hb, action) = random_belief(&mut rng, motion, n_p, n_v);
        let Ok(table) = candidate_moments(&hb, &action, motion, sensor) else {
            bad += 1;
            continue;
        };
        let w = hb.weights();
        let mm = mixture_moments(w, &table.moments, n_v);
        let (Ok(obj), Ok(hg)) = (mi_objective(w, &table.moments, n_v, &mm), gaussian_entropy(&mm)) else {
            bad += 1;
            continue;
        };
        let hc = conditional_entropy(w, &table.moments, n_v);
        worst_identity = worst_identity.max((obj - 2.0 * (hg - hc)).abs());
        if idx < entropy_instances {
            let (h_mc, se) = mixture_entropy_mc(&mut rng, w, &table.moments, n_v, draws);
            // in standard errors: how far the sampled entropy sits above the bound
            worst_bound = worst_bound.max((h_mc - hg) / se);
        }
    }
    let passed = bad == 0 && worst_identity <= IDENTITY_TOL && worst_bound <= SE_BOUND;
    SuiteReport {
        name: "objective",
        passed,
        samples: instances,
        worst: worst_identity,
        tolerance: IDENTITY_TOL,
        detail: format!(
            "identity |obj - 2(Hg - Hc)|; entropy bound worst (H_mc - Hg)/SE={worst_bound:.2} (tol {SE_BOUND}) over {entropy_instances} instances, failures={bad}"
        ),
    }
}

/// Runs the named suites (all when `only` is `None`). Unknown names are an
/// error.
pub fn run_checks<S: SensorModel, M: MotionModel>(
    sensor: &S,
    motion: &M,
    only: Option<&str>,
    seed: u64,
) -> anyhow::Result<Vec<SuiteReport>> {
    if let Some(name) = only {
        if !SUITES.contains(&name) {
            anyhow::bail!("unknown suite '{name}' (expected one of {})", SUITES.join(", "));
        }
    }
    let want = |n: &str| only.is_none_or(|o| o == n);
    let mut out = Vec::new();
    if want("jacobian") {
        out.push(jacobian_suite(sensor, motion, 2000, seed));
    }
    if want("moments") {
        out.push(moments_suite(sensor, motion, 20, 1_000_000, seed.wrapping_add(1)));
    }
    if want("resampler") {
        out.push(resampler_suite(50, 20_000, seed.wrapping_add(2)));
    }
    if want("objective") {
        out.push(objective_suite(sensor, motion, 200, 10, 50_000, seed.wrapping_add(3)));
    }
    Ok(out)
}
