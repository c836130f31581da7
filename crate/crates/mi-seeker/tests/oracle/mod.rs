//! Straight-line reference implementations used as test oracles. Written
//! from the model equations without calling into the library's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const ALPHA: f64 = 1000.0;
pub const BETA: f64 = 100.0;
pub const GAMMA: f64 = 3.375;
pub const R: f64 = 2.0;
pub const V: f64 = 1.0;
pub const DT: f64 = 1.0;
pub const G: f64 = 9.81;

pub fn u_max() -> f64 {
    (V * V / (G * 3.0)).atan()
}

pub fn wrap(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

pub type S3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];

pub fn h(s: S3, t: [f64; 2]) -> f64 {
    let dx = t[0] - s[0];
    let dy = t[1] - s[1];
    let phi = wrap(dy.atan2(dx) - s[2]);
    ALPHA * GAMMA.powf(-phi * phi) / (dx * dx + dy * dy + BETA)
}

pub fn h_grad(s: S3, t: [f64; 2]) -> S3 {
    let dx = t[0] - s[0];
    let dy = t[1] - s[1];
    let r2 = dx * dx + dy * dy;
    let phi = wrap(dy.atan2(dx) - s[2]);
    let hv = h(s, t);
    let lg = GAMMA.ln();
    // d phi / d(x, y, psi) = (dy / r2, -dx / r2, -1)
    let dphi = [dy / r2, -dx / r2, -1.0];
    let drange = [2.0 * dx / (r2 + BETA), 2.0 * dy / (r2 + BETA), 0.0];
    [0, 1, 2].map(|j| hv * (-2.0 * lg * phi * dphi[j] + drange[j]))
}

pub fn f(s: S3, u: f64) -> S3 {
    [
        s[0] + V * s[2].cos() * DT,
        s[1] + V * s[2].sin() * DT,
        wrap(s[2] + G / V * u.tan() * DT),
    ]
}

pub fn f_jac(s: S3) -> M3 {
    [
        [1.0, 0.0, -V * s[2].sin() * DT],
        [0.0, 1.0, V * s[2].cos() * DT],
        [0.0, 0.0, 1.0],
    ]
}

pub fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &M3) -> M3 {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| a[j][i]))
}

/// EKF prediction: returns the prior mean and covariance.
pub fn predict(mean: S3, cov: &M3, u: f64, q: &M3) -> (S3, M3) {
    let fj = f_jac(mean);
    let mut c = mat_mul(&mat_mul(&fj, cov), &transpose(&fj));
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += q[i][j];
        }
    }
    (f(mean, u), c)
}

/// Predicted measurement mean and variance.
pub fn meas_moments(mean: S3, cov: &M3, t: [f64; 2]) -> (f64, f64) {
    let g = h_grad(mean, t);
    let mut v = R;
    for i in 0..3 {
        for j in 0..3 {
            v += g[i] * cov[i][j] * g[j];
        }
    }
    (h(mean, t), v)
}

/// Mixture mean and covariance from `E[z z^T] - mean mean^T`.
pub fn mixture(w: &[f64], mu: &[Vec<f64>], var: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n_v = mu[0].len();
    let mut m = vec![0.0; n_v];
    let mut second = vec![vec![0.0; n_v]; n_v];
    for k in 0..w.len() {
        for i in 0..n_v {
            m[i] += w[k] * mu[k][i];
            for j in 0..n_v {
                second[i][j] += w[k] * (mu[k][i] * mu[k][j] + if i == j { var[k][i] } else { 0.0 });
            }
        }
    }
    let cov = (0..n_v)
        .map(|i| (0..n_v).map(|j| second[i][j] - m[i] * m[j]).collect())
        .collect();
    (m, cov)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let factor = m[r][c] / m[c][c];
            let pivot = m[c].clone();
            for (x, y) in m[r][c..].iter_mut().zip(&pivot[c..]) {
                *x -= factor * y;
            }
        }
    }
    d
}

/// Entropy of a Gaussian with covariance `cov`.
pub fn gauss_entropy(cov: &[Vec<f64>]) -> f64 {
    let n = cov.len() as f64;
    0.5 * (n * (1.0 + (2.0 * PI).ln()) + det(cov).ln())
}

/// `sum_k w_k sum_i H(N(., var_ki))`.
pub fn cond_entropy(w: &[f64], var: &[Vec<f64>]) -> f64 {
    w.iter()
        .zip(var)
        .map(|(wk, vk)| wk * vk.iter().map(|v| 0.5 * (1.0 + (2.0 * PI * v).ln())).sum::<f64>())
        .sum()
}

/// Draws one mixture sample.
pub fn draw<Rn: Rng>(rng: &mut Rn, w: &[f64], mu: &[Vec<f64>], var: &[Vec<f64>], out: &mut [f64]) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut k = w.len() - 1;
    for (j, wj) in w.iter().enumerate() {
        acc += wj;
        if u < acc {
            k = j;
            break;
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        let e: f64 = StandardNormal.sample(rng);
        *o = mu[k][i] + var[k][i].sqrt() * e;
    }
}

/// Mixture density at `z`.
pub fn mixture_pdf(z: &[f64], w: &[f64], mu: &[Vec<f64>], var: &[Vec<f64>]) -> f64 {
    w.iter()
        .enumerate()
        .map(|(k, wk)| {
            wk * z
                .iter()
                .enumerate()
                .map(|(i, zi)| {
                    let d = zi - mu[k][i];
                    (-0.5 * d * d / var[k][i]).exp() / (2.0 * PI * var[k][i]).sqrt()
                })
                .product::<f64>()
        })
        .sum()
}

pub fn random_weights<Rn: Rng>(rng: &mut Rn, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// Random SPD 3x3 matrix.
pub fn random_cov<Rn: Rng>(rng: &mut Rn, scale: f64) -> M3 {
    let mut l = [[0.0; 3]; 3];
    for (i, row) in l.iter_mut().enumerate() {
        for v in row.iter_mut().take(i + 1) {
            *v = rng.random_range(-scale..scale);
        }
    }
    let mut c = mat_mul(&l, &transpose(&l));
    for (i, row) in c.iter_mut().enumerate() {
        row[i] += 1e-4;
    }
    c
}
