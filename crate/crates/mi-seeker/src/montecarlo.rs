//! Noise-level sweeps over paired trials and their aggregation.
//!
//! For every `(level, trial)` each algorithm runs on the same noise streams,
//! so the two episodes see the same target and the same injected noise. The
//! worker pool only decides *when* a tuple runs; results are gathered in
//! tuple order, so the output does not depend on the number of workers.

use std::fmt;

use anyhow::{bail, Context};
use mi_seeker_core::models::TargetPosition;
use mi_seeker_core::sim::{run_episode, Algorithm, EpisodeConfig, EpisodeOutcome};
use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Reference process-noise covariance `P0`.
    pub base_cov: Matrix3<f64>,
    /// Multipliers of `P0`.
    pub levels: Vec<f64>,
    pub trials: usize,
    /// Everything except noise, algorithm and trial index.
    pub template: EpisodeConfig,
    pub algorithms: Vec<Algorithm>,
}

impl SweepConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("sweep needs at least one trial");
        }
        if self.levels.is_empty() || self.algorithms.is_empty() {
            bail!("sweep needs at least one level and one algorithm");
        }
        if let Some(l) = self.levels.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            bail!("noise multiplier {l} must be finite and nonnegative");
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                bail!("algorithm {} listed twice", a.name());
            }
        }
        Ok(())
    }

    /// Episode for one tuple.
    pub fn episode(&self, level: f64, trial: usize, algorithm: Algorithm) -> EpisodeConfig {
        let mut cfg = self.template.clone().with_noise(self.base_cov * level, algorithm);
        cfg.trial = trial as u64;
        cfg
    }

    pub fn n_episodes(&self) -> usize {
        self.levels.len() * self.trials * self.algorithms.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Target,
    Agent,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Target, Metric::Agent];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Target => "target",
            Metric::Agent => "agent",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Final-step errors of one episode, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalErrors {
    pub target: f64,
    pub agent: f64,
}

impl FinalErrors {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Target => self.target,
            Metric::Agent => self.agent,
        }
    }
}

/// Final errors of a complete episode; `None` if it halted or stopped short
/// of `horizon`.
pub fn error_metrics(outcome: &EpisodeOutcome, horizon: usize) -> Option<FinalErrors> {
    if outcome.halt.is_some() || outcome.records.len() != horizon {
        return None;
    }
    outcome.records.last().map(|r| FinalErrors {
        target: r.target_error,
        agent: r.agent_error,
    })
}

/// One executed `(level, trial, algorithm)` tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub level: f64,
    pub trial: usize,
    pub algorithm: Algorithm,
    pub final_errors: Option<FinalErrors>,
    /// `(time_step, message)` when the episode halted.
    pub halt: Option<(usize, String)>,
    pub target_series: Vec<f64>,
    pub agent_series: Vec<f64>,
    pub true_target: TargetPosition,
    pub noise_checksum: u64,
    pub psd_repairs: u64,
}

impl TrialRecord {
    pub fn from_outcome(level: f64, trial: usize, algorithm: Algorithm, horizon: usize, o: &EpisodeOutcome) -> Self {
        Self {
            level,
            trial,
            algorithm,
            final_errors: error_metrics(o, horizon),
            halt: o.halt.as_ref().map(|h| (h.time_step, h.error.to_string())),
            target_series: o.records.iter().map(|r| r.target_error).collect(),
            agent_series: o.records.iter().map(|r| r.agent_error).collect(),
            true_target: o.true_target,
            noise_checksum: o.noise_checksum,
            psd_repairs: o.psd_repairs,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.final_errors.is_some()
    }

    pub fn series(&self, m: Metric) -> &[f64] {
        match m {
            Metric::Target => &self.target_series,
            Metric::Agent => &self.agent_series,
        }
    }
}

/// Runs every tuple of `sc` on a pool of `workers` threads. Records come back
/// ordered by level, then trial, then algorithm.
pub fn run_sweep(sc: &SweepConfig, workers: usize) -> anyhow::Result<Vec<TrialRecord>> {
    sc.validate()?;
    let tuples: Vec<(f64, usize, Algorithm)> = sc
        .levels
        .iter()
        .flat_map(|&l| (0..sc.trials).flat_map(move |t| sc.algorithms.iter().map(move |&a| (l, t, a))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("worker pool")?;
    let horizon = sc.template.horizon;
    pool.install(|| {
        tuples
            .par_iter()
            .map(|&(level, trial, alg)| {
                let cfg = sc.episode(level, trial, alg);
                let o = run_episode(&cfg)
                    .with_context(|| format!("level {level}, trial {trial}, {}", alg.name()))?;
                Ok(TrialRecord::from_outcome(level, trial, alg, horizon, &o))
            })
            .collect()
    })
}

/// Value at probability `p` by linear interpolation between the closest
/// ranks of `sorted` (position `(n - 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub level: f64,
    pub algorithm: String,
    pub metric: Metric,
    pub n_valid: usize,
    pub n_halted: usize,
    pub q1: f64,
    pub mean: f64,
    pub q3: f64,
}

/// Mean and interpolated quartiles of `errors`.
pub fn quartile_summary(
    errors: &[f64],
    level: f64,
    algorithm: Algorithm,
    metric: Metric,
    n_halted: usize,
) -> anyhow::Result<SummaryRow> {
    if errors.is_empty() {
        bail!("no valid trials for level {level}, {}, {metric}", algorithm.name());
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(SummaryRow {
        level,
        algorithm: algorithm.name().into(),
        metric,
        n_valid: errors.len(),
        n_halted,
        q1: quantile(&sorted, 0.25),
        mean: errors.iter().sum::<f64>() / errors.len() as f64,
        q3: quantile(&sorted, 0.75),
    })
}

fn group(records: &[TrialRecord], level: f64, alg: Algorithm) -> impl Iterator<Item = &TrialRecord> {
    records
        .iter()
        .filter(move |r| r.level.to_bits() == level.to_bits() && r.algorithm == alg)
}

/// One row per `(level, algorithm, metric)`, in sweep order. A group with no
/// valid trial gets NaN statistics rather than disappearing.
pub fn summarize(sc: &SweepConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &level in &sc.levels {
        for &alg in &sc.algorithms {
            for m in Metric::ALL {
                let errors: Vec<f64> = group(records, level, alg)
                    .filter_map(|r| r.final_errors.map(|e| e.get(m)))
                    .collect();
                let halted = group(records, level, alg).filter(|r| !r.is_valid()).count();
                rows.push(quartile_summary(&errors, level, alg, m, halted).unwrap_or(SummaryRow {
                    level,
                    algorithm: alg.name().into(),
                    metric: m,
                    n_valid: 0,
                    n_halted: halted,
                    q1: f64::NAN,
                    mean: f64::NAN,
                    q3: f64::NAN,
                }));
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesRow {
    pub level: f64,
    pub algorithm: String,
    pub metric: Metric,
    pub time_step: usize,
    pub n_valid: usize,
    pub q1: f64,
    pub mean: f64,
    pub q3: f64,
}

/// Per-step mean and quartiles over the valid trials of each
/// `(level, algorithm, metric)`; steps run from 1 to the horizon.
pub fn timeseries_summary(sc: &SweepConfig, records: &[TrialRecord]) -> Vec<TimeSeriesRow> {
    let horizon = sc.template.horizon;
    let mut rows = Vec::with_capacity(sc.levels.len() * sc.algorithms.len() * 2 * horizon);
    for &level in &sc.levels {
        for &alg in &sc.algorithms {
            let valid: Vec<&TrialRecord> = group(records, level, alg).filter(|r| r.is_valid()).collect();
            for m in Metric::ALL {
                for t in 0..horizon {
                    let mut v: Vec<f64> = valid.iter().map(|r| r.series(m)[t]).collect();
                    let (q1, mean, q3) = if v.is_empty() {
                        (f64::NAN, f64::NAN, f64::NAN)
                    } else {
                        let mean = v.iter().sum::<f64>() / v.len() as f64;
                        v.sort_by(f64::total_cmp);
                        (quantile(&v, 0.25), mean, quantile(&v, 0.75))
                    };
                    rows.push(TimeSeriesRow {
                        level,
                        algorithm: alg.name().into(),
                        metric: m,
                        time_step: t + 1,
                        n_valid: v.len(),
                        q1,
                        mean,
                        q3,
                    });
                }
            }
        }
    }
    rows
}

/// Fraction of executed tuples that completed.
pub fn valid_fraction(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.is_valid()).count() as f64 / records.len() as f64
}

/// `(level, trial)` pairs whose algorithms did not see the same target and
/// noise. Halted episodes consume fewer draws and are skipped.
pub fn pairing_violations(records: &[TrialRecord]) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    for (i, r) in records.iter().enumerate() {
        for s in &records[i + 1..] {
            if s.level.to_bits() == r.level.to_bits()
                && s.trial == r.trial
                && (s.true_target != r.true_target
                    || (r.is_valid() && s.is_valid() && s.noise_checksum != r.noise_checksum))
            {
                out.push((r.level, r.trial));
            }
        }
    }
    out
}
