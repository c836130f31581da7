//! Output files.
//!
//! CSV files always have a header row, use `.` as the decimal separator and
//! print floats in shortest round-trip form, so rerunning a command yields
//! the same bytes.
//!
//! | file             | columns |
//! |------------------|---------|
//! | `steps.csv`      | `time_step, target_error_m, agent_error_m, n_eff, resampled, objective, target_est_x_m, target_est_y_m`, then per agent `i`: `bank_i_rad, true_x_i_m, true_y_i_m, true_psi_i_rad, est_x_i_m, est_y_i_m, est_psi_i_rad, z_i` |
//! | `summary.csv`    | `level, algorithm, metric, n_valid, n_halted, q1_m, mean_m, q3_m` |
//! | `timeseries.csv` | `level, algorithm, metric, time_step, n_valid, q1_m, mean_m, q3_m` |
//! | `table1.csv`     | `level`, then `{pf-only,proposed}_{target,agent}_{q1,mean,q3}_m` |

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use mi_seeker_core::sim::{EpisodeConfig, EpisodeOutcome};
use nalgebra::Matrix3;
use serde::Serialize;

use crate::config::Config;
use crate::montecarlo::{SummaryRow, SweepConfig, TimeSeriesRow, TrialRecord};

pub const MANIFEST: &str = "manifest.json";
pub const STEPS: &str = "steps.csv";
pub const SUMMARY: &str = "summary.csv";
pub const TIMESERIES: &str = "timeseries.csv";
pub const SWEEP: &str = "sweep.json";
pub const TABLE1: &str = "table1.csv";

pub const SUMMARY_HEADER: [&str; 8] = ["level", "algorithm", "metric", "n_valid", "n_halted", "q1_m", "mean_m", "q3_m"];
pub const TIMESERIES_HEADER: [&str; 8] =
    ["level", "algorithm", "metric", "time_step", "n_valid", "q1_m", "mean_m", "q3_m"];

fn num(v: f64) -> String {
    format!("{v}")
}

fn writer(path: &Path) -> anyhow::Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("{}: cannot create", path.display()))
}

pub fn steps_header(n_agents: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "time_step",
        "target_error_m",
        "agent_error_m",
        "n_eff",
        "resampled",
        "objective",
        "target_est_x_m",
        "target_est_y_m",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 0..n_agents {
        for col in ["bank_{}_rad", "true_x_{}_m", "true_y_{}_m", "true_psi_{}_rad", "est_x_{}_m", "est_y_{}_m", "est_psi_{}_rad", "z_{}"] {
            h.push(col.replace("{}", &i.to_string()));
        }
    }
    h
}

pub fn write_steps(path: &Path, n_agents: usize, outcome: &EpisodeOutcome) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(steps_header(n_agents))?;
    for r in &outcome.records {
        let mut row = vec![
            r.time_step.to_string(),
            num(r.target_error),
            num(r.agent_error),
            num(r.n_eff),
            r.resampled.to_string(),
            num(r.objective),
            num(r.target_estimate.tx),
            num(r.target_estimate.ty),
        ];
        for i in 0..n_agents {
            let (a, e) = (&r.true_agents[i], &r.agent_estimates[i]);
            for v in [r.action[i], a.x, a.y, a.psi, e.x, e.y, e.psi, r.measurements[i]] {
                row.push(num(v));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.level),
            r.algorithm.clone(),
            r.metric.to_string(),
            r.n_valid.to_string(),
            r.n_halted.to_string(),
            num(r.q1),
            num(r.mean),
            num(r.q3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timeseries(path: &Path, rows: &[TimeSeriesRow]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(TIMESERIES_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.level),
            r.algorithm.clone(),
            r.metric.to_string(),
            r.time_step.to_string(),
            r.n_valid.to_string(),
            num(r.q1),
            num(r.mean),
            num(r.q3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn matrix_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|r| [0, 1, 2].map(|c| m[(r, c)]))
}

/// The episode exactly as resolved, for manifests and sweep records.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedEpisode {
    pub algorithm: String,
    pub seed: u64,
    pub trial: u64,
    pub horizon_steps: usize,
    pub n_particles: usize,
    pub region_m: [f64; 4],
    pub initial_agents: Vec<[f64; 3]>,
    pub target_m: Option<[f64; 2]>,
    pub true_noise_cov: [[f64; 3]; 3],
    pub assumed_noise_cov: [[f64; 3]; 3],
    pub u_max_rad: f64,
    pub bank_levels_rad: Vec<f64>,
    pub search: String,
    pub on_collapse: String,
}

impl From<&EpisodeConfig> for ResolvedEpisode {
    fn from(c: &EpisodeConfig) -> Self {
        Self {
            algorithm: c.algorithm.name().into(),
            seed: c.seed,
            trial: c.trial,
            horizon_steps: c.horizon,
            n_particles: c.n_particles,
            region_m: [c.region.x_min, c.region.x_max, c.region.y_min, c.region.y_max],
            initial_agents: c.initial_agents.iter().map(|a| [a.x, a.y, a.psi]).collect(),
            target_m: c.target.map(|t| [t.tx, t.ty]),
            true_noise_cov: matrix_rows(&c.true_noise_cov),
            assumed_noise_cov: matrix_rows(c.assumed_noise_cov()),
            u_max_rad: c.motion.u_max,
            bank_levels_rad: c.grid.values().to_vec(),
            search: format!("{:?}", c.grid.mode()),
            on_collapse: format!("{:?}", c.on_collapse),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub tool_version: &'static str,
    pub seed: u64,
    pub config: Config,
    pub resolved: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_s: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path).with_context(|| format!("{}: cannot create", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct TrialJson {
    level: f64,
    trial: usize,
    algorithm: &'static str,
    status: &'static str,
    halt_step: Option<usize>,
    halt_reason: Option<String>,
    final_target_error_m: Option<f64>,
    final_agent_error_m: Option<f64>,
    true_target_m: [f64; 2],
    noise_checksum: String,
    psd_repairs: u64,
}

#[derive(Debug, Clone, Serialize)]
struct SweepJson {
    levels: Vec<f64>,
    trials: usize,
    algorithms: Vec<&'static str>,
    base_noise_cov: [[f64; 3]; 3],
    template: ResolvedEpisode,
    valid_fraction: f64,
    pairing_violations: Vec<(f64, usize)>,
    records: Vec<TrialJson>,
}

pub fn write_sweep_json(
    path: &Path,
    sc: &SweepConfig,
    records: &[TrialRecord],
    valid_fraction: f64,
    violations: Vec<(f64, usize)>,
) -> anyhow::Result<()> {
    let doc = SweepJson {
        levels: sc.levels.clone(),
        trials: sc.trials,
        algorithms: sc.algorithms.iter().map(|a| a.name()).collect(),
        base_noise_cov: matrix_rows(&sc.base_cov),
        template: ResolvedEpisode::from(&sc.template),
        valid_fraction,
        pairing_violations: violations,
        records: records
            .iter()
            .map(|r| TrialJson {
                level: r.level,
                trial: r.trial,
                algorithm: r.algorithm.name(),
                status: if r.is_valid() { "ok" } else { "halted" },
                halt_step: r.halt.as_ref().map(|h| h.0),
                halt_reason: r.halt.as_ref().map(|h| h.1.clone()),
                final_target_error_m: r.final_errors.map(|e| e.target),
                final_agent_error_m: r.final_errors.map(|e| e.agent),
                true_target_m: [r.true_target.tx, r.true_target.ty],
                noise_checksum: format!("{:016x}", r.noise_checksum),
                psd_repairs: r.psd_repairs,
            })
            .collect(),
    };
    write_json(path, &doc)
}
