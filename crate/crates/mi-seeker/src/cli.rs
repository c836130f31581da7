//! Command-line interface.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mi_seeker_core::models::{MotionModel, SensorModel};
use mi_seeker_core::sim::run_episode;

use crate::check::run_checks;
use crate::config::{parse_algorithm, Config, Overrides};
use crate::montecarlo::{pairing_violations, run_sweep, summarize, timeseries_summary, valid_fraction, SweepConfig};
use crate::output::{self, ResolvedEpisode, RunManifest};
use crate::report;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    Divergence = 2,
    PartialSweep = 3,
    CheckFailed = 4,
}

/// Sweeps below this fraction of completed episodes exit with
/// [`Exit::PartialSweep`].
pub const MIN_VALID_FRACTION: f64 = 0.9;

#[derive(Debug, Parser)]
#[command(name = "mi-seeker", version, about = "Mutual-information planning for a mobile sensor network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: $MI_SEEKER_OUT/<command>, else ./mi-seeker-out/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// proposed | pf-only
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Multiplier of the reference process-noise covariance.
    #[arg(long = "noise-mult")]
    pub noise_mult: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single episode and write its per-step record.
    Run(Common),
    /// Run a noise-level sweep of paired trials.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads [default: available cores].
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Tabulate final errors of a finished sweep.
    Report {
        /// Sweep output directory [default: $MI_SEEKER_OUT/sweep].
        dir: Option<PathBuf>,
        /// Where to write table1.csv [default: the sweep directory].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical self-check suites.
    Check {
        /// jacobian | moments | resampler | objective
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 20_231_117)]
        seed: u64,
    },
}

fn default_dir(command: &str) -> PathBuf {
    match std::env::var_os("MI_SEEKER_OUT") {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(command),
        _ => PathBuf::from("mi-seeker-out").join(command),
    }
}

fn config_error(e: anyhow::Error) -> Exit {
    eprintln!("error: {e:#}");
    Exit::Config
}

fn load(common: &Common, trials: Option<usize>) -> anyhow::Result<Config> {
    let mut cfg = Config::load(common.config.as_deref())?;
    cfg.apply(&Overrides {
        seed: common.seed,
        algorithm: common.algorithm.clone(),
        noise_multiplier: common.noise_mult,
        trials,
    });
    Ok(cfg)
}

fn prepare_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| anyhow::anyhow!("{}: {e}", dir.display()))
}

pub fn cmd_run(common: &Common, argv: &[String]) -> Exit {
    let started = Instant::now();
    let cfg = match load(common, None) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let ep = match cfg.run_episode_config() {
        Ok(e) => e,
        Err(e) => return config_error(e),
    };
    let dir = common.out.clone().unwrap_or_else(|| default_dir("run"));
    let outcome = match run_episode(&ep) {
        Ok(o) => o,
        Err(e) => return config_error(e.into()),
    };
    let steps = dir.join(output::STEPS);
    let manifest = RunManifest {
        command: argv.to_vec(),
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        resolved: serde_json::to_value(ResolvedEpisode::from(&ep)).expect("serializable"),
        config: cfg,
        outputs: vec![steps.clone()],
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    let written = prepare_dir(&dir)
        .and_then(|_| output::write_steps(&steps, ep.n_agents(), &outcome))
        .and_then(|_| output::write_json(&dir.join(output::MANIFEST), &manifest));
    if let Err(e) = written {
        return config_error(e);
    }
    match (&outcome.halt, outcome.records.last()) {
        (Some(h), _) => {
            eprintln!("episode halted at step {}: {}", h.time_step, h.error);
            Exit::Divergence
        }
        (None, Some(last)) => {
            println!(
                "steps={} final target error {:.4} m, agent error {:.4} m -> {}",
                outcome.records.len(),
                last.target_error,
                last.agent_error,
                steps.display()
            );
            Exit::Ok
        }
        (None, None) => {
            println!("steps=0 -> {}", steps.display());
            Exit::Ok
        }
    }
}

/// Sweep definition from a configuration; `--algorithm` narrows the
/// algorithm set and `--noise-mult` replaces the level list.
pub fn sweep_config(cfg: &Config, common: &Common) -> anyhow::Result<SweepConfig> {
    let algorithms = match &common.algorithm {
        Some(a) => vec![parse_algorithm(a)?],
        None => cfg.sweep.algorithms.iter().map(|a| parse_algorithm(a)).collect::<anyhow::Result<_>>()?,
    };
    let levels = match common.noise_mult {
        Some(m) => vec![m],
        None => cfg.sweep.levels.clone(),
    };
    let sc = SweepConfig {
        base_cov: cfg.base_noise.covariance(),
        levels,
        trials: cfg.sweep.trials,
        template: cfg.episode(algorithms[0], 0.0, 0)?,
        algorithms,
    };
    sc.validate()?;
    Ok(sc)
}

pub fn cmd_sweep(common: &Common, trials: Option<usize>, workers: Option<usize>, argv: &[String]) -> Exit {
    let started = Instant::now();
    let cfg = match load(common, trials) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let sc = match sweep_config(&cfg, common) {
        Ok(s) => s,
        Err(e) => return config_error(e),
    };
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return config_error(anyhow::anyhow!("--workers must be at least 1"));
    }
    let dir = common.out.clone().unwrap_or_else(|| default_dir("sweep"));
    let records = match run_sweep(&sc, workers) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let frac = valid_fraction(&records);
    let violations = pairing_violations(&records);
    if !violations.is_empty() {
        eprintln!("warning: pairing audit failed for {} (level, trial) pairs", violations.len());
    }
    let paths = [output::SUMMARY, output::TIMESERIES, output::SWEEP].map(|f| dir.join(f));
    let resolved = serde_json::json!({
        "levels": sc.levels,
        "trials": sc.trials,
        "algorithms": sc.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>(),
        "workers": workers,
        "template": ResolvedEpisode::from(&sc.template),
    });
    let manifest = RunManifest {
        command: argv.to_vec(),
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
        resolved,
        outputs: paths.to_vec(),
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    let written = prepare_dir(&dir)
        .and_then(|_| output::write_summary(&paths[0], &summarize(&sc, &records)))
        .and_then(|_| output::write_timeseries(&paths[1], &timeseries_summary(&sc, &records)))
        .and_then(|_| output::write_sweep_json(&paths[2], &sc, &records, frac, violations))
        .and_then(|_| output::write_json(&dir.join(output::MANIFEST), &manifest));
    if let Err(e) = written {
        return config_error(e);
    }
    let halted = records.iter().filter(|r| !r.is_valid()).count();
    println!(
        "episodes={} halted={} valid={:.1}% -> {}",
        records.len(),
        halted,
        100.0 * frac,
        dir.display()
    );
    if frac < MIN_VALID_FRACTION {
        eprintln!("only {:.1}% of episodes completed", 100.0 * frac);
        Exit::PartialSweep
    } else {
        Exit::Ok
    }
}

pub fn cmd_report(dir: Option<&Path>, out: Option<&Path>) -> Exit {
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| default_dir("sweep"));
    let rows = match report::read_table(&dir.join(output::SUMMARY)) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| dir.clone());
    let path = out.join(output::TABLE1);
    if let Err(e) = prepare_dir(&out).and_then(|_| report::write_table(&path, &rows)) {
        return config_error(e);
    }
    print!("{}", report::render(&rows));
    println!("-> {}", path.display());
    Exit::Ok
}

/// `check` against arbitrary models; the shipped binary passes the defaults.
pub fn cmd_check_with<S: SensorModel, M: MotionModel>(sensor: &S, motion: &M, suite: Option<&str>, seed: u64) -> Exit {
    let reports = match run_checks(sensor, motion, suite, seed) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Exit::Ok
    } else {
        eprintln!("failed suites: {}", failed.join(", "));
        Exit::CheckFailed
    }
}

pub fn execute(cli: Cli, argv: &[String]) -> Exit {
    match cli.command {
        Command::Run(common) => cmd_run(&common, argv),
        Command::Sweep { common, trials, workers } => cmd_sweep(&common, trials, workers, argv),
        Command::Report { dir, out } => cmd_report(dir.as_deref(), out.as_deref()),
        Command::Check { suite, seed } => {
            let cfg = Config::default();
            let sensor = mi_seeker_core::models::SensorParams::default();
            match cfg.motion_params() {
                Ok(m) => cmd_check_with(&sensor, &m, suite.as_deref(), seed),
                Err(e) => config_error(e),
            }
        }
    }
}
