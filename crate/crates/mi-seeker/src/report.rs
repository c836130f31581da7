//! Final-step error table, one row per noise level.

use std::path::Path;

use anyhow::{bail, Context};

use crate::output::SUMMARY_HEADER;

pub const ALGORITHMS: [&str; 2] = ["pf-only", "proposed"];
pub const METRICS: [&str; 2] = ["target", "agent"];
pub const STATS: [&str; 3] = ["q1", "mean", "q3"];

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub level: String,
    /// Ordered as algorithm, then metric, then statistic.
    pub values: [f64; 12],
}

pub fn table_header() -> Vec<String> {
    let mut h = vec!["level".to_string()];
    for a in ALGORITHMS {
        for m in METRICS {
            for s in STATS {
                h.push(format!("{a}_{m}_{s}_m"));
            }
        }
    }
    h
}

/// Builds the table from a sweep's `summary.csv`. Combinations missing from
/// the summary are NaN.
pub fn read_table(summary: &Path) -> anyhow::Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_path(summary).with_context(|| format!("{}: cannot open", summary.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != SUMMARY_HEADER {
        bail!("{}: unexpected header {:?}", summary.display(), header);
    }
    let mut rows: Vec<TableRow> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: line {}", summary.display(), line + 2))?;
        let level = rec[0].to_string();
        let (Some(a), Some(m)) = (
            ALGORITHMS.iter().position(|x| *x == &rec[1]),
            METRICS.iter().position(|x| *x == &rec[2]),
        ) else {
            bail!("{}: line {}: unknown algorithm or metric", summary.display(), line + 2);
        };
        let parse = |i: usize| -> anyhow::Result<f64> {
            rec[i].parse().with_context(|| format!("{}: line {}: bad number '{}'", summary.display(), line + 2, &rec[i]))
        };
        let stats = [parse(5)?, parse(6)?, parse(7)?];
        let idx = match rows.iter().position(|r| r.level == level) {
            Some(i) => i,
            None => {
                rows.push(TableRow {
                    level,
                    values: [f64::NAN; 12],
                });
                rows.len() - 1
            }
        };
        let base = a * 6 + m * 3;
        rows[idx].values[base..base + 3].copy_from_slice(&stats);
    }
    if rows.is_empty() {
        bail!("{}: no rows", summary.display());
    }
    Ok(rows)
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("{}: cannot create", path.display()))?;
    w.write_record(table_header())?;
    for r in rows {
        let mut rec = vec![r.level.clone()];
        rec.extend(r.values.iter().map(|v| format!("{v}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width text rendering.
pub fn render(rows: &[TableRow]) -> String {
    let mut s = format!("{:>6} |", "");
    for a in ALGORITHMS {
        for m in METRICS {
            s.push_str(&format!(" {:^26} |", format!("{a} {m}")));
        }
    }
    s.push('\n');
    s.push_str(&format!("{:>6} |", "level"));
    for _ in 0..4 {
        s.push_str(&format!(" {:>8} {:>8} {:>8} |", "Q1", "mean", "Q3"));
    }
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{:>6} |", r.level));
        for c in r.values.chunks(3) {
            s.push_str(&format!(" {:>8.4} {:>8.4} {:>8.4} |", c[0], c[1], c[2]));
        }
        s.push('\n');
    }
    s
}
