//! Experiment driver: parameter grids over the learning and testing
//! experiments, JSON-lines result records and CSV curves.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use junta_core::rng::derive_seed;

pub mod experiments;

pub use experiments::{run_command, Metrics, Params, COMMANDS};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "JUNTA_THREADS";

/// A command run over the cartesian product of parameter lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: String,
    /// Parameter name to the values it takes; cells enumerate the product
    /// with the last key (in sorted order) varying fastest.
    pub grid: BTreeMap<String, Vec<Value>>,
    #[serde(default = "one")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Adds `elapsed_ms` to every record, which makes records
    /// run-dependent.
    #[serde(default)]
    pub timing: bool,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            COMMANDS.contains(&self.command.as_str()),
            "unknown command {:?}; expected one of {}",
            self.command,
            COMMANDS.join(", ")
        );
        ensure!(!self.grid.is_empty(), "grid must name at least one parameter");
        if let Some((k, _)) = self.grid.iter().find(|(_, v)| v.is_empty()) {
            bail!("grid parameter {k} has no values");
        }
        ensure!(self.trials >= 1, "trials must be at least 1");
        Ok(())
    }

    /// Parameter maps of all cells, in canonical order.
    pub fn cells(&self) -> Vec<Params> {
        let mut cells = vec![Params::new()];
        for (key, values) in &self.grid {
            cells = cells
                .into_iter()
                .flat_map(|cell| {
                    values.iter().map(move |v| {
                        let mut c = cell.clone();
                        c.insert(key.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

/// Outcome of one (cell, trial).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub cell: usize,
    pub trial: usize,
    pub params: Params,
    pub seed: u64,
    pub metrics: Metrics,
    /// `"ok"` or `"error"`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub version: String,
}

impl ResultRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Seed of a (cell, trial) pair under a master seed.
pub fn record_seed(master: u64, cell: usize, trial: usize) -> u64 {
    derive_seed(master, &[cell as u64, trial as u64])
}

/// Runs one experiment and wraps it as a record; failures become error
/// records.
pub fn run_single(command: &str, params: &Params, seed: u64, cell: usize, trial: usize, timing: bool) -> ResultRecord {
    let start = Instant::now();
    let outcome = run_command(command, params, seed);
    let (mut metrics, status, error) = match outcome {
        Ok(m) => (m, "ok", None),
        Err(e) => (Metrics::new(), "error", Some(format!("{e:#}"))),
    };
    if timing {
        metrics.insert("elapsed_ms".into(), Value::from(start.elapsed().as_secs_f64() * 1e3));
    }
    ResultRecord {
        command: command.to_string(),
        cell,
        trial,
        params: params.clone(),
        seed,
        metrics,
        status: status.into(),
        error,
        version: VERSION.into(),
    }
}

/// Every (cell, trial) of the grid, run in parallel and returned ordered by
/// (cell, trial).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(c, t)| {
            run_single(
                &spec.command,
                &cells[c],
                record_seed(spec.seed, c, t),
                c,
                t,
                spec.timing,
            )
        })
        .collect())
}

/// One JSON object per line.
pub fn write_records<W: Write>(records: &[ResultRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("record line {}", i + 1)))
        .collect()
}

/// How trials sharing an x value are combined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Aggregator {
    Mean,
    /// Linear-interpolation quantile, `q ∈ [0, 1]`.
    Quantile(f64),
}

impl std::str::FromStr for Aggregator {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mean" {
            return Ok(Self::Mean);
        }
        let q: f64 = s
            .strip_prefix('q')
            .and_then(|rest| rest.parse().ok())
            .with_context(|| format!("aggregator must be mean or q<fraction>, got {s:?}"))?;
        ensure!((0.0..=1.0).contains(&q), "quantile {q} outside [0, 1]");
        Ok(Self::Quantile(q))
    }
}

fn aggregate(values: &mut [f64], agg: Aggregator) -> f64 {
    match agg {
        Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Aggregator::Quantile(q) => {
            values.sort_by(f64::total_cmp);
            let pos = q * (values.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
        }
    }
}

fn metric_value(v: &Value) -> Option<f64> {
    match v {
        Value::Bool(b) => Some(f64::from(u8::from(*b))),
        other => other.as_f64(),
    }
}

/// CSV with header `x,y,trials`: one row per distinct value of parameter
/// `x` (ascending) with the aggregated metric `y` over successful records.
/// Booleans count as 0/1.
pub fn emit_curve(records: &[ResultRecord], x: &str, y: &str, agg: Aggregator) -> Result<String> {
    let ok: Vec<&ResultRecord> = records.iter().filter(|r| r.is_ok()).collect();
    ensure!(!ok.is_empty(), "no successful records to aggregate");
    let command = &ok[0].command;
    ensure!(ok.iter().all(|r| &r.command == command), "records mix several commands");
    let mut groups: Vec<(Value, Vec<f64>)> = Vec::new();
    for r in &ok {
        let xv = r
            .params
            .get(x)
            .with_context(|| format!("record (cell {}, trial {}) has no parameter {x}", r.cell, r.trial))?;
        let yv = r
            .metrics
            .get(y)
            .and_then(metric_value)
            .with_context(|| format!("record (cell {}, trial {}) has no numeric metric {y}", r.cell, r.trial))?;
        match groups.iter_mut().find(|(v, _)| v == xv) {
            Some((_, ys)) => ys.push(yv),
            None => groups.push((xv.clone(), vec![yv])),
        }
    }
    groups.sort_by(|(a, _), (b, _)| match (a.as_f64(), b.as_f64()) {
        (Some(p), Some(q)) => p.total_cmp(&q),
        _ => a.to_string().cmp(&b.to_string()),
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([x, y, "trials"])?;
    for (xv, mut ys) in groups {
        let label = match &xv {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let value = aggregate(&mut ys, agg);
        w.write_record([label, value.to_string(), ys.len().to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
