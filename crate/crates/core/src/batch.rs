//! Runs every (sweep point, seed) pair and writes the results table.
//!
//! Runs are independent, so with the `parallel` feature they are spread over
//! a rayon pool. Results are collected by run index, which keeps the output
//! identical whatever the thread count.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::Serialize;

use crate::config::{format_value, SweepSpec};
use crate::scenario::{aggregate, build_scenario, Aggregate, RunMetrics, SimConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    /// Metrics, or the build error / panic message of a failed run.
    pub outcome: Result<RunMetrics, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResult {
    /// Axis values formatted as in the CSV.
    pub values: Vec<String>,
    pub runs: Vec<RunResult>,
    pub aggregate: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchResult {
    pub axes: Vec<String>,
    pub points: Vec<PointResult>,
}

impl BatchResult {
    pub fn failures(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.runs)
            .filter(|r| r.outcome.is_err())
            .count()
    }
}

/// Builds and runs one configuration, turning panics into errors.
pub fn run_one(cfg: &SimConfig, seed: u64) -> Result<RunMetrics, String> {
    catch_unwind(AssertUnwindSafe(|| {
        build_scenario(cfg, seed)
            .map(|sim| sim.run().metrics)
            .map_err(|e| e.to_string())
    }))
    .unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "run panicked".to_owned());
        Err(format!("panic: {msg}"))
    })
}

fn execute(spec: &SweepSpec, parallelism: usize) -> Vec<Result<RunMetrics, String>> {
    let jobs = spec.runs();
    let job = |&(p, seed): &(usize, u64)| run_one(&spec.points[p].config, seed);
    #[cfg(feature = "parallel")]
    if parallelism != 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .expect("thread pool");
        return pool.install(|| jobs.par_iter().map(job).collect());
    }
    let _ = parallelism;
    jobs.iter().map(job).collect()
}

/// Runs the whole sweep. `parallelism` = 0 uses every core; 1 runs on the
/// calling thread. Without the `parallel` feature runs are always
/// sequential.
pub fn run_batch(spec: &SweepSpec, parallelism: usize) -> BatchResult {
    let mut outcomes = execute(spec, parallelism).into_iter();
    let points = spec
        .points
        .iter()
        .map(|point| {
            let runs: Vec<RunResult> = spec
                .seeds
                .iter()
                .map(|&seed| RunResult {
                    seed,
                    outcome: outcomes.next().expect("one outcome per run"),
                })
                .collect();
            let ok: Vec<RunMetrics> = runs.iter().filter_map(|r| r.outcome.clone().ok()).collect();
            PointResult {
                values: point.values.iter().map(format_value).collect(),
                aggregate: aggregate(&ok, spec.confidence),
                runs,
            }
        })
        .collect();
    BatchResult {
        axes: spec.axes.clone(),
        points,
    }
}

pub const METRIC_COLUMNS: [&str; 12] = [
    "prr",
    "prr_ci",
    "delay_ms",
    "delay_ci",
    "sinr_db",
    "sinr_ci",
    "throughput_mbps",
    "throughput_ci",
    "generated",
    "delivered",
    "phy_lost",
    "buffer_dropped",
];

fn fixed(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{v:.decimals$}")
    }
}

fn ci(h: Option<f64>, scale: f64, decimals: usize) -> String {
    h.map_or_else(String::new, |h| fixed(h * scale, decimals))
}

/// Column names: sweep keys, `seed`, then the metric columns.
pub fn csv_header(axes: &[String]) -> Vec<String> {
    let mut h: Vec<String> = axes.to_vec();
    h.push("seed".into());
    h.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    h
}

/// Writes one row per run followed by an `agg` row per sweep point. Delay
/// is in milliseconds with three decimals, throughput in Mbit/s; failed
/// runs leave their metric cells empty. Aggregate count columns are totals
/// over the successful runs.
pub fn emit_csv<W: Write>(result: &BatchResult, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(csv_header(&result.axes))?;
    for point in &result.points {
        for run in &point.runs {
            let mut row = point.values.clone();
            row.push(run.seed.to_string());
            match &run.outcome {
                Ok(m) => row.extend([
                    fixed(m.prr, 6),
                    String::new(),
                    fixed(m.mean_delay_s * 1e3, 3),
                    String::new(),
                    fixed(m.mean_sinr_db, 3),
                    String::new(),
                    fixed(m.throughput_bps / 1e6, 6),
                    String::new(),
                    m.generated.to_string(),
                    m.delivered.to_string(),
                    m.phy_lost.to_string(),
                    m.buffer_dropped.to_string(),
                ]),
                Err(_) => row.extend(std::iter::repeat_n(String::new(), 12)),
            }
            w.write_record(&row)?;
        }
        let a = &point.aggregate;
        let mut row = point.values.clone();
        row.push("agg".into());
        row.extend([
            fixed(a.prr.mean, 6),
            ci(a.prr.half_width, 1.0, 6),
            fixed(a.delay_s.mean * 1e3, 3),
            ci(a.delay_s.half_width, 1e3, 3),
            fixed(a.sinr_db.mean, 3),
            ci(a.sinr_db.half_width, 1.0, 3),
            fixed(a.throughput_bps.mean / 1e6, 6),
            ci(a.throughput_bps.half_width, 1e-6, 6),
            a.generated.to_string(),
            a.delivered.to_string(),
            a.phy_lost.to_string(),
            a.buffer_dropped.to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(result: &BatchResult) -> String {
    let mut buf = Vec::new();
    emit_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}
