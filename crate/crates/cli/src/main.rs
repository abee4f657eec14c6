use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use v2vsim::batch::{emit_csv, run_batch, BatchResult};
use v2vsim::config::{apply_env_overrides, parse_seeds, parse_table, resolve, ENV_PREFIX};

/// Runs a seeded simulation campaign and writes one CSV row per run plus an
/// aggregate row per sweep point.
///
/// Config keys can be overridden from the environment with
/// V2VSIM_<SECTION>__<KEY>=<value>, e.g. V2VSIM_RLC__T_REORDERING_MS=50.
#[derive(Debug, Parser)]
#[command(name = "v2vsim", version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,

    /// CSV destination; stdout when omitted. A JSON summary is written next
    /// to it with the extension `.summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed count (`20` → seeds 1..=20) or comma-separated list; overrides
    /// the file.
    #[arg(long)]
    seeds: Option<String>,

    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    parallel: usize,

    /// Suppress the per-point summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn print_summary(result: &BatchResult) {
    let mut err = io::stderr().lock();
    for p in &result.points {
        let label: Vec<String> = result
            .axes
            .iter()
            .zip(&p.values)
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let a = &p.aggregate;
        let _ = writeln!(
            err,
            "{:<40} prr {:.4}  delay {:.3} ms  sinr {:.2} dB  thr {:.3} Mbps  ({} runs)",
            if label.is_empty() { "base".to_owned() } else { label.join(" ") },
            a.prr.mean,
            a.delay_s.mean * 1e3,
            a.sinr_db.mean,
            a.throughput_bps.mean / 1e6,
            a.runs
        );
    }
}

fn run(args: &Args) -> Result<bool> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let mut table = parse_table(&text, &args.config.display().to_string())?;
    let overridden = apply_env_overrides(&mut table, std::env::vars())?;
    let mut spec = resolve(table)?;
    if let Some(seeds) = &args.seeds {
        spec.seeds = parse_seeds(seeds)?;
    }
    if !args.quiet {
        for key in &overridden {
            eprintln!("override from {ENV_PREFIX}*: {key}");
        }
        eprintln!(
            "{} points x {} seeds = {} runs",
            spec.points.len(),
            spec.seeds.len(),
            spec.run_count()
        );
    }

    let started = Instant::now();
    let result = run_batch(&spec, args.parallel);
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            emit_csv(&result, BufWriter::new(file))?;
            let summary = summary_path(path);
            let json = serde_json::to_string_pretty(&result)?;
            std::fs::write(&summary, json).with_context(|| format!("cannot write {}", summary.display()))?;
        }
        None => emit_csv(&result, io::stdout().lock())?,
    }

    let failures = result.failures();
    if !args.quiet {
        print_summary(&result);
        eprintln!("finished in {:.1} s", started.elapsed().as_secs_f64());
    }
    for p in &result.points {
        for r in &p.runs {
            if let Err(e) = &r.outcome {
                eprintln!("run failed ({} seed {}): {e}", p.values.join(","), r.seed);
            }
        }
    }
    Ok(failures == 0)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
