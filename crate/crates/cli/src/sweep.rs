//! Benchmark sweeps: the cross product of the listed parameters, one CSV
//! row per (configuration, repetition).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use lightsp::graph::measure;
use lightsp::metric::{generate_points, GenSpec};
use lightsp::{run, BasicSpKind, MetricSpaceF64, Mode, RunConfig};

use crate::{check_basic, ensure_nonempty, oracle_caps, parse_mode, usage};

pub const SCHEMA_VERSION: u32 = 1;

/// The first twelve columns are the plotting schema; the last three record
/// provenance.
pub const COLUMNS: &str = "n,rho,eps,mode,edges,delta,psi,stretch,hop_h,gamma,ell,build_ms,basic,seed,error";

#[derive(Args)]
pub struct SweepArgs {
    /// Comma-separated point counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    rho: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "greedy", value_parser = check_basic)]
    basic: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "strict", value_parser = parse_mode)]
    mode: Vec<Mode>,
    /// Greedy back-end stretch.
    #[arg(long, default_value_t = 1.05)]
    t: f64,
    /// Point generator, as in `gen:` specs but without `n` and `seed`.
    #[arg(long, default_value = "uniform")]
    points: String,
    /// Runs per configuration, with seeds `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Row {
    n: usize,
    rho: usize,
    eps: f64,
    mode: Mode,
    basic: String,
    seed: u64,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

fn run_row(r: &Row, a: &SweepArgs, caps: lightsp::OracleCaps) -> Result<String> {
    let spec = GenSpec::parse(&format!("{},n={},seed={}", a.points, r.n, r.seed))?;
    let m: MetricSpaceF64 = generate_points(spec.kind, spec.n, spec.dim, spec.seed)?;
    let basic = BasicSpKind::parse(&r.basic, a.t)?;
    let mut cfg = RunConfig::new(r.rho, r.eps, a.t, basic).with_mode(r.mode);
    cfg.seed = r.seed;
    cfg.caps = caps;
    cfg.validate()?;
    let b = run(&m, &cfg)?;
    let meas = measure(&b.graph, &m, cfg.target_stretch(), &caps);
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
        r.n,
        r.rho,
        r.eps,
        r.mode.label(),
        b.graph.edge_count(),
        b.graph.max_degree(),
        b.lightness(),
        opt(meas.stretch),
        opt(meas.hop_diameter),
        b.params.gamma,
        b.params.ell,
        b.times.total_ms
    ))
}

pub fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let caps = oracle_caps()?;
    ensure_nonempty("n", &a.n)?;
    ensure_nonempty("rho", &a.rho)?;
    ensure_nonempty("eps", &a.eps)?;
    ensure_nonempty("basic", &a.basic)?;
    ensure_nonempty("mode", &a.mode)?;
    GenSpec::parse(&format!("{},n=1", a.points)).map_err(|e| usage(format!("--points: {e}")))?;

    let mut out = String::new();
    let _ = writeln!(out, "# lightsp sweep schema v{SCHEMA_VERSION}; t = {}, points = {}", a.t, a.points);
    let _ = writeln!(out, "{COLUMNS}");
    let mut errors = 0;
    for &n in &a.n {
        for &rho in &a.rho {
            for &eps in &a.eps {
                for basic in &a.basic {
                    for &mode in &a.mode {
                        for rep in 0..a.reps.max(1) {
                            let row = Row { n, rho, eps, mode, basic: basic.clone(), seed: a.seed + rep };
                            let (body, err) = match run_row(&row, &a, caps) {
                                Ok(body) => (body, String::new()),
                                Err(e) => {
                                    errors += 1;
                                    eprintln!(
                                        "row n={n} rho={rho} eps={eps} mode={} seed={}: {e:#}",
                                        mode.label(),
                                        row.seed
                                    );
                                    (format!("{n},{rho},{eps},{},,,,,,,,", mode.label()), format!("{e:#}"))
                                }
                            };
                            let _ = writeln!(out, "{body},{},{},{}", csv_field(basic), row.seed, csv_field(&err));
                        }
                    }
                }
            }
        }
    }
    match &a.out {
        Some(p) => fs::write(p, &out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    if errors > 0 {
        eprintln!("{errors} row(s) failed; see the error column");
    }
    Ok(())
}
