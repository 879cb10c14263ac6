//! Grid sweep over `(Δν/λ, N, θ)` with a resumable journal.
//!
//! Points run concurrently in chunks; each finished chunk is appended to
//! `<out>.journal` in grid order. A resumed sweep reuses the journal lines
//! verbatim, so completed rows are byte-identical to an uninterrupted run.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anisotrap::fockspace::FockBasis;
use anisotrap::numerics::fidelity;
use anisotrap::propagator::{adiabaticity_ratio, evolve_adiabatic, evolve_cycle, Method};
use anisotrap::experiment::prepare_superposition;
use rayon::prelude::*;

use crate::commands::{experiment_row, run_experiment, EXPERIMENT_COLUMNS};
use crate::config::{RawConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{assemble, row_line, Table, Value};

pub const THREADS_ENV: &str = "ANISOTRAP_THREADS";
const JOURNAL_MAGIC: &str = "# anisotrap sweep journal v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub dnu_over_lambda: f64,
    pub n: usize,
    pub theta: f64,
}

/// Grid in row-major order: `Δν/λ` slowest, then `N`, then `θ`.
pub fn grid(cfg: &RunConfig) -> CliResult<Vec<GridPoint>> {
    for (key, empty) in [
        ("sweep_dnu_over_lambda", cfg.sweep_dnu_over_lambda.is_empty()),
        ("sweep_n", cfg.sweep_n.is_empty()),
        ("sweep_theta", cfg.sweep_theta.is_empty()),
    ] {
        if empty {
            return Err(CliError::Config(format!("sweep needs a non-empty `{key}`")));
        }
    }
    let mut points = Vec::new();
    for &dnu_over_lambda in &cfg.sweep_dnu_over_lambda {
        for &n in &cfg.sweep_n {
            for &theta in &cfg.sweep_theta {
                points.push(GridPoint { dnu_over_lambda, n, theta });
            }
        }
    }
    Ok(points)
}

/// Configuration for a single point, runnable on its own with `experiment`.
pub fn point_config(base: &RawConfig, pt: GridPoint) -> CliResult<RawConfig> {
    let mut raw = base.clone();
    for key in ["nu_b", "alpha", "sweep_dnu_over_lambda", "sweep_n", "sweep_theta", "n_list", "out", "format"] {
        raw.remove(key);
    }
    raw.set("dnu_over_lambda", &pt.dnu_over_lambda.to_string())?;
    raw.set("theta", &pt.theta.to_string())?;
    raw.set("n", &pt.n.to_string())?;
    raw.set("n_max", &(pt.n + 1).to_string())?;
    Ok(raw)
}

pub fn columns() -> Vec<&'static str> {
    let mut c = vec!["dnu_over_lambda_grid", "n_grid", "theta_grid"];
    c.extend_from_slice(EXPERIMENT_COLUMNS);
    c.push("adiabatic_error");
    c
}

fn run_point(base: &RawConfig, pt: GridPoint) -> CliResult<Vec<Value>> {
    let cfg = RunConfig::resolve(point_config(base, pt)?)?;
    let (rec, g) = run_experiment(&cfg)?;
    let p = g.model();
    let adiabatic_error = if adiabaticity_ratio(&p)? < 1.0 {
        let basis = FockBasis::new(cfg.n_max);
        let psi0 = prepare_superposition(cfg.n, &p, &basis)?;
        let exact = evolve_cycle(&psi0, &p, &basis, Method::Closed)?;
        let adiabatic = evolve_adiabatic(&psi0, &p, &basis)?;
        1.0 - fidelity(&adiabatic.final_state, &exact.final_state)?
    } else {
        f64::NAN
    };
    let mut row = vec![pt.dnu_over_lambda.into(), pt.n.into(), pt.theta.into()];
    row.extend(experiment_row(&rec, &g, cfg.raw.fingerprint()));
    row.push(adiabatic_error.into());
    Ok(row)
}

pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} = `{v}` is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
}

pub fn journal_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".journal");
    out.with_file_name(name)
}

fn journal_header(cfg: &RunConfig) -> String {
    let format = match cfg.format {
        crate::config::Format::Csv => "csv",
        crate::config::Format::Json => "json",
    };
    format!("{JOURNAL_MAGIC} format={format} config={}\n", cfg.raw.fingerprint())
}

/// Completed rows recorded in a journal. A trailing line without newline is
/// an interrupted write and is discarded.
fn read_journal(path: &Path, header: &str, total: usize) -> CliResult<Vec<Option<String>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot resume: journal {} unreadable: {e}", path.display())))?;
    if !text.starts_with(header) {
        return Err(CliError::Config(format!(
            "cannot resume: journal {} belongs to a different configuration",
            path.display()
        )));
    }
    let mut rows = vec![None; total];
    let body = &text[header.len()..];
    let complete = match body.rfind('\n') {
        Some(i) => &body[..=i],
        None => "",
    };
    for line in complete.lines() {
        let (idx, row) = line
            .split_once('\t')
            .ok_or_else(|| CliError::Config(format!("corrupt journal line `{line}`")))?;
        let idx: usize = idx.parse().map_err(|_| CliError::Config(format!("corrupt journal index `{idx}`")))?;
        if idx >= total {
            return Err(CliError::Config(format!("journal index {idx} outside grid of {total}")));
        }
        rows[idx] = Some(format!("{row}\n"));
    }
    Ok(rows)
}

pub struct SweepOptions {
    pub resume: bool,
    /// Stop after computing this many new points, leaving the journal.
    pub stop_after: Option<usize>,
}

pub enum SweepOutcome {
    Complete(String),
    Interrupted { completed: usize, total: usize },
}

pub fn run(cfg: &RunConfig, opts: &SweepOptions) -> CliResult<SweepOutcome> {
    let points = grid(cfg)?;
    let cols = columns();
    let table = Table::new(cols.clone());
    let digits = cfg.precision;
    let header = journal_header(cfg);

    let journal = match &cfg.out {
        Some(out) => Some(journal_path(out)),
        None if opts.resume || opts.stop_after.is_some() => {
            return Err(CliError::Config("resumable sweeps need --out".into()));
        }
        None => None,
    };
    let mut rows: Vec<Option<String>> = match (&journal, opts.resume) {
        (Some(path), true) if path.exists() => read_journal(path, &header, points.len())?,
        _ => vec![None; points.len()],
    };
    // Rewrite the journal without any torn trailing line.
    let mut sink = match &journal {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(header.as_bytes())?;
            for (i, r) in rows.iter().enumerate() {
                if let Some(r) = r {
                    write!(f, "{i}\t{r}")?;
                }
            }
            f.sync_data()?;
            Some(OpenOptions::new().append(true).open(path)?)
        }
        None => None,
    };

    let pending: Vec<usize> = (0..points.len()).filter(|&i| rows[i].is_none()).collect();
    let budget = opts.stop_after.unwrap_or(usize::MAX).min(pending.len());
    let pool = thread_pool()?;
    let chunk = pool.current_num_threads().max(1);
    let base = cfg.raw.clone();
    for batch in pending[..budget].chunks(chunk) {
        let lines: Vec<String> = pool.install(|| {
            batch
                .par_iter()
                .map(|&i| Ok(row_line(&cols, &run_point(&base, points[i])?, cfg.format, digits)))
                .collect::<CliResult<_>>()
        })?;
        for (&i, line) in batch.iter().zip(lines) {
            if let Some(f) = sink.as_mut() {
                write!(f, "{i}\t{line}")?;
            }
            rows[i] = Some(line);
        }
        if let Some(f) = sink.as_mut() {
            f.sync_data()?;
        }
    }

    if rows.iter().any(Option::is_none) {
        return Ok(SweepOutcome::Interrupted {
            completed: rows.iter().filter(|r| r.is_some()).count(),
            total: points.len(),
        });
    }
    let lines: Vec<String> = rows.into_iter().map(Option::unwrap).collect();
    Ok(SweepOutcome::Complete(assemble("sweep", &table, &lines, cfg.format)))
}

/// Remove the journal once the final document is safely written.
pub fn finish(cfg: &RunConfig) -> CliResult<()> {
    if let Some(out) = &cfg.out {
        let j = journal_path(out);
        if j.exists() {
            fs::remove_file(j)?;
        }
    }
    Ok(())
}
