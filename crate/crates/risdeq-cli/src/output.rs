//! CSV emission and parsing of result rows and PGA traces.

use anyhow::{bail, ensure, Context, Result};
use risdeq::optimizer::PgaStep;
use std::io::Write;
use std::path::Path;

/// Column names of the result table, in order.
pub const HEADER: [&str; 8] =
    ["sweep_value", "method", "mean_sinr", "net_sum_rate", "prefactor", "overhead_symbols", "stderr", "wall_ms"];

/// One `(sweep value, method)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// Value of the swept variable.
    pub sweep_value: f64,
    /// Method label.
    pub method: String,
    /// Mean SINR over users (linear).
    pub mean_sinr: f64,
    /// Net sum-rate, bit/s/Hz (zero when the training overhead is infeasible).
    pub net_sum_rate: f64,
    /// Training-loss prefactor (≤ 0 flags an infeasible overhead).
    pub prefactor: f64,
    /// Training symbols spent per coherence interval.
    pub overhead_symbols: f64,
    /// Standard error of the net sum-rate (sampled rows only).
    pub stderr: Option<f64>,
    /// Wall-clock time of the row's computation in milliseconds (0 when
    /// timing is disabled).
    pub wall_ms: f64,
}

/// Full-precision float text (17 significant digits).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_float(s: &str, column: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().with_context(|| format!("line {line}: column {column}: invalid number {s:?}"))
}

/// Writes rows (with header) to any writer, LF line endings.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            format_float(r.sweep_value),
            r.method.clone(),
            format_float(r.mean_sinr),
            format_float(r.net_sum_rate),
            format_float(r.prefactor),
            format_float(r.overhead_symbols),
            r.stderr.map(format_float).unwrap_or_default(),
            format_float(r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows to `path`, creating parent directories.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    write_rows(rows, std::io::BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

/// Parses a result table written by [`write_rows`].
pub fn parse_rows(text: &str) -> Result<Vec<ResultRow>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    ensure!(header == HEADER, "unexpected header {header:?}");
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != HEADER.len() {
            bail!("line {line}: expected {} fields, found {}", HEADER.len(), rec.len());
        }
        let f = |c: usize| parse_float(&rec[c], HEADER[c], line);
        rows.push(ResultRow {
            sweep_value: f(0)?,
            method: rec[1].to_owned(),
            mean_sinr: f(2)?,
            net_sum_rate: f(3)?,
            prefactor: f(4)?,
            overhead_symbols: f(5)?,
            stderr: if rec[6].is_empty() { None } else { Some(f(6)?) },
            wall_ms: f(7)?,
        });
    }
    Ok(rows)
}

/// Reads a result table from disk.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rows(&text)
}

/// Writes a PGA trace (`iteration,objective,step,grad_norm`).
pub fn emit_trace(trace: &[PgaStep], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(["iteration", "objective", "step", "grad_norm"])?;
    for s in trace {
        w.write_record([
            s.iteration.to_string(),
            format_float(s.objective),
            format_float(s.step),
            format_float(s.grad_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}
