//! CSV tables, number formatting and run manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::continuation::Curve;
use crate::error::{Error, Result};
use crate::search::SearchResult;

use super::config::Config;

pub const SEARCH_HEADER: [&str; 12] = [
    "alpha", "beta", "gamma", "delta", "c", "lambda1", "lambda2", "lambda3", "lambda4", "err",
    "area", "perimeter",
];

pub const TRACE_HEADER: [&str; 9] = [
    "t",
    "alpha",
    "beta",
    "gamma",
    "delta",
    "c",
    "residual_norm",
    "det_jacobian",
    "truncated",
];

pub const VERTICES_HEADER: [&str; 8] = ["x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4"];

/// 17 significant digits; positional notation for moderate magnitudes.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=16).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

/// Two decimals, for people.
pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("write: {e}")))
}

/// Writes to `path`, or standard output when `None`.
pub fn emit_table(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match path {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| io_error(p, e))?;
            write_table(io::BufWriter::new(file), header, rows)
        }
        None => write_table(io::stdout().lock(), header, rows),
    }
}

pub fn search_rows(result: &SearchResult) -> Vec<Vec<String>> {
    result
        .candidates
        .iter()
        .map(|c| {
            let q = c.quad;
            let mut row: Vec<String> = [q.alpha, q.beta, q.gamma, q.delta, c.c]
                .iter()
                .map(|&v| fmt17(v))
                .collect();
            row.extend(c.lambdas.iter().map(|&v| fmt17(v)));
            row.extend([c.err, c.area, c.perimeter].iter().map(|&v| fmt17(v)));
            row
        })
        .collect()
}

pub fn scaled_vertex_rows(result: &SearchResult) -> Vec<Vec<String>> {
    result
        .candidates
        .iter()
        .map(|c| {
            c.scaled_vertices()
                .iter()
                .flat_map(|p| [fmt17(p.x), fmt17(p.y)])
                .collect()
        })
        .collect()
}

pub fn trace_rows(curve: &Curve) -> Vec<Vec<String>> {
    let flags = curve.truncation_flags();
    curve
        .points
        .iter()
        .zip(flags)
        .map(|(p, flag)| {
            let q = p.point;
            let mut row: Vec<String> = [
                p.t,
                q.alpha,
                q.beta,
                q.gamma,
                q.delta,
                q.c,
                p.residual_norm,
                p.scaled_det,
            ]
            .iter()
            .map(|&v| fmt17(v))
            .collect();
            row.push(if flag { "1" } else { "0" }.to_string());
            row
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, D: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a Config,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
    pub diagnostics: D,
}

/// `<output>.manifest.json` next to a single output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest<D: Serialize>(
    path: &Path,
    command: &str,
    config: &Config,
    outputs: &[&Path],
    duration: Duration,
    diagnostics: D,
) -> Result<()> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        duration_seconds: duration.as_secs_f64(),
        diagnostics,
    };
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidArgument(format!("manifest: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}
