//! The `isoquad` command line.
//!
//! Exit codes: 0 success, 1 a reference check failed, 2 bad usage or input.

pub mod config;
pub mod output;
pub mod reproduce;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::continuation::{deformation_study, trace, Method, Param, Truncation};
use crate::discretization::{Discretization, Scheme};
use crate::error::{Error, Result};
use crate::geometry::{normalize_vertices, Quadrilateral};
use crate::search::run_search;

use config::{parse_kappa, parse_params, parse_vertices, Config, StarConfig};
use output::{
    emit_table, fmt17, fmt2, manifest_path, scaled_vertex_rows, search_rows, trace_rows,
    write_manifest, SEARCH_HEADER, TRACE_HEADER, VERTICES_HEADER,
};
use reproduce::Suite;

pub const THREADS_ENV: &str = "ISOQUAD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "isoquad", version, about = "Spectra, isospectral searches and isospectral curves of quadrilaterals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues and characteristic-polynomial invariants of one domain.
    Eigs(EigsArgs),
    /// Exhaustive search of the vertex neighbourhood of a reference domain.
    Search(SearchArgs),
    /// Trace the isospectral curve through a domain.
    Trace(TraceArgs),
    /// Trace curves while deforming a domain toward the unit square.
    Deform(DeformArgs),
    /// Run the reference checks.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file (or a run manifest).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Grid parameter: a number in (0, 1/2), `uniform` or `legendre`.
    #[arg(long, value_parser = parse_kappa, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    /// `alpha,beta,gamma,delta`.
    #[arg(value_parser = parse_params, allow_hyphen_values = true, conflicts_with_all = ["star", "vertices"])]
    pub params: Option<Quadrilateral>,
    #[arg(long, value_parser = parse_params, allow_hyphen_values = true, conflicts_with = "vertices")]
    pub star: Option<Quadrilateral>,
    /// Arbitrary vertices `x1,y1,x2,y2,x3,y3,x4,y4` in the order V1, V2, V3, V4.
    #[arg(long, value_parser = parse_vertices, allow_hyphen_values = true)]
    pub vertices: Option<[crate::geometry::Point; 4]>,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Reference domain `alpha,beta,gamma,delta`.
    #[arg(long, value_parser = parse_params, allow_hyphen_values = true)]
    pub star: Option<Quadrilateral>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Skip candidates whose area differs from the reference by more than `--area-tol`.
    #[arg(long)]
    pub prefilter: bool,
    #[arg(long)]
    pub area_tol: Option<f64>,
    /// CSV output (standard output when omitted).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the sqrt(c)-scaled vertex lists of accepted candidates.
    #[arg(long, value_name = "FILE")]
    pub vertices_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TraceOptions {
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Parameter advanced linearly in t.
    #[arg(long, value_parser = parse_param)]
    pub explicit: Option<Param>,
    #[arg(long = "M")]
    pub steps: Option<usize>,
    #[arg(long)]
    pub fd_increment: Option<f64>,
    /// Relative determinant below which a tangent system counts as singular.
    #[arg(long)]
    pub singular_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_parser = parse_params, allow_hyphen_values = true)]
    pub star: Option<Quadrilateral>,
    /// Half range of t.
    #[arg(long = "T")]
    pub t_half: Option<f64>,
    #[command(flatten)]
    pub options: TraceOptions,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    #[arg(long, value_parser = parse_params, allow_hyphen_values = true)]
    pub star: Option<Quadrilateral>,
    /// Number of deformation stages.
    #[arg(long = "S")]
    pub stages: Option<usize>,
    /// Half range of t on the undeformed domain.
    #[arg(long = "T0")]
    pub t0: Option<f64>,
    #[command(flatten)]
    pub options: TraceOptions,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long)]
    pub json: bool,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> std::result::Result<Param, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `ISOQUAD_THREADS`: unset means the default pool, 0 sequential.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be an integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

impl Common {
    fn resolve(&self) -> Result<Config> {
        let mut cfg = Config::load_or_default(self.config.as_deref())?;
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(k) = self.kappa {
            cfg.kappa = k;
        }
        Ok(cfg)
    }
}

impl TraceOptions {
    fn apply(&self, cfg: &mut Config) {
        let t = &mut cfg.trace;
        if let Some(m) = self.method {
            t.method = m;
        }
        if let Some(p) = self.explicit {
            t.explicit = p;
        }
        if let Some(m) = self.steps {
            t.steps = m;
        }
        if let Some(h) = self.fd_increment {
            t.fd_increment = h;
        }
        if let Some(tol) = self.singular_tol {
            t.singular_tol = tol;
        }
    }
}

fn set_star(cfg: &mut Config, star: Option<Quadrilateral>) {
    if let Some(q) = star {
        cfg.star = StarConfig::from_quad(&q);
    }
}

/// Parses `std::env::args` and runs.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eigs(a) => cmd_eigs(a),
        Command::Search(a) => cmd_search(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Deform(a) => cmd_deform(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

#[derive(Debug, Serialize)]
struct EigsReport {
    scheme: Scheme,
    kappa: f64,
    quadrilateral: Quadrilateral,
    /// Similarity length `|V2 - V1|` of the input vertices (1 for parameters).
    length: f64,
    eigenvalues: [f64; 4],
    /// `xi[k] = e_{4-k}(eigenvalues)`.
    xi: [f64; 4],
    area: f64,
    perimeter: f64,
}

fn cmd_eigs(a: EigsArgs) -> Result<ExitCode> {
    let mut cfg = a.common.resolve()?;
    let (quad, len) = match (a.vertices, a.params.or(a.star)) {
        (Some(v), _) => normalize_vertices(v)?,
        (None, Some(q)) => (q, 1.0),
        (None, None) => (cfg.star.quad(), 1.0),
    };
    cfg.star = StarConfig::from_quad(&quad);
    let disc = Discretization::new(cfg.scheme, cfg.kappa)?;
    let s = disc.spectrum(&quad)?;
    let l2 = len * len;
    let report = EigsReport {
        scheme: cfg.scheme,
        kappa: cfg.kappa,
        quadrilateral: quad,
        length: len,
        eigenvalues: s.lambdas.map(|l| l / l2),
        xi: std::array::from_fn(|k| s.xi[k] / l2.powi(4 - k as i32)),
        area: quad.area() * l2,
        perimeter: quad.perimeter() * len,
    };
    if a.json {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
        println!("{text}");
    } else {
        let join = |v: &[f64]| v.iter().map(|x| fmt2(*x)).collect::<Vec<_>>().join(" ");
        println!("scheme {} kappa {:.4}", report.scheme, report.kappa);
        println!("eigenvalues {}", join(&report.eigenvalues));
        let xi = report.xi;
        println!("xi3 xi2 xi1 xi0 {}", join(&[xi[3], xi[2], xi[1], xi[0]]));
        println!("area {} perimeter {}", fmt2(report.area), fmt2(report.perimeter));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_search(a: SearchArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let mut cfg = a.common.resolve()?;
    set_star(&mut cfg, a.star);
    let s = &mut cfg.search;
    if let Some(v) = a.l {
        s.l = v;
    }
    if let Some(v) = a.h {
        s.h = v;
    }
    if let Some(v) = a.eps {
        s.epsilon = v;
    }
    if a.prefilter {
        s.prefilter = true;
    }
    if let Some(v) = a.area_tol {
        s.area_tol = v;
    }
    let star = cfg.star.quad();
    star.validate()?;
    let threads = threads_from_env()?;
    let result = run_search(&star, &cfg.search_config(threads))?;
    emit_table(a.out.as_deref(), &SEARCH_HEADER, &search_rows(&result))?;
    if let Some(p) = &a.vertices_out {
        emit_table(Some(p), &VERTICES_HEADER, &scaled_vertex_rows(&result))?;
    }
    let st = &result.stats;
    eprintln!(
        "accepted {} ({} distinct spectra) of {} candidates; share area {}, share perimeter {}; {:.2} s",
        st.accepted,
        st.distinct_spectra,
        st.enumerated,
        st.share_area,
        st.share_perimeter,
        start.elapsed().as_secs_f64()
    );
    if let Some(out) = &a.out {
        let mut outputs = vec![out.as_path()];
        outputs.extend(a.vertices_out.as_deref());
        write_manifest(
            &manifest_path(out),
            "search",
            &cfg,
            &outputs,
            start.elapsed(),
            SearchDiagnostics {
                stats: *st,
                lambdas_star: result.lambdas_star,
                star_area: result.star_area,
                star_perimeter: result.star_perimeter,
            },
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct SearchDiagnostics {
    stats: crate::search::SearchStats,
    lambdas_star: [f64; 4],
    star_area: f64,
    star_perimeter: f64,
}

#[derive(Debug, Serialize)]
struct TruncationInfo {
    branch: &'static str,
    last_valid_index: usize,
    t: f64,
    reason: String,
}

fn truncations(negative: &Option<Truncation>, positive: &Option<Truncation>) -> Vec<TruncationInfo> {
    [("negative", negative), ("positive", positive)]
        .into_iter()
        .filter_map(|(branch, tr)| {
            tr.as_ref().map(|tr| TruncationInfo {
                branch,
                last_valid_index: tr.last_valid_index,
                t: tr.t,
                reason: tr.reason.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct TraceDiagnostics {
    rows: usize,
    truncations: Vec<TruncationInfo>,
    max_residual_norm: f64,
    min_det_jacobian: f64,
}

fn trace_diagnostics(curve: &crate::continuation::Curve) -> TraceDiagnostics {
    TraceDiagnostics {
        rows: curve.points.len(),
        truncations: truncations(&curve.negative, &curve.positive),
        max_residual_norm: curve.points.iter().map(|p| p.residual_norm).fold(0.0, f64::max),
        min_det_jacobian: curve
            .points
            .iter()
            .map(|p| p.scaled_det)
            .filter(|d| !d.is_nan())
            .fold(f64::INFINITY, f64::min),
    }
}

fn cmd_trace(a: TraceArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let mut cfg = a.common.resolve()?;
    set_star(&mut cfg, a.star);
    a.options.apply(&mut cfg);
    if let Some(t) = a.t_half {
        cfg.trace.t_half = t;
    }
    let curve = trace(&cfg.star.quad(), &cfg.trace_config())?;
    emit_table(a.out.as_deref(), &TRACE_HEADER, &trace_rows(&curve))?;
    for tr in truncations(&curve.negative, &curve.positive) {
        eprintln!(
            "{} branch truncated after step {} (t = {}): {}",
            tr.branch, tr.last_valid_index, fmt17(tr.t), tr.reason
        );
    }
    if let Some(out) = &a.out {
        write_manifest(
            &manifest_path(out),
            "trace",
            &cfg,
            &[out.as_path()],
            start.elapsed(),
            trace_diagnostics(&curve),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct DeformDiagnostics {
    steps: Vec<DeformStepInfo>,
}

#[derive(Debug, Serialize)]
struct DeformStepInfo {
    j: usize,
    file: String,
    #[serde(rename = "T")]
    t_half: f64,
    error: Option<String>,
    trace: Option<TraceDiagnostics>,
}

fn cmd_deform(a: DeformArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let mut cfg = a.common.resolve()?;
    set_star(&mut cfg, a.star);
    a.options.apply(&mut cfg);
    if let Some(s) = a.stages {
        cfg.deform.stages = s;
    }
    if let Some(t) = a.t0 {
        cfg.deform.t0 = t;
    }
    let study = deformation_study(
        &cfg.star.quad(),
        cfg.deform.stages,
        cfg.deform.t0,
        &cfg.trace_config(),
    )?;
    fs::create_dir_all(&a.out).map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.out.display())))?;

    let mut summary = Vec::new();
    let mut infos = Vec::new();
    let mut files = Vec::new();
    for step in &study {
        let name = format!("step_{:02}.csv", step.j);
        let path = a.out.join(&name);
        let q = step.quad;
        let (rows, truncated, reason, info) = match &step.curve {
            Ok(curve) => {
                emit_table(Some(&path), &TRACE_HEADER, &trace_rows(curve))?;
                files.push(path);
                let tr = truncations(&curve.negative, &curve.positive);
                let reason = tr.iter().map(|t| format!("{}: {}", t.branch, t.reason)).collect::<Vec<_>>().join("; ");
                (curve.points.len(), curve.is_truncated(), reason, Some(trace_diagnostics(curve)))
            }
            Err(e) => (0, true, e.to_string(), None),
        };
        let negative_last = step.curve.as_ref().ok().and_then(|c| c.negative.as_ref()).map(|t| t.last_valid_index.to_string());
        let positive_last = step.curve.as_ref().ok().and_then(|c| c.positive.as_ref()).map(|t| t.last_valid_index.to_string());
        summary.push(vec![
            step.j.to_string(),
            fmt17(step.s),
            fmt17(q.alpha),
            fmt17(q.beta),
            fmt17(q.gamma),
            fmt17(q.delta),
            fmt17(step.t_half),
            rows.to_string(),
            if truncated { "1" } else { "0" }.to_string(),
            negative_last.unwrap_or_default(),
            positive_last.unwrap_or_default(),
            reason,
        ]);
        infos.push(DeformStepInfo {
            j: step.j,
            file: name,
            t_half: step.t_half,
            error: step.curve.as_ref().err().map(|e| e.to_string()),
            trace: info,
        });
        if truncated {
            eprintln!("stage {} truncated (T = {})", step.j, fmt2(step.t_half));
        }
    }
    let summary_path = a.out.join("summary.csv");
    emit_table(
        Some(&summary_path),
        &[
            "j", "s", "alpha", "beta", "gamma", "delta", "T", "rows", "truncated",
            "negative_last_index", "positive_last_index", "reason",
        ],
        &summary,
    )?;
    let mut outputs: Vec<&Path> = files.iter().map(|p| p.as_path()).collect();
    outputs.push(&summary_path);
    write_manifest(
        &a.out.join("manifest.json"),
        "deform",
        &cfg,
        &outputs,
        start.elapsed(),
        DeformDiagnostics { steps: infos },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce(a: ReproduceArgs) -> Result<ExitCode> {
    let checks = reproduce::run(a.suite, threads_from_env()?)?;
    if a.json {
        let text = serde_json::to_string_pretty(&checks)
            .map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
        println!("{text}");
    } else {
        println!("{:<8} {:<48} {:<24} {:<28} {:<10} status", "suite", "check", "expected", "got", "tol");
        for c in &checks {
            println!(
                "{:<8} {:<48} {:<24} {:<28} {:<10} {}",
                c.suite,
                c.name,
                c.expected,
                c.got,
                c.tol,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let failed = checks.iter().filter(|c| !c.pass).count();
        println!("{} checks, {} failed", checks.len(), failed);
    }
    Ok(if checks.iter().all(|c| c.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
