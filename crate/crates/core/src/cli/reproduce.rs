//! Reference checks: the published spectra, search statistics, curve
//! behaviour, area drift table and the singularity at the square.

use std::fmt;

use clap::ValueEnum;
use serde::Serialize;

use crate::continuation::{diagnose_start, trace, Curve, Method, Param, TraceConfig};
use crate::discretization::{kappa_legendre, Discretization, Scheme, KAPPA_UNIFORM};
use crate::error::Result;
use crate::geometry::Quadrilateral;
use crate::search::{run_search, SearchConfig};

pub const Q_STAR: Quadrilateral = Quadrilateral::new(-0.2, 1.1, 1.2, 1.3);

/// Bound on the largest deviation of the `M = 50` difference-quotient curve
/// from the `M = 1000` exact curve (measured 5.5e-4).
pub const FD_CONVERGENCE_BOUND: f64 = 1e-3;

/// Relative area drift `|c area - area*| / area*` along difference-quotient
/// curves from `Q_STAR`: `(beta, [M = 5, M = 10, M = 20])`.
pub const AREA_DRIFT: [(f64, [f64; 3]); 11] = [
    (1.040, [11.70e-4, 10.30e-4, 9.65e-4]),
    (1.052, [9.91e-4, 8.69e-4, 8.12e-4]),
    (1.064, [7.83e-4, 6.84e-4, 6.37e-4]),
    (1.076, [5.48e-4, 4.76e-4, 4.43e-4]),
    (1.088, [2.87e-4, 2.48e-4, 2.30e-4]),
    (1.100, [0.0, 0.0, 0.0]),
    (1.112, [1.53e-4, 1.89e-4, 2.07e-4]),
    (1.124, [3.09e-4, 3.85e-4, 4.25e-4]),
    (1.136, [4.67e-4, 5.89e-4, 6.54e-4]),
    (1.148, [6.26e-4, 8.00e-4, 8.92e-4]),
    (1.160, [7.86e-4, 10.19e-4, 11.42e-4]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Spectra,
    Search,
    Trace,
    Table1,
    Square,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().map(|v| v.get_name().to_string());
        f.write_str(&name.unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub expected: String,
    pub got: String,
    pub tol: String,
    pub pass: bool,
}

fn check(suite: Suite, name: &str, expected: String, got: String, tol: String, pass: bool) -> Check {
    Check {
        suite: suite.to_string(),
        name: name.to_string(),
        expected,
        got,
        tol,
        pass,
    }
}

fn tuple(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2}")).collect();
    format!("({})", parts.join(", "))
}

pub fn run(suite: Suite, threads: Option<usize>) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Spectra {
        out.extend(spectra()?);
    }
    if all || suite == Suite::Square {
        out.extend(square()?);
    }
    if all || suite == Suite::Trace {
        out.extend(curves()?);
    }
    if all || suite == Suite::Table1 {
        out.extend(area_drift()?);
    }
    if all || suite == Suite::Search {
        out.extend(search(threads)?);
    }
    Ok(out)
}

fn spectra() -> Result<Vec<Check>> {
    let sq = Quadrilateral::unit_square();
    let cases = [
        ("square fd", sq, Scheme::Fd, KAPPA_UNIFORM, [18.0, 36.0, 36.0, 54.0], 1e-9),
        ("square sp legendre", sq, Scheme::Sp, kappa_legendre(), [20.0, 40.0, 40.0, 60.0], 1e-6),
        ("star fd", Q_STAR, Scheme::Fd, KAPPA_UNIFORM, [12.54, 24.79, 25.43, 38.30], 0.005),
        ("star sp uniform", Q_STAR, Scheme::Sp, KAPPA_UNIFORM, [12.52, 24.63, 25.98, 38.05], 0.005),
        ("star sp legendre", Q_STAR, Scheme::Sp, kappa_legendre(), [13.92, 27.30, 28.59, 43.11], 0.005),
    ];
    let mut out = Vec::new();
    for (name, q, scheme, kappa, expected, tol) in cases {
        let got = Discretization::new(scheme, kappa)?.eigenvalues(&q)?;
        let dev = got
            .iter()
            .zip(expected)
            .map(|(g, e)| (g - e).abs())
            .fold(0.0, f64::max);
        out.push(check(
            Suite::Spectra,
            name,
            tuple(&expected),
            tuple(&got),
            format!("{tol:e}"),
            dev <= tol,
        ));
    }
    Ok(out)
}

fn square() -> Result<Vec<Check>> {
    let disc = Discretization::new(Scheme::Sp, KAPPA_UNIFORM)?;
    let mut out = Vec::new();
    let r = diagnose_start(&disc, &Quadrilateral::unit_square(), Param::Beta)?;
    out.push(check(
        Suite::Square,
        "square scaled determinant",
        "0".into(),
        format!("{:.3e}", r.scaled_determinant),
        "1e-8".into(),
        r.scaled_determinant <= 1e-8,
    ));
    out.push(check(
        Suite::Square,
        "square rank",
        "1".into(),
        r.rank.to_string(),
        "exact".into(),
        r.rank == 1,
    ));
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let g = 0.8 + 0.8 * i as f64 / 19.0;
        let q = Quadrilateral::new(0.0, 1.0, g, g);
        worst = worst.max(diagnose_start(&disc, &q, Param::Beta)?.scaled_determinant);
    }
    out.push(check(
        Suite::Square,
        "symmetric family scaled determinant (max of 20)",
        "0".into(),
        format!("{worst:.3e}"),
        "1e-8".into(),
        worst <= 1e-8,
    ));
    let r = diagnose_start(&disc, &Q_STAR, Param::Beta)?;
    out.push(check(
        Suite::Square,
        "star rank",
        "4".into(),
        r.rank.to_string(),
        "exact".into(),
        r.rank == 4,
    ));
    Ok(out)
}

/// Points of an untruncated two-branch curve at `t = k T / samples`,
/// `k = -samples..=samples`, as `(alpha, beta, gamma, delta, c)`.
pub fn sample_curve(curve: &Curve, steps: usize, samples: usize) -> Vec<[f64; 5]> {
    let stride = steps / samples;
    (0..=2 * samples)
        .map(|k| {
            let p = curve.points[k * stride].point;
            [p.alpha, p.beta, p.gamma, p.delta, p.c]
        })
        .collect()
}

/// Largest coordinate difference between two sampled curves.
pub fn max_deviation(a: &[[f64; 5]], b: &[[f64; 5]]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Sign changes of consecutive differences of `c` along one branch.
pub fn c_sign_changes(values: &[f64]) -> usize {
    let signs: Vec<f64> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn curve_cfg(method: Method, steps: usize) -> TraceConfig {
    TraceConfig {
        method,
        steps,
        ..TraceConfig::default()
    }
}

fn curves() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let exact = trace(&Q_STAR, &curve_cfg(Method::Exact, 100))?;
    let first = exact.points.first().map_or(f64::NAN, |p| p.residual_norm);
    let last = exact.points.last().map_or(f64::NAN, |p| p.residual_norm);
    out.push(check(
        Suite::Trace,
        "exact curve untruncated (201 points)",
        "201".into(),
        exact.points.len().to_string(),
        "exact".into(),
        exact.points.len() == 201 && !exact.is_truncated(),
    ));
    for (name, r) in [("residual at t = -T", first), ("residual at t = +T", last)] {
        out.push(check(
            Suite::Trace,
            name,
            "<= 1e-2".into(),
            format!("{r:.3e}"),
            "1e-2".into(),
            r <= 1e-2,
        ));
    }
    let s = exact.start_index();
    let c0 = exact.points[s].point.c;
    out.push(check(
        Suite::Trace,
        "c(0)",
        "1".into(),
        fmt_full(c0),
        "exact".into(),
        c0 == 1.0,
    ));
    let cs: Vec<f64> = exact.points.iter().map(|p| p.point.c).collect();
    let jump = cs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    out.push(check(
        Suite::Trace,
        "c(t) continuity (max step change)",
        "<= 1e-3".into(),
        format!("{jump:.3e}"),
        "1e-3".into(),
        jump <= 1e-3,
    ));
    let neg: Vec<f64> = cs[..=s].iter().rev().copied().collect();
    let pos = &cs[s..];
    for (name, branch) in [("c(t) monotone on t < 0", &neg[..]), ("c(t) monotone on t > 0", pos)] {
        let changes = c_sign_changes(branch);
        out.push(check(
            Suite::Trace,
            name,
            "0 sign changes of dc/dt".into(),
            format!("{changes} sign changes"),
            "exact".into(),
            changes == 0,
        ));
    }

    let reference = trace(&Q_STAR, &curve_cfg(Method::Exact, 1000))?;
    let ref_samples = sample_curve(&reference, 1000, 10);
    let exact_samples = sample_curve(&exact, 100, 10);
    let mut devs = Vec::new();
    for m in [10, 30, 50] {
        let fd = trace(&Q_STAR, &curve_cfg(Method::Fd, m))?;
        if fd.is_truncated() {
            devs.push(f64::INFINITY);
            continue;
        }
        devs.push(max_deviation(&sample_curve(&fd, m, 10), &ref_samples));
        if m == 50 {
            let d = max_deviation(&sample_curve(&fd, m, 10), &exact_samples);
            out.push(check(
                Suite::Trace,
                "fd M=50 vs exact M=100",
                "<= 5e-3".into(),
                format!("{d:.3e}"),
                "5e-3".into(),
                d <= 5e-3,
            ));
        }
    }
    out.push(check(
        Suite::Trace,
        "fd deviation decreasing in M (10, 30, 50)",
        "decreasing".into(),
        format!("({:.2e}, {:.2e}, {:.2e})", devs[0], devs[1], devs[2]),
        "strict".into(),
        devs[0] > devs[1] && devs[1] > devs[2],
    ));
    out.push(check(
        Suite::Trace,
        "fd M=50 vs exact M=1000",
        format!("<= {FD_CONVERGENCE_BOUND:e}"),
        format!("{:.3e}", devs[2]),
        format!("{FD_CONVERGENCE_BOUND:e}"),
        devs[2] <= FD_CONVERGENCE_BOUND,
    ));
    Ok(out)
}

fn fmt_full(x: f64) -> String {
    format!("{x}")
}

/// Relative area drift at the tabulated `beta` values for one step count.
pub fn area_drift_column(steps: usize) -> Result<Vec<(f64, f64)>> {
    let cfg = curve_cfg(Method::Fd, steps);
    let curve = trace(&Q_STAR, &cfg)?;
    let star_area = Q_STAR.area();
    let dt = cfg.step();
    let s = curve.start_index() as i64;
    AREA_DRIFT
        .iter()
        .map(|&(beta, _)| {
            let m = ((beta - Q_STAR.beta) / dt).round() as i64;
            let p = curve.points[(s + m) as usize].point;
            let area = p.c * p.quad().area();
            Ok((p.beta, (area - star_area).abs() / star_area))
        })
        .collect()
}

fn area_drift() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (col, steps) in [5, 10, 20].into_iter().enumerate() {
        let got = area_drift_column(steps)?;
        for (&(beta, expected), &(_, value)) in AREA_DRIFT.iter().zip(&got) {
            let expected = expected[col];
            let pass = if expected == 0.0 {
                value == 0.0
            } else {
                value >= expected / 2.0 && value <= expected * 2.0
            };
            out.push(check(
                Suite::Table1,
                &format!("M={steps} beta={beta:.3}"),
                format!("{expected:.3e}"),
                format!("{value:.3e}"),
                if expected == 0.0 { "exact".into() } else { "factor 2".into() },
                pass,
            ));
        }
    }
    Ok(out)
}

fn search(threads: Option<usize>) -> Result<Vec<Check>> {
    let res = run_search(&Q_STAR, &SearchConfig { threads, ..SearchConfig::default() })?;
    let n = res.stats.accepted;
    let mut out = vec![check(
        Suite::Search,
        "accepted count",
        "47 (band 40..=55)".into(),
        format!("{n} ({} distinct spectra)", res.stats.distinct_spectra),
        "band".into(),
        (40..=55).contains(&n),
    )];
    let star = res.candidates.iter().find(|c| c.quad == Q_STAR);
    out.push(check(
        Suite::Search,
        "reference accepted with err = 0",
        "0".into(),
        star.map_or("missing".into(), |c| format!("{:e}", c.err)),
        "exact".into(),
        star.is_some_and(|c| c.err == 0.0 && c.c == 1.0),
    ));
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let area = frac(res.stats.share_area);
    out.push(check(
        Suite::Search,
        "area-sharing fraction",
        ">= 0.90 (46/47)".into(),
        format!("{:.3} ({}/{n})", area, res.stats.share_area),
        "band".into(),
        area >= 0.9,
    ));
    let per = frac(res.stats.share_perimeter);
    out.push(check(
        Suite::Search,
        "perimeter-sharing fraction",
        "0.45..=0.80 (29/47)".into(),
        format!("{:.3} ({}/{n})", per, res.stats.share_perimeter),
        "band".into(),
        (0.45..=0.80).contains(&per),
    ));
    Ok(out)
}
