//! Continuation of one-parameter families of isospectral quadrilaterals.
//!
//! A curve point carries the shape parameters and a homothety factor `c`;
//! the traced family satisfies `lambda(P) = c * lambda*`, i.e.
//! `xi_k(P) = c^(4-k) xi*_k`. One shape parameter is advanced linearly in
//! `t`, the other three and `c` follow from the implicit function theorem,
//! integrated with explicit Euler steps of fixed size.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{Discretization, Scheme, KAPPA_UNIFORM};
use crate::error::{Error, Result};
use crate::geometry::{Point, Quadrilateral};
use crate::linalg::{det, scaled_det, singular_values, solve, Mat4};

/// Relative rank threshold for [`diagnose_singularity`].
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Alpha,
    #[default]
    Beta,
    Gamma,
    Delta,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::Alpha, Param::Beta, Param::Gamma, Param::Delta];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The three remaining shape parameters, in `(alpha, beta, gamma, delta)` order.
    pub fn others(self) -> [usize; 3] {
        let mut out = [0; 3];
        let mut n = 0;
        for i in 0..4 {
            if i != self.index() {
                out[n] = i;
                n += 1;
            }
        }
        out
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Gamma => "gamma",
            Param::Delta => "delta",
        })
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(Param::Alpha),
            "beta" => Ok(Param::Beta),
            "gamma" => Ok(Param::Gamma),
            "delta" => Ok(Param::Delta),
            other => Err(Error::InvalidArgument(format!("unknown parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact derivatives of the invariants (dual numbers).
    #[default]
    Exact,
    /// Difference quotients of the eigenvalues.
    Fd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Fd => "fd",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "fd" => Ok(Method::Fd),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difference {
    #[default]
    Forward,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
}

impl CurvePoint {
    pub fn new(quad: Quadrilateral, c: f64) -> Self {
        CurvePoint {
            alpha: quad.alpha,
            beta: quad.beta,
            gamma: quad.gamma,
            delta: quad.delta,
            c,
        }
    }

    /// Curve start: `c = 1`.
    pub fn start(quad: Quadrilateral) -> Self {
        CurvePoint::new(quad, 1.0)
    }

    pub fn quad(&self) -> Quadrilateral {
        Quadrilateral::new(self.alpha, self.beta, self.gamma, self.delta)
    }

    fn params(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    fn with_params(params: [f64; 4], c: f64) -> Self {
        CurvePoint::new(Quadrilateral::from_array(params), c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::NonPositiveFactor(self.c));
        }
        self.quad().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub explicit_param: Param,
    /// Half range `T` of the curve parameter.
    #[serde(rename = "T")]
    pub t_half: f64,
    /// Steps `M` per branch.
    #[serde(rename = "M")]
    pub steps: usize,
    pub method: Method,
    pub fd_increment: f64,
    pub difference: Difference,
    /// Relative determinant threshold (`|det| / prod(row norms)`).
    pub singular_tol: f64,
    pub scheme: Scheme,
    pub kappa: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            explicit_param: Param::Beta,
            t_half: 0.06,
            steps: 100,
            method: Method::Exact,
            fd_increment: 1e-6,
            difference: Difference::Forward,
            singular_tol: 1e-12,
            scheme: Scheme::Sp,
            kappa: KAPPA_UNIFORM,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_half > 0.0 && self.t_half.is_finite()) {
            return Err(Error::InvalidArgument(format!("T must be > 0, got {}", self.t_half)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("M must be >= 1".into()));
        }
        if self.method == Method::Fd && !(self.fd_increment > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "fd_increment must be > 0, got {}",
                self.fd_increment
            )));
        }
        if !(self.singular_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "singular_tol must be >= 0, got {}",
                self.singular_tol
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.t_half / self.steps as f64
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Discretization::new(self.scheme, self.kappa)
    }
}

/// `F_k = xi_k(P) - c^(4-k) xi*_k`.
pub fn residuals(disc: &Discretization, p: &CurvePoint, xi_star: &[f64; 4]) -> Result<[f64; 4]> {
    let xi = disc.invariants(&p.quad())?;
    Ok(std::array::from_fn(|k| xi[k] - p.c.powi(4 - k as i32) * xi_star[k]))
}

/// `||F|| / ||xi*||`.
pub fn residual_norm(disc: &Discretization, p: &CurvePoint, xi_star: &[f64; 4]) -> Result<f64> {
    let f = residuals(disc, p, xi_star)?;
    Ok(norm(&f) / norm(xi_star))
}

fn norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Tangent linear system `J u = rhs` at a curve point. Unknowns are the
/// derivatives of the three non-explicit shape parameters (in natural order)
/// followed by `c'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentSystem {
    pub matrix: Mat4,
    pub rhs: [f64; 4],
    pub explicit_param: Param,
}

impl TangentSystem {
    pub fn scaled_det(&self) -> f64 {
        scaled_det(&self.matrix)
    }

    pub fn solve(&self, singular_tol: f64) -> Result<Tangent> {
        let sd = self.scaled_det();
        if !(sd >= singular_tol) {
            return Err(Error::BifurcationDetected {
                scaled_det: sd,
                tol: singular_tol,
            });
        }
        let u = solve(&self.matrix, &self.rhs).ok_or(Error::BifurcationDetected {
            scaled_det: 0.0,
            tol: singular_tol,
        })?;
        let mut shape = [0.0; 4];
        shape[self.explicit_param.index()] = 1.0;
        for (slot, &i) in self.explicit_param.others().iter().enumerate() {
            shape[i] = u[slot];
        }
        Ok(Tangent { shape, c: u[3] })
    }
}

/// Derivative of a curve point with respect to `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    /// `(alpha', beta', gamma', delta')`, with 1 at the explicit parameter.
    pub shape: [f64; 4],
    pub c: f64,
}

/// System built from exact invariant gradients.
pub fn exact_system(
    disc: &Discretization,
    p: &CurvePoint,
    xi_star: &[f64; 4],
    explicit: Param,
) -> Result<TangentSystem> {
    let g = disc.invariants_with_gradient(&p.quad())?;
    let others = explicit.others();
    let mut matrix = [[0.0; 4]; 4];
    let mut rhs = [0.0; 4];
    for k in 0..4 {
        for (slot, &i) in others.iter().enumerate() {
            matrix[k][slot] = g.grad[k][i];
        }
        let e = 4 - k as i32;
        matrix[k][3] = -(e as f64) * p.c.powi(e - 1) * xi_star[k];
        rhs[k] = -g.grad[k][explicit.index()];
    }
    Ok(TangentSystem {
        matrix,
        rhs,
        explicit_param: explicit,
    })
}

pub fn tangent_exact(
    disc: &Discretization,
    p: &CurvePoint,
    xi_star: &[f64; 4],
    explicit: Param,
    singular_tol: f64,
) -> Result<Tangent> {
    exact_system(disc, p, xi_star, explicit)?.solve(singular_tol)
}

/// `d[i][j] = d lambda_i / d param_j` by difference quotients of the sorted
/// eigenvalues.
pub fn eigen_derivatives_fd(
    disc: &Discretization,
    quad: &Quadrilateral,
    increment: f64,
    difference: Difference,
) -> Result<[[f64; 4]; 4]> {
    if !(increment > 0.0 && increment.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "difference increment must be > 0, got {increment}"
        )));
    }
    let base = quad.to_array();
    let eig_at = |j: usize, shift: f64| {
        let mut p = base;
        p[j] += shift;
        disc.eigenvalues(&Quadrilateral::from_array(p))
    };
    let center = disc.eigenvalues(quad)?;
    let mut d = [[0.0; 4]; 4];
    for j in 0..4 {
        let (up, down, width) = match difference {
            Difference::Forward => (eig_at(j, increment)?, center, increment),
            Difference::Central => (eig_at(j, increment)?, eig_at(j, -increment)?, 2.0 * increment),
        };
        for i in 0..4 {
            d[i][j] = (up[i] - down[i]) / width;
        }
    }
    Ok(d)
}

/// System from eigenvalue difference quotients: rows `c dlambda_i/dp` over
/// the non-explicit parameters, last column `-lambda_i`, right side
/// `-c dlambda_i/d(explicit)`.
pub fn fd_system(
    disc: &Discretization,
    p: &CurvePoint,
    explicit: Param,
    increment: f64,
    difference: Difference,
) -> Result<TangentSystem> {
    let quad = p.quad();
    let lambdas = disc.eigenvalues(&quad)?;
    let d = eigen_derivatives_fd(disc, &quad, increment, difference)?;
    let others = explicit.others();
    let mut matrix = [[0.0; 4]; 4];
    let mut rhs = [0.0; 4];
    for i in 0..4 {
        for (slot, &j) in others.iter().enumerate() {
            matrix[i][slot] = p.c * d[i][j];
        }
        matrix[i][3] = -lambdas[i];
        rhs[i] = -p.c * d[i][explicit.index()];
    }
    Ok(TangentSystem {
        matrix,
        rhs,
        explicit_param: explicit,
    })
}

fn system_for(
    disc: &Discretization,
    p: &CurvePoint,
    xi_star: &[f64; 4],
    cfg: &TraceConfig,
) -> Result<TangentSystem> {
    match cfg.method {
        Method::Exact => exact_system(disc, p, xi_star, cfg.explicit_param),
        Method::Fd => fd_system(disc, p, cfg.explicit_param, cfg.fd_increment, cfg.difference),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub point: CurvePoint,
    /// `||F|| / ||xi*||` with respect to the start invariants.
    pub residual_norm: f64,
    /// Scaled determinant of the tangent system at this point (NaN if it
    /// could not be formed).
    pub scaled_det: f64,
}

/// Where and why a branch stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    /// Step index `m` of the last valid point on the branch.
    pub last_valid_index: usize,
    pub t: f64,
    pub reason: Error,
}

/// One signed branch, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub points: Vec<TracePoint>,
    pub truncation: Option<Truncation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Both branches merged in ascending `t`; the start appears once.
    pub points: Vec<TracePoint>,
    pub negative: Option<Truncation>,
    pub positive: Option<Truncation>,
}

impl Curve {
    pub fn is_truncated(&self) -> bool {
        self.negative.is_some() || self.positive.is_some()
    }

    /// Index into `points` of the start (`t = 0`).
    pub fn start_index(&self) -> usize {
        self.points.iter().position(|p| p.t == 0.0).unwrap_or(0)
    }

    /// Row flags: set on the last valid point of each truncated branch.
    pub fn truncation_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.points.len()];
        let start = self.start_index();
        if let Some(tr) = &self.negative {
            flags[start - tr.last_valid_index] = true;
        }
        if let Some(tr) = &self.positive {
            flags[start + tr.last_valid_index] = true;
        }
        flags
    }
}

/// Traces one branch with `t` running from 0 to `sign * T`.
pub fn trace_branch(
    disc: &Discretization,
    start: &CurvePoint,
    xi_star: &[f64; 4],
    cfg: &TraceConfig,
    sign: f64,
) -> Result<Branch> {
    cfg.validate()?;
    start.validate()?;
    let dt = sign * cfg.step();
    let e = cfg.explicit_param.index();
    let e0 = start.params()[e];

    let mut points = Vec::with_capacity(cfg.steps + 1);
    let mut current = *start;
    let mut system = system_for(disc, &current, xi_star, cfg);
    points.push(TracePoint {
        t: 0.0,
        point: current,
        residual_norm: residual_norm(disc, &current, xi_star)?,
        scaled_det: system.as_ref().map_or(f64::NAN, |s| s.scaled_det()),
    });

    for m in 0..cfg.steps {
        let truncate = |reason: Error| Truncation {
            last_valid_index: m,
            t: m as f64 * dt,
            reason,
        };
        let tangent = match system.and_then(|s| s.solve(cfg.singular_tol)) {
            Ok(tangent) => tangent,
            Err(err) => {
                return Ok(Branch {
                    points,
                    truncation: Some(truncate(err)),
                })
            }
        };
        let t = (m + 1) as f64 * dt;
        let mut params = current.params();
        for (value, d) in params.iter_mut().zip(tangent.shape) {
            *value += dt * d;
        }
        // explicit coordinate follows its schedule without accumulated rounding
        params[e] = e0 + t;
        let next = CurvePoint::with_params(params, current.c + dt * tangent.c);
        let evaluated = next
            .validate()
            .and_then(|_| residual_norm(disc, &next, xi_star));
        let residual = match evaluated {
            Ok(r) => r,
            Err(err) => {
                return Ok(Branch {
                    points,
                    truncation: Some(truncate(err)),
                })
            }
        };
        current = next;
        system = system_for(disc, &current, xi_star, cfg);
        points.push(TracePoint {
            t,
            point: current,
            residual_norm: residual,
            scaled_det: system.as_ref().map_or(f64::NAN, |s| s.scaled_det()),
        });
    }
    Ok(Branch {
        points,
        truncation: None,
    })
}

/// Traces both branches of the curve through `start`, targeting its own
/// invariants.
pub fn trace(start: &Quadrilateral, cfg: &TraceConfig) -> Result<Curve> {
    let disc = cfg.discretization()?;
    let xi_star = disc.invariants(start)?;
    trace_from(&disc, &CurvePoint::start(*start), &xi_star, cfg)
}

pub fn trace_from(
    disc: &Discretization,
    start: &CurvePoint,
    xi_star: &[f64; 4],
    cfg: &TraceConfig,
) -> Result<Curve> {
    if cfg.method == Method::Fd {
        // the eigenvalue system needs a real spectrum at the start
        disc.eigenvalues(&start.quad())?;
    }
    let neg = trace_branch(disc, start, xi_star, cfg, -1.0)?;
    let pos = trace_branch(disc, start, xi_star, cfg, 1.0)?;
    let mut points: Vec<TracePoint> = neg.points.into_iter().skip(1).rev().collect();
    points.extend(pos.points);
    Ok(Curve {
        points,
        negative: neg.truncation,
        positive: pos.truncation,
    })
}

pub fn trace_exact(start: &Quadrilateral, cfg: &TraceConfig) -> Result<Curve> {
    trace(start, &TraceConfig { method: Method::Exact, ..*cfg })
}

pub fn trace_fd(start: &Quadrilateral, cfg: &TraceConfig) -> Result<Curve> {
    trace(start, &TraceConfig { method: Method::Fd, ..*cfg })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityReport {
    pub determinant: f64,
    /// `|det| / prod(row norms)`.
    pub scaled_determinant: f64,
    /// Singular values above `RANK_TOL * largest`.
    pub rank: usize,
    pub singular_values: [f64; 4],
}

/// Determinant and numerical rank of the exact tangent system at `p`.
pub fn diagnose_singularity(
    disc: &Discretization,
    p: &CurvePoint,
    xi_star: &[f64; 4],
    explicit: Param,
) -> Result<SingularityReport> {
    let system = exact_system(disc, p, xi_star, explicit)?;
    Ok(report(&system.matrix))
}

fn report(matrix: &Mat4) -> SingularityReport {
    let sv = singular_values(matrix);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * sv[0]).count();
    SingularityReport {
        determinant: det(matrix),
        scaled_determinant: scaled_det(matrix),
        rank,
        singular_values: sv,
    }
}

/// Singularity report of a quadrilateral as a curve start (`c = 1`, its own
/// invariants as target).
pub fn diagnose_start(
    disc: &Discretization,
    quad: &Quadrilateral,
    explicit: Param,
) -> Result<SingularityReport> {
    let xi = disc.invariants(quad)?;
    diagnose_singularity(disc, &CurvePoint::start(*quad), &xi, explicit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationStep {
    pub j: usize,
    pub s: f64,
    pub quad: Quadrilateral,
    pub t_half: f64,
    pub curve: Result<Curve>,
}

/// Moves `V3, V4` linearly toward the unit square in `steps` equal stages
/// (the square itself excluded) and traces each intermediate domain's own
/// curve with half range `t0 / (1 + 2 s_j)`.
pub fn deformation_study(
    q_star: &Quadrilateral,
    steps: usize,
    t0: f64,
    cfg: &TraceConfig,
) -> Result<Vec<DeformationStep>> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("S must be > 1, got {steps}")));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidArgument(format!("T0 must be > 0, got {t0}")));
    }
    q_star.validate()?;
    let target = Quadrilateral::unit_square().to_array();
    let start = q_star.to_array();
    Ok((0..steps)
        .into_par_iter()
        .map(|j| {
            let s = j as f64 / steps as f64;
            let quad = Quadrilateral::from_array(std::array::from_fn(|i| {
                (1.0 - s) * start[i] + s * target[i]
            }));
            let t_half = t0 / (1.0 + 2.0 * s);
            let curve = trace(&quad, &TraceConfig { t_half, ..*cfg });
            DeformationStep {
                j,
                s,
                quad,
                t_half,
                curve,
            }
        })
        .collect())
}

/// Area of the domain represented by a curve point, i.e. `c * area(P)`:
/// the quadrilateral rescaled by `sqrt(c)` is the one whose spectrum matches
/// the start.
pub fn scaled_area(p: &CurvePoint) -> f64 {
    p.c * p.quad().area()
}

/// Vertices of the `sqrt(c)`-scaled domain.
pub fn scaled_vertices(p: &CurvePoint) -> Result<[Point; 4]> {
    p.quad().scale(p.c)
}
