//! 4x4 discretizations of the pulled-back operator on the reference square.
//!
//! Unknowns are the nodal values at the four interior nodes, ordered
//! `(k,k), (1-k,k), (k,1-k), (1-k,1-k)` (x index fastest). Homogeneous
//! Dirichlet data is built in: neither the stencils nor the collocation basis
//! carry boundary unknowns.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::geometry::{coefficients_generic, Point, Quadrilateral};
use crate::linalg::{kron2, Mat2, Mat4};

/// Grid parameter of the uniform grid `h = 1/3`.
pub const KAPPA_UNIFORM: f64 = 1.0 / 3.0;

/// Grid parameter whose interior nodes map to the zeros of `P3'` on `[-1, 1]`.
pub fn kappa_legendre() -> f64 {
    0.5 - 1.0 / (2.0 * 5f64.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Centered finite differences on the uniform grid.
    Fd,
    /// Degree-3 collocation on the `kappa` grid.
    Sp,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Fd => "fd",
            Scheme::Sp => "sp",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fd" => Ok(Scheme::Fd),
            "sp" => Ok(Scheme::Sp),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme {other:?} (expected fd or sp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub kappa: f64,
    /// `(0, kappa, 1 - kappa, 1)`, shared by both directions.
    pub coords: [f64; 4],
    pub interior: [Point; 4],
}

pub fn build_grid(kappa: f64) -> Result<Grid> {
    check_kappa(kappa)?;
    let (a, b) = (kappa, 1.0 - kappa);
    Ok(Grid {
        kappa,
        coords: [0.0, a, b, 1.0],
        interior: [
            Point::new(a, a),
            Point::new(b, a),
            Point::new(a, b),
            Point::new(b, b),
        ],
    })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa < 0.5 {
        Ok(())
    } else {
        Err(Error::KappaOutOfRange(kappa))
    }
}

/// Differentiation matrices acting on interior nodal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffMatrices {
    pub dxx: Mat4,
    pub dxy: Mat4,
    pub dyy: Mat4,
    pub dx: Mat4,
    pub dy: Mat4,
}

/// Centered differences for `h = 1/3`.
pub fn fd_matrices() -> DiffMatrices {
    let second: Mat2 = [[-18.0, 9.0], [9.0, -18.0]];
    let first: Mat2 = [[0.0, 1.5], [-1.5, 0.0]];
    tensor_matrices(&first, &second)
}

/// Derivatives of the two interior Lagrange polynomials `l1, l2` of degree 3
/// on the nodes `0, k, 1-k, 1`, evaluated at `(k, 1-k)`.
///
/// Returns `(d1, d2)` with `d1[i][j] = l_j'(node_i)` and `d2[i][j] = l_j''(node_i)`.
pub fn lagrange_derivatives(kappa: f64) -> Result<(Mat2, Mat2)> {
    check_kappa(kappa)?;
    let den = kappa * (kappa - 1.0) * (2.0 * kappa - 1.0);
    // l1 vanishes at 0, 1, 1-k; l2 at 0, 1, k (with an extra minus sign).
    let basis = [(1.0 - kappa, 1.0 / den), (kappa, -1.0 / den)];
    let nodes = [kappa, 1.0 - kappa];

    let mut d1 = [[0.0; 2]; 2];
    let mut d2 = [[0.0; 2]; 2];
    for (j, &(r, scale)) in basis.iter().enumerate() {
        // x (x - 1) (x - r) = x^3 - s1 x^2 + s2 x
        let s1 = 1.0 + r;
        let s2 = r;
        for (i, &x) in nodes.iter().enumerate() {
            d1[i][j] = scale * (3.0 * x * x - 2.0 * s1 * x + s2);
            d2[i][j] = scale * (6.0 * x - 2.0 * s1);
        }
    }
    Ok((d1, d2))
}

/// Collocation matrices for the tensor basis `l_i(x) l_j(y)`.
pub fn spectral_matrices(kappa: f64) -> Result<DiffMatrices> {
    let (d1, d2) = lagrange_derivatives(kappa)?;
    Ok(tensor_matrices(&d1, &d2))
}

fn tensor_matrices(first: &Mat2, second: &Mat2) -> DiffMatrices {
    let eye: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    DiffMatrices {
        dxx: kron2(&eye, second),
        dxy: kron2(first, first),
        dyy: kron2(second, &eye),
        dx: kron2(&eye, first),
        dy: kron2(first, &eye),
    }
}

/// A scheme/grid pair with its differentiation matrices precomputed, ready to
/// assemble operators for many quadrilaterals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub scheme: Scheme,
    pub grid: Grid,
    pub matrices: DiffMatrices,
}

impl Discretization {
    pub fn new(scheme: Scheme, kappa: f64) -> Result<Self> {
        let grid = build_grid(kappa)?;
        let matrices = match scheme {
            Scheme::Fd => {
                if (kappa - KAPPA_UNIFORM).abs() > 1e-12 {
                    return Err(Error::FdRequiresUniformGrid(kappa));
                }
                fd_matrices()
            }
            Scheme::Sp => spectral_matrices(kappa)?,
        };
        Ok(Discretization {
            scheme,
            grid,
            matrices,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.grid.kappa
    }

    pub fn assemble(&self, q: &Quadrilateral) -> Result<DiscreteOperator> {
        q.validate()?;
        let matrix = self.assemble_generic(q.to_array())?;
        Ok(DiscreteOperator {
            matrix,
            scheme: self.scheme,
            kappa: self.grid.kappa,
            source: *q,
        })
    }

    /// Operator matrix as a function of the shape parameters. No validity
    /// check beyond nonzero jacobian at the nodes.
    ///
    /// `L = F1 Dxx + F2 Dxy + F3 Dyy - F4 Dx - F5 Dy` with `Fi` diagonal.
    pub(crate) fn assemble_generic<T: Real>(&self, params: [T; 4]) -> Result<Mat4<T>> {
        let m = &self.matrices;
        let mut out = [[T::zero(); 4]; 4];
        for (i, node) in self.grid.interior.iter().enumerate() {
            let [f1, f2, f3, f4, f5] = coefficients_generic(params, node.x, node.y)?;
            for j in 0..4 {
                out[i][j] = f1.scale(m.dxx[i][j])
                    + f2.scale(m.dxy[i][j])
                    + f3.scale(m.dyy[i][j])
                    - f4.scale(m.dx[i][j])
                    - f5.scale(m.dy[i][j]);
            }
        }
        Ok(out)
    }
}

/// A 4x4 operator matrix together with how it was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteOperator {
    pub matrix: Mat4,
    pub scheme: Scheme,
    pub kappa: f64,
    pub source: Quadrilateral,
}

/// Assembles the discrete operator of `q`. The unit square gives a symmetric
/// positive definite matrix (the operator approximates `-Δ`).
pub fn assemble(q: &Quadrilateral, scheme: Scheme, kappa: f64) -> Result<DiscreteOperator> {
    Discretization::new(scheme, kappa)?.assemble(q)
}
