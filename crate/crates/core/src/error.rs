use thiserror::Error;

/// Errors produced by the geometric, spectral and continuation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("InvalidQuadrilateral: jacobian {sigma} is not positive at reference corner ({x}, {y})")]
    InvalidQuadrilateral { x: f64, y: f64, sigma: f64 },

    #[error("DegenerateJacobian: |sigma| = {sigma:e} at ({x}, {y})")]
    DegenerateJacobian { x: f64, y: f64, sigma: f64 },

    #[error("NonPositiveFactor: homothety factor must be > 0, got {0}")]
    NonPositiveFactor(f64),

    #[error("KappaOutOfRange: kappa must satisfy 0 < kappa < 1/2, got {0}")]
    KappaOutOfRange(f64),

    #[error("the finite difference scheme is only defined on the uniform grid (kappa = 1/3), got kappa = {0}")]
    FdRequiresUniformGrid(f64),

    #[error("ComplexSpectrum: imaginary part {imag:e} exceeds tolerance {tol:e}")]
    ComplexSpectrum { imag: f64, tol: f64 },

    #[error("BifurcationDetected: scaled determinant {scaled_det:e} below threshold {tol:e}")]
    BifurcationDetected { scaled_det: f64, tol: f64 },

    #[error("InvalidStep: need 0 < h <= l, got h = {h}, l = {l}")]
    InvalidStep { h: f64, l: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
