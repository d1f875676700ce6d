//! Discrete Laplace spectra of convex quadrilaterals on a 2x2 interior grid,
//! brute-force searches for nearly isospectral neighbours, and continuation
//! of isospectral curves.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod discretization;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod quartic;
pub mod search;
pub mod spectra;

pub use discretization::{assemble, kappa_legendre, DiscreteOperator, Discretization, Scheme, KAPPA_UNIFORM};
pub use error::{Error, Result};
pub use geometry::{Point, Quadrilateral};
pub use spectra::{charpoly_invariants, charpoly_with_gradient, eigenvalues, spectrum, Spectrum};
