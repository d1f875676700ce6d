//! Eigenvalues and characteristic-polynomial invariants of the 4x4 operators.
//!
//! The invariants `xi[k] = e_{4-k}(lambda)` are the elementary symmetric
//! functions of the eigenvalues, so that
//! `q(z) = z^4 - xi[3] z^3 + xi[2] z^2 - xi[1] z + xi[0]`.
//! They are computed straight from matrix traces (Faddeev-LeVerrier), which
//! also works over dual numbers and gives their exact shape gradients.

use std::f64::consts::PI;

use crate::discretization::{DiscreteOperator, Discretization, Scheme};
use crate::dual::{Dual4, Real};
use crate::error::{Error, Result};
use crate::geometry::Quadrilateral;
use crate::linalg::{mat_mul, trace, Mat4};
use crate::quartic::monic_quartic_roots;

/// Relative bound on discarded imaginary parts.
pub const IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    /// Ascending eigenvalues.
    pub lambdas: [f64; 4],
    /// `xi[k] = e_{4-k}(lambdas)`.
    pub xi: [f64; 4],
}

/// Invariants and their partials `grad[k][p] = d xi[k] / d param[p]`,
/// params ordered `(alpha, beta, gamma, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantGradient {
    pub xi: [f64; 4],
    pub grad: [[f64; 4]; 4],
}

/// Faddeev-LeVerrier recursion, returning `xi` (not the raw coefficients).
pub(crate) fn invariants_generic<T: Real>(a: &Mat4<T>) -> [T; 4] {
    let mut coeff = [T::zero(); 4]; // det(zI - A) = z^4 + c3 z^3 + c2 z^2 + c1 z + c0
    let mut m = [[T::zero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::from_f64(1.0);
    }
    for k in 1..=4 {
        let am = mat_mul(a, &m);
        let c = -trace(&am).scale(1.0 / k as f64);
        coeff[4 - k] = c;
        if k < 4 {
            m = am;
            for (i, row) in m.iter_mut().enumerate() {
                row[i] += c;
            }
        }
    }
    [coeff[0], -coeff[1], coeff[2], -coeff[3]]
}

pub fn charpoly_invariants(op: &DiscreteOperator) -> [f64; 4] {
    invariants_generic(&op.matrix)
}

/// `q(z)` for the given invariants.
pub fn charpoly_eval(xi: &[f64; 4], z: f64) -> f64 {
    (((z - xi[3]) * z + xi[2]) * z - xi[1]) * z + xi[0]
}

/// `xi` from a list of eigenvalues (`xi[k] = e_{4-k}`).
pub fn elementary_symmetric(lambdas: &[f64; 4]) -> [f64; 4] {
    // e[j] holds e_j of the values consumed so far
    let mut e = [1.0, 0.0, 0.0, 0.0, 0.0];
    for &l in lambdas {
        for j in (1..=4).rev() {
            e[j] += l * e[j - 1];
        }
    }
    [e[4], e[3], e[2], e[1]]
}

/// Real roots of `q`, ascending.
pub fn roots_from_invariants(xi: &[f64; 4]) -> Result<[f64; 4]> {
    let roots = monic_quartic_roots([xi[0], -xi[1], xi[2], -xi[3]]);
    let max_abs = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let imag = roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let tol = IMAG_TOL * max_abs;
    if imag > tol {
        return Err(Error::ComplexSpectrum { imag, tol });
    }
    let mut lambdas = roots.map(|z| z.re);
    lambdas.sort_by(f64::total_cmp);
    Ok(lambdas)
}

pub fn eigenvalues(op: &DiscreteOperator) -> Result<[f64; 4]> {
    roots_from_invariants(&charpoly_invariants(op))
}

pub fn spectrum(op: &DiscreteOperator) -> Result<Spectrum> {
    let xi = charpoly_invariants(op);
    Ok(Spectrum {
        lambdas: roots_from_invariants(&xi)?,
        xi,
    })
}

impl Discretization {
    pub fn spectrum(&self, q: &Quadrilateral) -> Result<Spectrum> {
        spectrum(&self.assemble(q)?)
    }

    pub fn eigenvalues(&self, q: &Quadrilateral) -> Result<[f64; 4]> {
        eigenvalues(&self.assemble(q)?)
    }

    pub fn invariants(&self, q: &Quadrilateral) -> Result<[f64; 4]> {
        Ok(charpoly_invariants(&self.assemble(q)?))
    }

    /// Runs assembly and the trace recursion over dual numbers.
    pub fn invariants_with_gradient(&self, q: &Quadrilateral) -> Result<InvariantGradient> {
        q.validate()?;
        let params: [Dual4; 4] = std::array::from_fn(|i| Dual4::variable(q.to_array()[i], i));
        let matrix = self.assemble_generic(params)?;
        let xi = invariants_generic(&matrix);
        Ok(InvariantGradient {
            xi: xi.map(|d| d.value),
            grad: xi.map(|d| d.partials),
        })
    }
}

pub fn charpoly_with_gradient(
    q: &Quadrilateral,
    scheme: Scheme,
    kappa: f64,
) -> Result<InvariantGradient> {
    Discretization::new(scheme, kappa)?.invariants_with_gradient(q)
}

/// First `count` Dirichlet eigenvalues `pi^2 (m^2 + n^2)` of the unit square,
/// with multiplicity.
pub fn continuous_square_eigenvalues(count: usize) -> Vec<f64> {
    let mut sums: Vec<usize> = (1..=count)
        .flat_map(|m| (1..=count).map(move |n| m * m + n * n))
        .collect();
    sums.sort_unstable();
    sums.truncate(count);
    sums.into_iter().map(|s| PI * PI * s as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, kappa_legendre, KAPPA_UNIFORM};

    const Q_STAR: Quadrilateral = Quadrilateral::new(-0.2, 1.1, 1.2, 1.3);

    fn assert_close(got: &[f64], expected: &[f64], tol: f64) {
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() <= tol, "{got:?} vs {expected:?}");
        }
    }

    #[test]
    fn unit_square_spectra() {
        let sq = Quadrilateral::unit_square();
        let fd = eigenvalues(&assemble(&sq, Scheme::Fd, KAPPA_UNIFORM).unwrap()).unwrap();
        assert_close(&fd, &[18.0, 36.0, 36.0, 54.0], 1e-9);
        let sp = eigenvalues(&assemble(&sq, Scheme::Sp, kappa_legendre()).unwrap()).unwrap();
        assert_close(&sp, &[20.0, 40.0, 40.0, 60.0], 1e-6);
    }

    #[test]
    fn q_star_spectra() {
        let cases = [
            (Scheme::Fd, KAPPA_UNIFORM, [12.54, 24.79, 25.43, 38.30]),
            (Scheme::Sp, KAPPA_UNIFORM, [12.52, 24.63, 25.98, 38.05]),
            (Scheme::Sp, kappa_legendre(), [13.92, 27.30, 28.59, 43.11]),
        ];
        for (scheme, kappa, expected) in cases {
            let l = eigenvalues(&assemble(&Q_STAR, scheme, kappa).unwrap()).unwrap();
            assert_close(&l, &expected, 0.005);
        }
    }

    #[test]
    fn q_star_invariants() {
        let xi = charpoly_invariants(&assemble(&Q_STAR, Scheme::Sp, KAPPA_UNIFORM).unwrap());
        let expected = [304819.78, 56468.45, 3675.65, 101.18];
        for (g, e) in xi.iter().zip(expected) {
            assert!(((g - e) / e).abs() < 1e-4, "{xi:?}");
        }
    }

    #[test]
    fn unit_square_invariants() {
        let op = assemble(&Quadrilateral::unit_square(), Scheme::Fd, KAPPA_UNIFORM).unwrap();
        let xi = charpoly_invariants(&op);
        assert_eq!(xi, elementary_symmetric(&[18.0, 36.0, 36.0, 54.0]));
        assert_eq!(xi[3], 144.0);
        assert_eq!(xi[0], 1_259_712.0);
    }

    #[test]
    fn trace_is_xi3() {
        let op = assemble(&Quadrilateral::new(0.1, 0.9, 1.3, 1.1), Scheme::Sp, 0.3).unwrap();
        let xi = charpoly_invariants(&op);
        assert!((xi[3] - trace(&op.matrix)).abs() < 1e-12);
    }

    #[test]
    fn invariants_match_eigenvalues() {
        let op = assemble(&Q_STAR, Scheme::Sp, KAPPA_UNIFORM).unwrap();
        let s = spectrum(&op).unwrap();
        let from_roots = elementary_symmetric(&s.lambdas);
        for (a, b) in s.xi.iter().zip(from_roots) {
            assert!(((a - b) / a).abs() < 1e-8);
        }
        for l in s.lambdas {
            assert!(charpoly_eval(&s.xi, l).abs() <= 1e-6 * s.xi[0]);
        }
    }

    #[test]
    fn complex_spectrum_is_reported() {
        // rotation-like matrix: eigenvalues 1 +- i, 2, 3
        let xi = elementary_symmetric(&[2.0, 3.0, 0.0, 0.0]);
        // (z^2 - 2z + 2)(z - 2)(z - 3) expanded through its invariants
        let poly = [12.0, -22.0, 17.0, -7.0];
        let xi_complex = [poly[0], -poly[1], poly[2], -poly[3]];
        assert!(roots_from_invariants(&xi).is_ok());
        assert!(matches!(
            roots_from_invariants(&xi_complex),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn gradient_values_match_plain_pipeline() {
        let disc = Discretization::new(Scheme::Sp, KAPPA_UNIFORM).unwrap();
        let g = disc.invariants_with_gradient(&Q_STAR).unwrap();
        let plain = disc.invariants(&Q_STAR).unwrap();
        for (a, b) in g.xi.iter().zip(plain) {
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangle_gradient_along_height() {
        // On a beta-rectangle the operator separates: lambda = a_i + b_j / beta^2
        // with (a, b) the 1D eigenvalues {9, 27} (times the same for y).
        let beta = 1.4;
        let q = Quadrilateral::new(0.0, beta, 1.0, beta);
        let g = charpoly_with_gradient(&q, Scheme::Fd, KAPPA_UNIFORM).unwrap();
        let one_d = [9.0, 27.0];
        let lambdas_at = |b: f64| {
            let mut l = [0.0; 4];
            let mut k = 0;
            for ax in one_d {
                for ay in one_d {
                    l[k] = ax + ay / (b * b);
                    k += 1;
                }
            }
            l
        };
        let closed_form = elementary_symmetric(&lambdas_at(beta));
        for (a, b) in g.xi.iter().zip(closed_form) {
            assert!(((a - b) / b).abs() < 1e-12);
        }
        // d/dbeta of the closed form by central differences
        let h = 1e-6;
        let up = elementary_symmetric(&lambdas_at(beta + h));
        let dn = elementary_symmetric(&lambdas_at(beta - h));
        for k in 0..4 {
            let fd = (up[k] - dn[k]) / (2.0 * h);
            // raising the rectangle moves both beta and delta
            let along = g.grad[k][1] + g.grad[k][3];
            assert!(((along - fd) / fd).abs() < 1e-7, "k={k}");
        }
    }

    #[test]
    fn continuous_square() {
        let pi2 = PI * PI;
        assert_eq!(continuous_square_eigenvalues(1), vec![2.0 * pi2]);
        assert_close(
            &continuous_square_eigenvalues(4),
            &[19.74, 49.35, 49.35, 78.96],
            0.005,
        );
        let five = continuous_square_eigenvalues(5);
        assert_eq!(five[4], 10.0 * pi2);
        assert_eq!(continuous_square_eigenvalues(6)[5], 10.0 * pi2);
    }
}
