//! Fixed-size 4x4 helpers. Everything here is allocation free and
//! deterministic.

use crate::dual::Real;

pub type Mat4<T = f64> = [[T; 4]; 4];
pub type Mat2 = [[f64; 2]; 2];

pub fn zeros<T: Real>() -> Mat4<T> {
    [[T::zero(); 4]; 4]
}

pub fn identity() -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mat_mul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = zeros::<T>();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = a[i][0] * b[0][j];
            for k in 1..4 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn trace<T: Real>(a: &Mat4<T>) -> T {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = a[i][j];
        }
    }
    t
}

/// Kronecker product `outer ⊗ inner`; the inner factor indexes fastest.
pub fn kron2(outer: &Mat2, inner: &Mat2) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i1, orow) in outer.iter().enumerate() {
        for (j1, &o) in orow.iter().enumerate() {
            for (i2, irow) in inner.iter().enumerate() {
                for (j2, &v) in irow.iter().enumerate() {
                    m[2 * i1 + i2][2 * j1 + j2] = o * v;
                }
            }
        }
    }
    m
}

pub fn row_norms(a: &Mat4) -> [f64; 4] {
    a.map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Gaussian elimination with partial pivoting. Returns `None` on an exactly
/// zero pivot.
pub fn solve(a: &Mat4, b: &[f64; 4]) -> Option<[f64; 4]> {
    let mut m = *a;
    let mut rhs = *b;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}

/// Determinant through the pivoted LU factorization.
pub fn det(a: &Mat4) -> f64 {
    let mut m = *a;
    let mut d = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(col, pivot);
            d = -d;
        }
        d *= m[col][col];
        for row in col + 1..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    d
}

/// `|det(a)| / prod(row norms)`, in `[0, 1]` by Hadamard's inequality.
pub fn scaled_det(a: &Mat4) -> f64 {
    let norms = row_norms(a);
    let denom: f64 = norms.iter().product();
    if denom == 0.0 {
        return 0.0;
    }
    det(a).abs() / denom
}

/// Singular values in descending order (one-sided Jacobi).
///
/// Small singular values keep high relative accuracy, unlike the
/// eigenvalues of `aᵀa`.
pub fn singular_values(a: &Mat4) -> [f64; 4] {
    // columns of `u` are rotated until mutually orthogonal
    let mut u = transpose(a);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..3 {
            for q in p + 1..4 {
                let alpha: f64 = u[p].iter().map(|v| v * v).sum();
                let beta: f64 = u[q].iter().map(|v| v * v).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..4 {
                    let up = u[p][k];
                    let uq = u[q][k];
                    u[p][k] = c * up - s * uq;
                    u[q][k] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = u.map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt());
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Mat4 = [
        [4.0, -2.0, 1.0, 0.5],
        [3.0, 6.0, -4.0, 2.0],
        [2.0, 1.0, 8.0, -1.0],
        [-1.0, 0.5, 2.0, 5.0],
    ];

    fn mat_vec(a: &Mat4, x: &[f64; 4]) -> [f64; 4] {
        a.map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
    }

    #[test]
    fn solve_recovers_rhs() {
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let b = mat_vec(&A, &x_true);
        let x = solve(&A, &b).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn solve_needs_pivoting() {
        let a = [
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 2.0],
            [0.0, 0.0, 3.0, 0.0],
        ];
        assert_eq!(solve(&a, &[1.0, 2.0, 4.0, 9.0]), Some([2.0, 1.0, 3.0, 2.0]));
        assert_eq!(det(&a), 6.0);
    }

    #[test]
    fn singular_matrix() {
        let mut a = A;
        a[3] = a[0];
        assert!(det(&a).abs() < 1e-12);
        let sv = singular_values(&a);
        assert!(sv[3] < 1e-14 * sv[0]);
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        fn det3(m: [[f64; 3]; 3]) -> f64 {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        let mut expected = 0.0;
        for j in 0..4 {
            let mut minor = [[0.0; 3]; 3];
            for r in 1..4 {
                let mut cc = 0;
                for c in 0..4 {
                    if c != j {
                        minor[r - 1][cc] = A[r][c];
                        cc += 1;
                    }
                }
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            expected += sign * A[0][j] * det3(minor);
        }
        assert!((det(&A) - expected).abs() < 1e-10 * expected.abs());
    }

    #[test]
    fn singular_values_of_diagonal_and_rank_one() {
        let mut d = [[0.0; 4]; 4];
        d[0][0] = 3.0;
        d[1][1] = -7.0;
        d[2][2] = 1e-9;
        d[3][3] = 2.0;
        assert_eq!(singular_values(&d), [7.0, 3.0, 2.0, 1e-9]);

        let u = [1.0, 2.0, -1.0, 0.5];
        let v = [3.0, 0.0, 1.0, -2.0];
        let r1: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| u[i] * v[j]));
        let sv = singular_values(&r1);
        let norm = |x: &[f64; 4]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((sv[0] - norm(&u) * norm(&v)).abs() < 1e-12);
        assert!(sv[1] < 1e-14 * sv[0]);
    }

    #[test]
    fn singular_values_product_is_abs_det() {
        let sv = singular_values(&A);
        let prod: f64 = sv.iter().product();
        assert!((prod - det(&A).abs()).abs() < 1e-10 * prod);
        assert!(scaled_det(&A) <= 1.0);
    }

    #[test]
    fn kron_layout() {
        let a = [[1.0, 2.0], [3.0, 4.0]];
        let i = [[1.0, 0.0], [0.0, 1.0]];
        let m = kron2(&i, &a);
        assert_eq!(m[0], [1.0, 2.0, 0.0, 0.0]);
        assert_eq!(m[3], [0.0, 0.0, 3.0, 4.0]);
        let m = kron2(&a, &i);
        assert_eq!(m[0], [1.0, 0.0, 2.0, 0.0]);
        assert_eq!(m[3], [0.0, 3.0, 0.0, 4.0]);
    }
}
