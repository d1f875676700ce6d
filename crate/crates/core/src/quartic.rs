//! Deterministic roots of a real monic quartic.
//!
//! Ferrari's factorization through the resolvent cubic gives starting values,
//! which are then polished with Newton's method on the original polynomial.
//! Near-double roots are handled separately: the pair center is found as a
//! simple root of the derivative and the split is recovered from the local
//! quadratic model, collapsing to an exact double root when the residual is
//! below the rounding level of the polynomial evaluation.

use num_complex::Complex64;

/// Roots of `z^4 + c[3] z^3 + c[2] z^2 + c[1] z + c[0]`, sorted by real part
/// then imaginary part.
pub fn monic_quartic_roots(c: [f64; 4]) -> [Complex64; 4] {
    let scale = [
        c[3].abs(),
        c[2].abs().sqrt(),
        c[1].abs().cbrt(),
        c[0].abs().sqrt().sqrt(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if scale == 0.0 {
        return [Complex64::new(0.0, 0.0); 4];
    }

    // w = z / scale keeps every coefficient O(1)
    let b = [
        c[0] / scale.powi(4),
        c[1] / scale.powi(3),
        c[2] / scale.powi(2),
        c[3] / scale,
    ];
    let mut roots = ferrari(b);
    for r in roots.iter_mut() {
        *r = polish(&b, *r);
    }
    sort_roots(&mut roots);
    resolve_clusters(&b, &mut roots);
    sort_roots(&mut roots);
    roots.map(|r| r * scale)
}

fn sort_roots(roots: &mut [Complex64; 4]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn ferrari(b: [f64; 4]) -> [Complex64; 4] {
    let [b0, b1, b2, b3] = b;
    let shift = b3 / 4.0;
    // y = w + b3/4 gives y^4 + p y^2 + q y + r
    let p = b2 - 3.0 * b3 * b3 / 8.0;
    let q = b1 - b3 * b2 / 2.0 + b3.powi(3) / 8.0;
    let r = b0 - b3 * b1 / 4.0 + b3 * b3 * b2 / 16.0 - 3.0 * b3.powi(4) / 256.0;

    let ys: [Complex64; 4] = if q.abs() <= 1e-14 {
        // biquadratic
        let [u1, u2] = quadratic(Complex64::new(p, 0.0), Complex64::new(r, 0.0));
        [u1.sqrt(), -u1.sqrt(), u2.sqrt(), -u2.sqrt()]
    } else {
        // m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0 has a positive root
        let m = largest_real_cubic_root(p, p * p / 4.0 - r, -q * q / 8.0);
        let v = (2.0 * m).sqrt();
        let base = p / 2.0 + m;
        let [y1, y2] = quadratic(Complex64::new(-v, 0.0), Complex64::new(base + q / (2.0 * v), 0.0));
        let [y3, y4] = quadratic(Complex64::new(v, 0.0), Complex64::new(base - q / (2.0 * v), 0.0));
        [y1, y2, y3, y4]
    };
    ys.map(|y| y - shift)
}

/// Roots of `z^2 + b z + c` without cancellation.
fn quadratic(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { disc } else { -disc };
    let t = -(b + s) / 2.0;
    if t.norm() == 0.0 {
        return [t, t];
    }
    [t, c / t]
}

/// Largest real root of `m^3 + a m^2 + b m + c`.
fn largest_real_cubic_root(a: f64, b: f64, c: f64) -> f64 {
    // m = x - a/3 gives x^3 + p x + q
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let x = if disc > 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else if p == 0.0 {
        0.0
    } else {
        let rho = (-p / 3.0).sqrt();
        let arg = (-q / (2.0 * rho.powi(3))).clamp(-1.0, 1.0);
        2.0 * rho * (arg.acos() / 3.0).cos()
    };
    let mut m = x - a / 3.0;
    for _ in 0..4 {
        let f = ((m + a) * m + b) * m + c;
        let df = (3.0 * m + 2.0 * a) * m + b;
        if df == 0.0 {
            break;
        }
        let next = m - f / df;
        if !next.is_finite() || (((next + a) * next + b) * next + c).abs() >= f.abs() {
            break;
        }
        m = next;
    }
    m
}

fn eval(b: &[f64; 4], z: Complex64) -> (Complex64, Complex64, Complex64) {
    let p = (((z + b[3]) * z + b[2]) * z + b[1]) * z + b[0];
    let dp = ((4.0 * z + 3.0 * b[3]) * z + 2.0 * b[2]) * z + b[1];
    let ddp = (12.0 * z + 6.0 * b[3]) * z + 2.0 * b[2];
    (p, dp, ddp)
}

/// Rounding-level bound on `|P(z)|` for the scaled polynomial.
fn eval_noise(b: &[f64; 4], z: Complex64) -> f64 {
    let a = z.norm();
    let mag = (((a + b[3].abs()) * a + b[2].abs()) * a + b[1].abs()) * a + b[0].abs();
    16.0 * f64::EPSILON * mag
}

fn polish(b: &[f64; 4], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp, _) = eval(b, z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) || eval(b, next).0.norm() >= p.norm() {
            break;
        }
        z = next;
    }
    z
}

const CLUSTER_RADIUS: f64 = 1e-5;

fn resolve_clusters(b: &[f64; 4], roots: &mut [Complex64; 4]) {
    let mut i = 0;
    while i < 3 {
        let (r0, r1) = (roots[i], roots[i + 1]);
        if (r0 - r1).norm() > CLUSTER_RADIUS {
            i += 1;
            continue;
        }
        // center: simple root of P' near the pair
        let mut center = (r0 + r1) / 2.0;
        for _ in 0..8 {
            let (_, dp, ddp) = eval(b, center);
            if ddp.norm() == 0.0 {
                break;
            }
            let step = dp / ddp;
            center -= step;
            if step.norm() <= 1e-17 {
                break;
            }
        }
        let (p, _, ddp) = eval(b, center);
        let (a, b_) = if p.norm() <= eval_noise(b, center) || ddp.norm() == 0.0 {
            (center, center)
        } else {
            let half_gap = (-2.0 * p / ddp).sqrt();
            (polish(b, center - half_gap), polish(b, center + half_gap))
        };
        roots[i] = a;
        roots[i + 1] = b_;
        i += 2;
    }
}
