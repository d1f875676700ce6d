//! The quadrilateral family, its bilinear pull-back onto the unit square and
//! the variable coefficients of the transformed operator.
//!
//! Every member has the fixed bottom side `V1 = (0,0)`, `V2 = (1,0)` and two
//! free upper vertices `V3 = (alpha, beta)`, `V4 = (gamma, delta)`. The map
//! `theta` sends the reference corners `(0,0), (1,0), (0,1), (1,1)` to
//! `V1, V2, V3, V4`.

use serde::{Deserialize, Serialize};

use crate::dual::Real;
use crate::error::{Error, Result};

/// Below this `|sigma|` the mapping is treated as singular.
pub const SIGMA_TOL: f64 = 1e-12;

/// A point of the plane (or of the reference square).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Quadrilateral with vertices `(0,0), (1,0), (alpha,beta), (gamma,delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrilateral {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Values of the five operator coefficients at one point of the square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientBundle {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
}

impl CoefficientBundle {
    pub fn as_array(&self) -> [f64; 5] {
        [self.f1, self.f2, self.f3, self.f4, self.f5]
    }
}

const REFERENCE_CORNERS: [Point; 4] = [
    Point::new(0.0, 0.0),
    Point::new(1.0, 0.0),
    Point::new(0.0, 1.0),
    Point::new(1.0, 1.0),
];

impl Quadrilateral {
    pub const fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Quadrilateral {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// The reference square itself.
    pub const fn unit_square() -> Self {
        Quadrilateral::new(0.0, 1.0, 1.0, 1.0)
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        Quadrilateral::new(p[0], p[1], p[2], p[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// `V1, V2, V3, V4` in mapping order.
    pub fn vertices(&self) -> [Point; 4] {
        [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(self.alpha, self.beta),
            Point::new(self.gamma, self.delta),
        ]
    }

    /// Vertices in boundary order `(V1, V2, V4, V3)`.
    pub fn polygon(&self) -> [Point; 4] {
        let [v1, v2, v3, v4] = self.vertices();
        [v1, v2, v4, v3]
    }

    /// `theta(x, y)` for a point of the closed reference square.
    pub fn map_point(&self, p: Point) -> Point {
        let xy = p.x * p.y;
        Point::new(
            p.x + self.alpha * p.y + (self.gamma - 1.0 - self.alpha) * xy,
            self.beta * p.y + (self.delta - self.beta) * xy,
        )
    }

    /// Jacobian determinant of `theta`. Affine in `(x, y)`.
    pub fn jacobian_sigma(&self, p: Point) -> f64 {
        mapping_partials(self.to_array(), p.x, p.y).sigma()
    }

    pub fn coefficients(&self, p: Point) -> Result<CoefficientBundle> {
        let [f1, f2, f3, f4, f5] = coefficients_generic(self.to_array(), p.x, p.y)?;
        Ok(CoefficientBundle { f1, f2, f3, f4, f5 })
    }

    /// Ok iff the jacobian is strictly positive at the four reference corners,
    /// which (sigma being affine) makes it positive on the whole square.
    pub fn validate(&self) -> Result<()> {
        for corner in REFERENCE_CORNERS {
            let sigma = self.jacobian_sigma(corner);
            if !(sigma > 0.0) {
                return Err(Error::InvalidQuadrilateral {
                    x: corner.x,
                    y: corner.y,
                    sigma,
                });
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.polygon())
    }

    pub fn perimeter(&self) -> f64 {
        polygon_perimeter(&self.polygon())
    }

    /// Homothety of ratio `sqrt(c)` about the origin, returned as `[V1, V2, V3, V4]`.
    ///
    /// The result generally leaves the family (`V2` moves to `(sqrt(c), 0)`),
    /// hence a plain vertex list.
    pub fn scale(&self, c: f64) -> Result<[Point; 4]> {
        if !(c > 0.0) {
            return Err(Error::NonPositiveFactor(c));
        }
        let r = c.sqrt();
        Ok(self.vertices().map(|v| Point::new(r * v.x, r * v.y)))
    }
}

/// Brings an arbitrary vertex list `[V1, V2, V3, V4]` (mapping order) into the
/// family by the similarity sending `V1` to the origin and `V2` to `(1, 0)`.
///
/// Returns the normalized quadrilateral and the length `|V2 - V1|`; the
/// eigenvalues of the original domain are those of the normalized one divided
/// by the squared length.
pub fn normalize_vertices(v: [Point; 4]) -> Result<(Quadrilateral, f64)> {
    let (ex, ey) = (v[1].x - v[0].x, v[1].y - v[0].y);
    let len2 = ex * ex + ey * ey;
    if !(len2 > 0.0 && len2.is_finite()) {
        return Err(Error::InvalidArgument("V1 and V2 coincide".into()));
    }
    // multiplication by conj(e) / |e|^2 in complex notation
    let map = |p: Point| {
        let (dx, dy) = (p.x - v[0].x, p.y - v[0].y);
        Point::new((dx * ex + dy * ey) / len2, (dy * ex - dx * ey) / len2)
    };
    let (v3, v4) = (map(v[2]), map(v[3]));
    let q = Quadrilateral::new(v3.x, v3.y, v4.x, v4.y);
    q.validate()?;
    Ok((q, len2.sqrt()))
}

/// Shoelace area of a simple polygon given in boundary order.
pub fn polygon_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    0.5 * twice.abs()
}

pub fn polygon_perimeter(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| vertices[i].distance(vertices[(i + 1) % n]))
        .sum()
}

/// First and mixed partials of `theta` at a point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MappingPartials<T> {
    pub t1x: T,
    pub t1y: T,
    pub t2x: T,
    pub t2y: T,
    pub t1xy: T,
    pub t2xy: T,
}

impl<T: Real> MappingPartials<T> {
    pub fn sigma(&self) -> T {
        self.t1x * self.t2y - self.t1y * self.t2x
    }
}

pub(crate) fn mapping_partials<T: Real>(params: [T; 4], x: f64, y: f64) -> MappingPartials<T> {
    let [alpha, beta, gamma, delta] = params;
    let one = T::from_f64(1.0);
    let t1xy = gamma - one - alpha;
    let t2xy = delta - beta;
    MappingPartials {
        t1x: one + t1xy.scale(y),
        t1y: alpha + t1xy.scale(x),
        t2x: t2xy.scale(y),
        t2y: beta + t2xy.scale(x),
        t1xy,
        t2xy,
    }
}

/// `(f1, ..., f5)` at `(x, y)`, generic so the same code yields exact
/// parameter derivatives when run over dual numbers.
///
/// `f4` and `f5` keep the `f2 / sigma` prefactor form term for term.
pub(crate) fn coefficients_generic<T: Real>(params: [T; 4], x: f64, y: f64) -> Result<[T; 5]> {
    let m = mapping_partials(params, x, y);
    let sigma = m.sigma();
    if sigma.value().abs() < SIGMA_TOL {
        return Err(Error::DegenerateJacobian {
            x,
            y,
            sigma: sigma.value(),
        });
    }
    let sigma2 = sigma * sigma;
    let f1 = -(m.t1y * m.t1y + m.t2y * m.t2y) / sigma2;
    let f2 = (m.t1x * m.t1y + m.t2x * m.t2y).scale(2.0) / sigma2;
    let f3 = -(m.t1x * m.t1x + m.t2x * m.t2x) / sigma2;
    let f4 = f2 / sigma * (m.t1y * m.t2xy - m.t2y * m.t1xy);
    let f5 = f2 / sigma * (m.t2x * m.t1xy - m.t1x * m.t2xy);
    Ok([f1, f2, f3, f4, f5])
}
