use isoquad::continuation::{
    exact_system, residual_norm, tangent_exact, trace, CurvePoint, Method, Param, TraceConfig,
};
use isoquad::discretization::lagrange_derivatives;
use isoquad::geometry::normalize_vertices;
use isoquad::search::{run_search, SearchConfig};
use isoquad::spectra::charpoly_eval;
use isoquad::{Discretization, Error, Quadrilateral, Scheme, KAPPA_UNIFORM};
use proptest::prelude::*;

const Q_STAR: Quadrilateral = Quadrilateral::new(-0.2, 1.1, 1.2, 1.3);

fn sp() -> Discretization {
    Discretization::new(Scheme::Sp, KAPPA_UNIFORM).unwrap()
}

fn quad_strategy() -> impl Strategy<Value = Quadrilateral> {
    (-0.4..0.4f64, 0.7..1.4f64, 0.7..1.5f64, 0.7..1.5f64)
        .prop_map(|(a, b, g, d)| Quadrilateral::new(a, b, g, d))
        .prop_filter("valid", |q| q.validate().is_ok())
}

fn scheme_strategy() -> impl Strategy<Value = Discretization> {
    prop_oneof![
        Just(Discretization::new(Scheme::Fd, KAPPA_UNIFORM).unwrap()),
        (0.05..0.45f64).prop_map(|k| Discretization::new(Scheme::Sp, k).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_gradient_matches_central_differences(q in quad_strategy(), disc in scheme_strategy()) {
        let g = disc.invariants_with_gradient(&q).unwrap();
        let h = 1e-5;
        for p in 0..4 {
            let mut up = q.to_array();
            let mut dn = q.to_array();
            up[p] += h;
            dn[p] -= h;
            let xu = disc.invariants(&Quadrilateral::from_array(up)).unwrap();
            let xd = disc.invariants(&Quadrilateral::from_array(dn)).unwrap();
            for k in 0..4 {
                let scale = g.grad[k].iter().map(|v| v * v).sum::<f64>().sqrt();
                let fd = (xu[k] - xd[k]) / (2.0 * h);
                prop_assert!((g.grad[k][p] - fd).abs() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn homothety_scales_invariants(q in quad_strategy(), c in 0.3..10.0f64) {
        let disc = sp();
        let xi = disc.invariants(&q).unwrap();
        let (n, len) = normalize_vertices(q.scale(c).unwrap()).unwrap();
        let xs = disc.invariants(&n).unwrap();
        for k in 0..4 {
            let e = 4 - k as i32;
            let scaled = xs[k] / (len * len).powi(e);
            let expected = xi[k] / c.powi(e);
            prop_assert!(((scaled - expected) / expected).abs() <= 1e-10);
        }
    }

    #[test]
    fn eigenvalues_are_roots_of_the_invariant_polynomial(q in quad_strategy(), disc in scheme_strategy()) {
        let s = disc.spectrum(&q);
        // small kappa on strongly skewed domains can give a complex pair
        prop_assume!(!matches!(s, Err(Error::ComplexSpectrum { .. })));
        let s = s.unwrap();
        for l in s.lambdas {
            prop_assert!(charpoly_eval(&s.xi, l).abs() <= 1e-6 * s.xi[0].abs());
        }
        prop_assert!(s.lambdas.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(disc.spectrum(&q).unwrap(), s);
    }

    #[test]
    fn eigenvalues_move_continuously(q in quad_strategy(), dir in 0usize..4) {
        let disc = sp();
        let base = disc.eigenvalues(&q).unwrap();
        let mut p = q.to_array();
        p[dir] += 1e-7;
        let moved = disc.eigenvalues(&Quadrilateral::from_array(p)).unwrap();
        for (a, b) in base.iter().zip(moved) {
            prop_assert!((a - b).abs() <= 1e-4 * a);
        }
    }

    #[test]
    fn collocation_differentiates_cubics_exactly(kappa in 0.05..0.45f64, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        // p vanishes at both ends of [0, 1]
        let p = |x: f64| x * (1.0 - x) * (a + b * x);
        let dp = |x: f64| (1.0 - 2.0 * x) * (a + b * x) + b * x * (1.0 - x);
        let ddp = |x: f64| -2.0 * (a + b * x) + 2.0 * b * (1.0 - 2.0 * x);
        let (d1, d2) = lagrange_derivatives(kappa).unwrap();
        let nodes = [kappa, 1.0 - kappa];
        let values = nodes.map(p);
        for i in 0..2 {
            let first = d1[i][0] * values[0] + d1[i][1] * values[1];
            let second = d2[i][0] * values[0] + d2[i][1] * values[1];
            prop_assert!((first - dp(nodes[i])).abs() <= 1e-10);
            prop_assert!((second - ddp(nodes[i])).abs() <= 1e-9);
        }
    }

    #[test]
    fn tangent_annihilates_the_residual(q in quad_strategy(), c in 0.8..1.2f64) {
        let disc = sp();
        let p = CurvePoint::new(q, c);
        // target chosen so that p lies on its curve
        let xi = disc.invariants(&q).unwrap();
        let xi_star: [f64; 4] = std::array::from_fn(|k| xi[k] / c.powi(4 - k as i32));
        let sys = exact_system(&disc, &p, &xi_star, Param::Beta).unwrap();
        prop_assume!(sys.scaled_det() > 1e-9);
        let t = sys.solve(0.0).unwrap();
        let g = disc.invariants_with_gradient(&q).unwrap();
        for k in 0..4 {
            let e = 4 - k as i32;
            let along: f64 = (0..4).map(|i| g.grad[k][i] * t.shape[i]).sum::<f64>()
                - e as f64 * c.powi(e - 1) * xi_star[k] * t.c;
            prop_assert!(along.abs() <= 1e-8 * xi[k].abs().max(1.0), "k={} {}", k, along);
        }
    }
}

#[test]
fn forward_then_backward_step_returns_to_start() {
    let disc = sp();
    let xi = disc.invariants(&Q_STAR).unwrap();
    let p0 = CurvePoint::start(Q_STAR);
    for dt in [1e-3, 1e-4] {
        let t0 = tangent_exact(&disc, &p0, &xi, Param::Beta, 1e-12).unwrap();
        let step = |p: &CurvePoint, t: &isoquad::continuation::Tangent, h: f64| CurvePoint {
            alpha: p.alpha + h * t.shape[0],
            beta: p.beta + h * t.shape[1],
            gamma: p.gamma + h * t.shape[2],
            delta: p.delta + h * t.shape[3],
            c: p.c + h * t.c,
        };
        let p1 = step(&p0, &t0, dt);
        let t1 = tangent_exact(&disc, &p1, &xi, Param::Beta, 1e-12).unwrap();
        let back = step(&p1, &t1, -dt);
        let drift: f64 = [
            back.alpha - p0.alpha,
            back.beta - p0.beta,
            back.gamma - p0.gamma,
            back.delta - p0.delta,
            back.c - p0.c,
        ]
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
        // |Psi'| estimated from the two tangents
        let dpsi: f64 = (0..4)
            .map(|i| (t1.shape[i] - t0.shape[i]).powi(2))
            .sum::<f64>()
            .sqrt()
            .hypot(t1.c - t0.c)
            / dt;
        assert!(drift <= 2.0 * dt * dt * dpsi + 1e-15, "dt={dt}: {drift} vs {dpsi}");
    }
}

/// First-order global error model `residual(t_m) <= K dt |t_m|`; the largest
/// ratio measured over M = 50, 100, 200 is 1.95.
const RESIDUAL_GROWTH: f64 = 3.0;

#[test]
fn residual_grows_at_first_order() {
    let disc = sp();
    let xi = disc.invariants(&Q_STAR).unwrap();
    let mut ends = Vec::new();
    let mut ratio: f64 = 0.0;
    for steps in [50, 100, 200] {
        let cfg = TraceConfig {
            steps,
            ..TraceConfig::default()
        };
        let curve = trace(&Q_STAR, &cfg).unwrap();
        let dt = cfg.step();
        for p in &curve.points {
            let r = residual_norm(&disc, &p.point, &xi).unwrap();
            assert_eq!(r, p.residual_norm);
            if p.t != 0.0 {
                ratio = ratio.max(r / (dt * p.t.abs()));
            }
        }
        ends.push(curve.points.last().unwrap().residual_norm);
    }
    assert!(ratio <= RESIDUAL_GROWTH, "{ratio}");
    // halving the step roughly halves the endpoint residual
    for w in ends.windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 0.1, "{ends:?}");
    }
}

fn distance_to_polyline(p: &[f64; 5], line: &[[f64; 5]]) -> f64 {
    line.windows(2)
        .map(|w| {
            let d: Vec<f64> = (0..5).map(|i| w[1][i] - w[0][i]).collect();
            let v: Vec<f64> = (0..5).map(|i| p[i] - w[0][i]).collect();
            let len2: f64 = d.iter().map(|x| x * x).sum();
            let s = if len2 == 0.0 {
                0.0
            } else {
                (v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / len2).clamp(0.0, 1.0)
            };
            (0..5).map(|i| (v[i] - s * d[i]).powi(2)).sum::<f64>().sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn explicit_parameter_choice_traces_the_same_curve() {
    let points = |explicit: Param| -> Vec<[f64; 5]> {
        let cfg = TraceConfig {
            explicit_param: explicit,
            t_half: 0.03,
            steps: 300,
            ..TraceConfig::default()
        };
        trace(&Q_STAR, &cfg)
            .unwrap()
            .points
            .iter()
            .map(|p| {
                let q = p.point;
                [q.alpha, q.beta, q.gamma, q.delta, q.c]
            })
            .collect()
    };
    let by_beta = points(Param::Beta);
    let by_delta = points(Param::Delta);
    let (lo, hi) = (by_beta[0][3].min(by_beta[600][3]), by_beta[0][3].max(by_beta[600][3]));
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for p in by_delta.iter().filter(|p| p[3] >= lo && p[3] <= hi) {
        worst = worst.max(distance_to_polyline(p, &by_beta));
        compared += 1;
    }
    assert!(compared > 10);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn fd_method_stays_on_exact_curve() {
    let exact = trace(&Q_STAR, &TraceConfig { steps: 50, ..TraceConfig::default() }).unwrap();
    let fd = trace(
        &Q_STAR,
        &TraceConfig {
            steps: 50,
            method: Method::Fd,
            ..TraceConfig::default()
        },
    )
    .unwrap();
    for (a, b) in exact.points.iter().zip(&fd.points) {
        assert_eq!(a.t, b.t);
        assert!((a.point.c - b.point.c).abs() < 1e-3);
        assert!((a.point.alpha - b.point.alpha).abs() < 1e-3);
    }
}

#[test]
fn prefilter_only_drops_area_outliers() {
    let cfg = SearchConfig {
        l: 0.02,
        h: 0.004,
        epsilon: 2e-3,
        area_tol: 2e-3,
        ..SearchConfig::default()
    };
    let full = run_search(&Q_STAR, &cfg).unwrap();
    let filtered = run_search(&Q_STAR, &SearchConfig { area_prefilter: true, ..cfg }).unwrap();
    let star_area = Q_STAR.area();
    assert!(filtered.stats.prefiltered > 0);
    for c in &filtered.candidates {
        assert!(full.candidates.contains(c));
    }
    for c in full.candidates.iter().filter(|c| !filtered.candidates.contains(c)) {
        let dev = ((c.quad.area() - star_area) / star_area).abs();
        assert!(dev > cfg.area_tol, "{c:?}");
    }
}

#[test]
fn search_order_is_scheduling_independent() {
    let cfg = SearchConfig {
        l: 0.02,
        h: 0.005,
        epsilon: 1e-3,
        ..SearchConfig::default()
    };
    let seq = run_search(&Q_STAR, &SearchConfig { threads: Some(0), ..cfg }).unwrap();
    for threads in [1, 2, 7] {
        let par = run_search(&Q_STAR, &SearchConfig { threads: Some(threads), ..cfg }).unwrap();
        assert_eq!(par, seq);
    }
    assert!(seq.candidates.windows(2).all(|w| w[0].index < w[1].index));
}

#[test]
fn square_neighbourhood_is_mirror_symmetric() {
    let square = Quadrilateral::new(0.0, 1.0, 1.0, 1.0);
    let res = run_search(&square, &SearchConfig { epsilon: 5e-4, ..SearchConfig::default() }).unwrap();
    let key = |a: f64, b: f64, g: f64, d: f64| [a, b, g, d].map(|v| (v * 1e9).round() as i64);
    let found: std::collections::HashSet<_> = res
        .candidates
        .iter()
        .map(|c| key(c.quad.alpha, c.quad.beta, c.quad.gamma, c.quad.delta))
        .collect();
    assert!(res.stats.accepted > 100);
    // reflection in x = 1/2 swaps V3 and V4
    for c in &res.candidates {
        let q = c.quad;
        assert!(found.contains(&key(1.0 - q.gamma, q.delta, 1.0 - q.alpha, q.beta)), "{q:?}");
    }
    // mirror images share a spectrum; only the self-symmetric ones stand alone
    assert!(res.stats.distinct_spectra < res.stats.accepted);
}
