//! Property tests for the metric, body and sphere invariants.

mod common;

use std::f64::consts::PI;

use common::{all_bodies, body, direction, interior, planar_bodies, query, rel_err};
use hilbert_kit::asymptotics::{entropy_curve, lemma2_check, ratio_curve};
use hilbert_kit::body::tangent_frame;
use hilbert_kit::metric::klein_norm;
use hilbert_kit::numerics::{find_root_bracketed, fit_slope, integrate_circle};
use hilbert_kit::spheres::{phi, phi_jacobian, sphere_radial, SphereParam};
use hilbert_kit::{BodySpec, Direction, MetricQuery, Point, ToleranceConfig};
use nalgebra::{Matrix2, Matrix3, Vector3};
use proptest::prelude::*;

fn body_index() -> impl Strategy<Value = usize> {
    0..all_bodies().len()
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn depth() -> impl Strategy<Value = f64> {
    0.0..0.97f64
}

/// Queries are built once; proptest cases index into them.
fn queries() -> &'static [MetricQuery] {
    static Q: std::sync::OnceLock<Vec<MetricQuery>> = std::sync::OnceLock::new();
    Q.get_or_init(|| all_bodies().into_iter().map(|(_, s)| query(s)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_symmetric(
        i in body_index(),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2, f2) in (unit(), unit(), depth()),
    ) {
        let q = &queries()[i];
        let p = interior(q.body(), a1, b1, f1);
        let r = interior(q.body(), a2, b2, f2);
        let d1 = q.hilbert_distance(&p, &r).unwrap();
        let d2 = q.hilbert_distance(&r, &p).unwrap();
        prop_assert!((d1 - d2).abs() <= 1e-10, "{d1} vs {d2}");
        prop_assert!(d1 >= 0.0);
    }

    #[test]
    fn distance_is_additive_along_chords(
        i in body_index(),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2, f2) in (unit(), unit(), depth()),
        lambda in 0.05..0.95f64,
    ) {
        let q = &queries()[i];
        let p = interior(q.body(), a1, b1, f1);
        let r = interior(q.body(), a2, b2, f2);
        let m = p + (r - p) * lambda;
        let whole = q.hilbert_distance(&p, &r).unwrap();
        let parts = q.hilbert_distance(&p, &m).unwrap() + q.hilbert_distance(&m, &r).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9, "{whole} vs {parts}");
    }

    #[test]
    fn triangle_inequality(
        i in body_index(),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2, f2) in (unit(), unit(), depth()),
        (a3, b3, f3) in (unit(), unit(), depth()),
    ) {
        let q = &queries()[i];
        let p = interior(q.body(), a1, b1, f1);
        let m = interior(q.body(), a2, b2, f2);
        let r = interior(q.body(), a3, b3, f3);
        let d = |x: &Point, y: &Point| q.hilbert_distance(x, y).unwrap();
        prop_assert!(d(&p, &r) <= d(&p, &m) + d(&m, &r) + 1e-9);
    }

    #[test]
    fn hilbert_norm_is_the_symmetrized_funk_norm(
        i in body_index(),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2) in (unit(), unit()),
        len in 0.01..10.0f64,
    ) {
        let q = &queries()[i];
        let p = interior(q.body(), a1, b1, f1);
        let v = direction(q.body().dim(), a2, b2).as_vector() * len;
        let f = q.finsler_norm(&p, &v).unwrap();
        let fwd = q.funk_norm(&p, &v).unwrap();
        let back = q.funk_norm(&p, &-v).unwrap();
        prop_assert!((f - 0.5 * (fwd + back)).abs() <= 1e-10 * f.max(1.0));
    }

    #[test]
    fn norm_is_homogeneous_and_reversible(
        i in body_index(),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2) in (unit(), unit()),
        lambda in 0.001..1000.0f64,
    ) {
        let q = &queries()[i];
        let p = interior(q.body(), a1, b1, f1);
        let v = *direction(q.body().dim(), a2, b2).as_vector();
        let f = q.finsler_norm(&p, &v).unwrap();
        prop_assert!(rel_err(q.finsler_norm(&p, &(v * lambda)).unwrap(), lambda * f) <= 1e-14);
        prop_assert!(rel_err(q.finsler_norm(&p, &-v).unwrap(), f) <= 1e-12);
        prop_assert!(
            rel_err(q.funk_norm(&p, &(v * lambda)).unwrap(), lambda * q.funk_norm(&p, &v).unwrap())
                <= 1e-14
        );
    }

    #[test]
    fn ball_norms_match_the_klein_model(
        dim in 2usize..4,
        radius in 0.2..5.0f64,
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2) in (unit(), unit()),
        (cx, cy, cz) in (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64),
    ) {
        let center = [cx * radius, cy * radius, cz * radius];
        let q = query(BodySpec::offset_ball(radius, &center[..dim]));
        let p = interior(q.body(), a1, b1, f1);
        let v = *direction(dim, a2, b2).as_vector();
        let c = Vector3::new(center[0], center[1], if dim == 3 { center[2] } else { 0.0 });
        let klein = klein_norm(radius, &c, &p, &v).unwrap();
        prop_assert!(rel_err(q.finsler_norm(&p, &v).unwrap(), klein) <= 1e-10);
    }

    #[test]
    fn distances_are_invariant_under_axis_scalings(
        dim in 2usize..4,
        (sx, sy, sz) in (0.3..3.0f64, 0.3..3.0f64, 0.3..3.0f64),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2, f2) in (unit(), unit(), depth()),
    ) {
        let ball = query(BodySpec::ball(dim, 1.0));
        let image = if dim == 2 {
            query(BodySpec::ellipse(sx, sy))
        } else {
            query(BodySpec::ellipsoid(sx, sy, sz))
        };
        let t = Matrix3::from_diagonal(&Vector3::new(sx, sy, sz));
        let p = interior(ball.body(), a1, b1, f1);
        let r = interior(ball.body(), a2, b2, f2);
        let d = ball.hilbert_distance(&p, &r).unwrap();
        let dt = image.hilbert_distance(&(t * p), &(t * r)).unwrap();
        prop_assert!((d - dt).abs() <= 1e-9, "{d} vs {dt}");
    }

    #[test]
    fn distances_are_invariant_under_similarities(
        dim in 2usize..4,
        scale in 0.2..5.0f64,
        (cx, cy, cz) in (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64),
        (a1, b1, f1) in (unit(), unit(), depth()),
        (a2, b2, f2) in (unit(), unit(), depth()),
    ) {
        // x ↦ scale·x + c maps the unit ball onto the offset ball
        let c = [cx * scale, cy * scale, cz * scale];
        let ball = query(BodySpec::ball(dim, 1.0));
        let image = query(BodySpec::offset_ball(scale, &c[..dim]));
        let shift = Vector3::new(c[0], c[1], if dim == 3 { c[2] } else { 0.0 });
        let p = interior(ball.body(), a1, b1, f1);
        let r = interior(ball.body(), a2, b2, f2);
        let d = ball.hilbert_distance(&p, &r).unwrap();
        let dt = image
            .hilbert_distance(&(p * scale + shift), &(r * scale + shift))
            .unwrap();
        prop_assert!((d - dt).abs() <= 1e-9, "{d} vs {dt}");
    }

    #[test]
    fn sphere_points_lie_at_hilbert_distance_t(
        i in body_index(),
        (a, b) in (unit(), unit()),
        t in 0.05..8.0f64,
    ) {
        let q = &queries()[i];
        let u = direction(q.body().dim(), a, b);
        let rho = sphere_radial(q.body(), &u, t).unwrap();
        let d = q.hilbert_distance(&Point::zeros(), &(u.as_vector() * rho)).unwrap();
        prop_assert!((d - t).abs() <= 1e-8, "d = {d}, t = {t}");
    }

    #[test]
    fn chord_endpoints_from_the_origin_hit_the_radial_boundary(
        i in body_index(),
        (a, b) in (unit(), unit()),
    ) {
        let q = &queries()[i];
        let cfg = q.config();
        let u = direction(q.body().dim(), a, b);
        let ends = q.body().chord_endpoints(&Point::zeros(), u.as_vector(), cfg).unwrap();
        let w = q.body().radial(&u);
        prop_assert!((ends.p_plus.norm() - w).abs() <= 10.0 * cfg.root_tol * w.max(1.0));
        prop_assert!((ends.p_plus.normalize() - u.as_vector()).norm() <= 1e-12);
    }

    #[test]
    fn phi_jacobian_matches_finite_differences(
        i in body_index(),
        (a, b) in (unit(), unit()),
        s in 0.2..5.0f64,
    ) {
        let body = queries()[i].body();
        let dim = body.dim();
        let u = direction(dim, a, b);
        let frame = tangent_frame(dim, &u);
        let h = 1e-5;
        let at = |alpha: &[f64], s: f64| {
            let mut w = *u.as_vector();
            for (e, x) in frame.iter().zip(alpha) {
                w += e * *x;
            }
            phi(body, &Direction::new(w).unwrap(), s).unwrap()
        };
        let zero = vec![0.0; dim - 1];
        let mut cols: Vec<Vector3<f64>> = (0..dim - 1)
            .map(|k| {
                let mut plus = zero.clone();
                let mut minus = zero.clone();
                plus[k] = h;
                minus[k] = -h;
                (at(&plus, s) - at(&minus, s)) / (2.0 * h)
            })
            .collect();
        cols.push((at(&zero, s + h) - at(&zero, s - h)) / (2.0 * h));
        let det = if dim == 2 {
            Matrix2::new(cols[0].x, cols[1].x, cols[0].y, cols[1].y).determinant()
        } else {
            Matrix3::from_columns(&cols).determinant()
        };
        let exact = phi_jacobian(body, &u, s).unwrap();
        prop_assert!(rel_err(det.abs(), exact) <= 1e-6, "{det} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_spheres_bound_convex_polygons(
        i in 0..planar_bodies().len(),
        t in 0.1..8.0f64,
    ) {
        let body = body(planar_bodies()[i].1.clone());
        let sphere = SphereParam::new(&body, t).unwrap();
        let n = 256;
        let pts: Vec<Point> = (0..n)
            .map(|j| sphere.point(&Direction::from_angle(2.0 * PI * j as f64 / n as f64)))
            .collect();
        for j in 0..n {
            let e1 = pts[(j + 1) % n] - pts[j];
            let e2 = pts[(j + 2) % n] - pts[(j + 1) % n];
            prop_assert!(e1.x * e2.y - e1.y * e2.x > 0.0);
        }
    }

    #[test]
    fn circle_rule_is_exact_on_low_degree_trig_polynomials(
        n_half in 8usize..128,
        coeffs in prop::collection::vec(-1.0..1.0f64, 8),
        c0 in -2.0..2.0f64,
    ) {
        let n = 2 * n_half;
        let max_deg = n_half - 1;
        let degs: Vec<usize> = (0..4).map(|k| 1 + (k * 37) % max_deg).collect();
        let f = |u: &Direction| {
            let th = u.angle();
            c0 + (0..4)
                .map(|k| {
                    let m = degs[k] as f64;
                    coeffs[2 * k] * (m * th).cos() + coeffs[2 * k + 1] * (m * th).sin()
                })
                .sum::<f64>()
        };
        let val = integrate_circle(f, n).unwrap();
        prop_assert!((val - 2.0 * PI * c0).abs() <= 1e-12);
    }

    #[test]
    fn slope_fit_ignores_constant_offsets(
        ys in prop::collection::vec(-50.0..50.0f64, 4..12),
        shift in -1e3..1e3f64,
    ) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, y)| (i as f64, *y)).collect();
        let shifted: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (*x, y + shift)).collect();
        let (s1, s2) = (fit_slope(&pts).unwrap(), fit_slope(&shifted).unwrap());
        prop_assert!((s1 - s2).abs() <= 1e-10 * (1.0 + s1.abs()));
    }

    #[test]
    fn bracketed_roots_are_local_residual_minima(
        root in -3.0..3.0f64,
        k in 0.1..10.0f64,
        tol in prop::sample::select(vec![1e-6, 1e-9, 1e-12]),
    ) {
        let g = |x: f64| (k * (x - root)).sinh() + 0.1 * (x - root);
        let x = find_root_bracketed(g, -5.0, 5.0, tol).unwrap();
        prop_assert!((x - root).abs() <= tol);
        prop_assert!(g(x).abs() <= g(x - tol).abs().max(g(x + tol).abs()));
    }
}

#[test]
fn lemma2_bound_holds_on_dense_grids() {
    for (name, spec) in all_bodies() {
        let b = body(spec);
        let summary = b.summarize(if b.dim() == 2 { 2048 } else { 128 });
        let report = lemma2_check(&b, &summary, 2048).unwrap();
        assert!(report.holds(), "{name}: {report:?}");
    }
}

#[test]
fn ball_summaries_have_constant_curvature() {
    for spec in [
        BodySpec::ball(2, 2.5),
        BodySpec::ball(3, 0.7),
        BodySpec::offset_ball(1.5, &[0.4, -0.6]),
        BodySpec::offset_ball(1.5, &[0.4, -0.6, 0.3]),
    ] {
        let b = body(spec.clone());
        let radius = match spec.family {
            hilbert_kit::Family::Ball { radius }
            | hilbert_kit::Family::OffsetBall { radius, .. } => radius,
            _ => unreachable!(),
        };
        let s = b.summarize(if b.dim() == 2 { 1024 } else { 128 });
        assert!(
            (s.curvature_min - 1.0 / radius).abs() <= 1e-9,
            "{spec:?}: {s:?}"
        );
        assert!(
            (s.curvature_max - 1.0 / radius).abs() <= 1e-9,
            "{spec:?}: {s:?}"
        );
        if b.is_centrally_symmetric() {
            assert!((s.asymmetry - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn symmetric_bodies_have_even_radial_functions() {
    for (name, spec) in all_bodies() {
        let b = body(spec);
        if !b.is_centrally_symmetric() {
            continue;
        }
        for j in 0..64 {
            let u = direction(b.dim(), j as f64 / 64.0, (j as f64 * 0.618).fract());
            assert!((b.radial(&u) - b.radial(&-u)).abs() <= 1e-14, "{name}");
        }
    }
}

#[test]
fn funk_norm_is_irreversible_on_asymmetric_chords() {
    let q = query(BodySpec::offset_ball(1.0, &[0.3, 0.0]));
    let v = Vector3::x();
    let fwd = q.funk_norm(&Point::zeros(), &v).unwrap();
    let back = q.funk_norm(&Point::zeros(), &-v).unwrap();
    assert!((fwd - 1.0 / 1.3).abs() <= 1e-12);
    assert!((back - 1.0 / 0.7).abs() <= 1e-12);
}

#[test]
fn ratio_curves_are_scale_invariant() {
    let grid = [1.0, 4.0, 8.0];
    let small = ratio_curve(&query(BodySpec::ball(2, 1.0)), &grid).unwrap();
    let large = ratio_curve(&query(BodySpec::ball(2, 5.0)), &grid).unwrap();
    for (a, b) in small.rows.iter().zip(&large.rows) {
        assert!((a.ratio - b.ratio).abs() <= 1e-9, "{a:?} vs {b:?}");
        assert!(rel_err(a.sphere_area, b.sphere_area) <= 1e-9);
    }
    let e1 = query(BodySpec::ellipse(2.0, 1.0));
    let e2 = query(BodySpec::ellipse(6.0, 3.0));
    let (r1, r2) = (
        ratio_curve(&e1, &grid).unwrap(),
        ratio_curve(&e2, &grid).unwrap(),
    );
    for (a, b) in r1.rows.iter().zip(&r2.rows) {
        assert!((a.ratio - b.ratio).abs() <= 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn sphere_and_ball_entropies_agree() {
    for (name, spec) in planar_bodies() {
        let q = query(spec);
        let (_, fit) = entropy_curve(&q, &[5.0, 6.0, 7.0, 8.0]).unwrap();
        assert!((fit.spheres - 1.0).abs() <= 0.05, "{name}: {fit:?}");
        assert!((fit.balls - 1.0).abs() <= 0.05, "{name}: {fit:?}");
        assert!((fit.spheres - fit.balls).abs() <= 0.05, "{name}: {fit:?}");
    }
}

#[test]
fn coarse_and_default_settings_agree_on_the_disk() {
    let fine = query(BodySpec::ball(2, 1.0));
    let coarse = MetricQuery::new(body(BodySpec::ball(2, 1.0)), ToleranceConfig::coarse());
    let a = ratio_curve(&fine, &[3.0]).unwrap().rows[0];
    let b = ratio_curve(&coarse, &[3.0]).unwrap().rows[0];
    assert!(rel_err(b.ratio, a.ratio) <= 1e-5);
}
