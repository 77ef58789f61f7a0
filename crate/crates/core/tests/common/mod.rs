#![allow(dead_code)]

use hilbert_kit::{BodySpec, ConvexBody, Direction, MetricQuery, Point, ToleranceConfig};

pub fn body(spec: BodySpec) -> ConvexBody {
    ConvexBody::new(spec).expect("valid test body")
}

pub fn query(spec: BodySpec) -> MetricQuery {
    MetricQuery::new(body(spec), ToleranceConfig::default())
}

pub fn coarse_query(spec: BodySpec) -> MetricQuery {
    MetricQuery::new(body(spec), ToleranceConfig::coarse())
}

/// The planar bodies every experiment runs on.
pub fn planar_bodies() -> Vec<(&'static str, BodySpec)> {
    vec![
        ("disk", BodySpec::ball(2, 1.0)),
        ("ellipse(2,1)", BodySpec::ellipse(2.0, 1.0)),
        (
            "offset_ball(1,0.3)",
            BodySpec::offset_ball(1.0, &[0.3, 0.0]),
        ),
        ("perturbed_ball(0.05,3)", BodySpec::perturbed_ball(0.05, 3)),
    ]
}

pub fn spatial_bodies() -> Vec<(&'static str, BodySpec)> {
    vec![
        ("ball3", BodySpec::ball(3, 1.0)),
        ("ellipsoid(1.5,1,0.8)", BodySpec::ellipsoid(1.5, 1.0, 0.8)),
        (
            "offset_ball3",
            BodySpec::offset_ball(1.0, &[0.2, -0.1, 0.3]),
        ),
    ]
}

pub fn all_bodies() -> Vec<(&'static str, BodySpec)> {
    let mut v = planar_bodies();
    v.extend(spatial_bodies());
    v
}

/// Direction from two parameters in [0, 1): an angle in the plane, a
/// height and azimuth on S².
pub fn direction(dim: usize, a: f64, b: f64) -> Direction {
    let theta = 2.0 * std::f64::consts::PI * a;
    if dim == 2 {
        Direction::from_angle(theta)
    } else {
        Direction::from_spherical(2.0 * b - 1.0, theta)
    }
}

/// Interior point at fraction `f` of the way from the origin to ∂U.
pub fn interior(body: &ConvexBody, a: f64, b: f64, f: f64) -> Point {
    let u = direction(body.dim(), a, b);
    u.as_vector() * (f * body.radial(&u))
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}
