//! Metric spheres and balls about the origin: the closed-form radial
//! function ρ_t, its large-t coefficients, the polar map Φ, and
//! Busemann–Hausdorff volumes and areas.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::body::{BodySummary, ConvexBody, Direction, Point};
use crate::error::{Error, Result};
use crate::metric::{rounded_ball_volume, MetricQuery};
use crate::numerics::{integrate_adaptive, QuadratureRule};

/// Largest radius accepted by volume and area computations. Beyond it the
/// sphere lies within ~1e−7 of ∂U and chord roots lose precision.
pub const MAX_RADIUS: f64 = 8.0;

fn check_radius(t: f64) -> Result<()> {
    if !(0.0..=MAX_RADIUS).contains(&t) {
        return Err(Error::argument(format!(
            "radius t = {t} outside [0, {MAX_RADIUS}]"
        )));
    }
    Ok(())
}

fn check_nonnegative(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::argument(format!(
            "radius t = {t} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

/// ρ_t from a = ω(u), b = ω(−u): ab(e^{2t}−1)/(a + b e^{2t}).
pub fn radial_from_pair(a: f64, b: f64, t: f64) -> f64 {
    let em1 = (2.0 * t).exp_m1();
    a * b * em1 / (a + b * (em1 + 1.0))
}

/// ω − ρ_t = a(a+b)/(a + b e^{2t}), free of cancellation.
pub fn gap_from_pair(a: f64, b: f64, t: f64) -> f64 {
    a * (a + b) / (a + b * (2.0 * t).exp())
}

/// Partial derivatives (∂ρ/∂a, ∂ρ/∂b) of the closed form.
fn radial_partials(a: f64, b: f64, t: f64) -> (f64, f64) {
    let e = (2.0 * t).exp();
    let em1 = (2.0 * t).exp_m1();
    let den = (a + b * e).powi(2);
    (b * b * e * em1 / den, a * a * em1 / den)
}

/// Radius of the Hilbert sphere S_t about the origin in direction u.
pub fn sphere_radial(body: &ConvexBody, u: &Direction, t: f64) -> Result<f64> {
    check_nonnegative(t)?;
    Ok(radial_from_pair(body.radial(u), body.radial(&-*u), t))
}

/// ω(u) − ρ_t(u).
pub fn sphere_gap(body: &ConvexBody, u: &Direction, t: f64) -> Result<f64> {
    check_nonnegative(t)?;
    Ok(gap_from_pair(body.radial(u), body.radial(&-*u), t))
}

/// The sphere S_t of a body, parametrized over directions.
#[derive(Debug, Clone, Copy)]
pub struct SphereParam<'a> {
    pub body: &'a ConvexBody,
    pub t: f64,
}

impl<'a> SphereParam<'a> {
    pub fn new(body: &'a ConvexBody, t: f64) -> Result<Self> {
        check_nonnegative(t)?;
        Ok(Self { body, t })
    }

    pub fn radial(&self, u: &Direction) -> f64 {
        radial_from_pair(self.body.radial(u), self.body.radial(&-*u), self.t)
    }

    pub fn point(&self, u: &Direction) -> Point {
        u.as_vector() * self.radial(u)
    }

    /// Derivatives of u ↦ ρ_t(u)u along each vector of the tangent frame
    /// at u, paired with the point itself.
    pub fn tangents(&self, u: &Direction) -> (Point, Vec<Vector3<f64>>) {
        let jet = self.body.radial_jet(u);
        let back = self.body.radial_jet(&-*u);
        let (a, b) = (jet.omega, back.omega);
        let rho = radial_from_pair(a, b, self.t);
        let (ra, rb) = radial_partials(a, b, self.t);
        let ga = jet.ambient_gradient();
        let gb = back.ambient_gradient();
        let uv = u.as_vector();
        let tangents = jet
            .frame
            .iter()
            .map(|e| uv * (ra * ga.dot(e) - rb * gb.dot(e)) + e * rho)
            .collect();
        (uv * rho, tangents)
    }
}

/// Coefficients of the e^{−2t} terms of ω − ρ_t and its angular
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymCoeffs {
    /// Δ = ω(u)(ω(u)/ω(−u) + 1).
    pub delta: f64,
    /// dΔ/dθ (planar bodies only).
    pub delta1: Option<f64>,
    /// d²Δ/dθ² (planar bodies only).
    pub delta2: Option<f64>,
    /// The second-order coefficient as printed in the source display, kept
    /// for comparison; it omits the 2ωω″ω(−u)² term and divides by ω(u)³.
    pub delta2_display: Option<f64>,
}

/// Large-t coefficients Δ, Δ′, Δ″ at u.
///
/// In the plane, with a = ω(θ), b = ω(θ+π) and primes in θ,
/// Δ = a²/b + a, Δ′ = a′(2a/b + 1) − (a/b)²b′ and Δ″ = a″ + (a²/b)″.
pub fn lemma1_coeffs(body: &ConvexBody, u: &Direction) -> AsymCoeffs {
    let a = body.radial(u);
    let b = body.radial(&-*u);
    let delta = a * (a / b + 1.0);
    if body.dim() != 2 {
        return AsymCoeffs {
            delta,
            delta1: None,
            delta2: None,
            delta2_display: None,
        };
    }
    let fwd = body.radial_jet(u);
    let back = body.radial_jet(&-*u);
    let (a1, a2) = (fwd.gradient[0], fwd.hessian[(0, 0)]);
    let (b1, b2) = (back.gradient[0], back.hessian[(0, 0)]);
    let r = a / b;
    let delta1 = a1 * (2.0 * r + 1.0) - r * r * b1;
    let delta2 = a2
        + (2.0 * a1 * a1 * b * b + 2.0 * a * a2 * b * b - 4.0 * a * a1 * b * b1 - a * a * b * b2
            + 2.0 * a * a * b1 * b1)
            / (b * b * b);
    // display convention: derivatives at −u taken in −u's own coordinate,
    // so the first derivative there changes sign
    let (p1, p2) = (-b1, b2);
    let display = (a * a * (2.0 * p1 * p1 - b * p2)
        + b * b * (2.0 * a1 * a1 + b * a2)
        + 2.0 * b * a * (2.0 * p1 * a1))
        / (a * a * a);
    AsymCoeffs {
        delta,
        delta1: Some(delta1),
        delta2: Some(delta2),
        delta2_display: Some(display),
    }
}

/// e^{2t} times the gap ω − ρ_t and its first two θ-derivatives, the
/// latter by central differences of step `h` (planar bodies).
pub fn measured_coeffs(body: &ConvexBody, theta: f64, t: f64, h: f64) -> Result<[f64; 3]> {
    if body.dim() != 2 {
        return Err(Error::argument("angular coefficients need a planar body"));
    }
    check_nonnegative(t)?;
    let gap = |th: f64| {
        let u = Direction::from_angle(th);
        gap_from_pair(body.radial(&u), body.radial(&-u), t)
    };
    let scale = (2.0 * t).exp();
    let (gm, g0, gp) = (gap(theta - h), gap(theta), gap(theta + h));
    Ok([
        scale * g0,
        scale * (gp - gm) / (2.0 * h),
        scale * (gp - 2.0 * g0 + gm) / (h * h),
    ])
}

/// Φ(u, s) = tanh(s) ω(u) u.
pub fn phi(body: &ConvexBody, u: &Direction, s: f64) -> Result<Point> {
    check_nonnegative(s)?;
    Ok(u.as_vector() * (s.tanh() * body.radial(u)))
}

/// |Jac Φ(u, s)| = ω(u)^dim tanh^{dim−1}(s) (1 − tanh²(s)) against the
/// sphere measure du and ds.
pub fn phi_jacobian(body: &ConvexBody, u: &Direction, s: f64) -> Result<f64> {
    check_nonnegative(s)?;
    let d = body.dim() as i32;
    let sech = 1.0 / s.cosh();
    Ok(body.radial(u).powi(d) * s.tanh().powi(d - 1) * sech * sech)
}

/// s at which Φ(u, ·) reaches S_t: tanh(s)ω = ρ_t.
fn polar_limit(a: f64, b: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    0.5 * ((a - b + 2.0 * b * e) / (a + b)).ln()
}

/// Busemann–Hausdorff volume of the ball B_t as ∫∫ σ(Φ(u,s)) |Jac Φ| ds du.
///
/// The inner integral runs over [0, s_max(u)] where Φ(u, s_max) ∈ S_t, so
/// the domain is B_t itself.
pub fn ball_volume_polar(q: &MetricQuery, t: f64) -> Result<f64> {
    check_radius(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let body = q.body();
    let cfg = q.config();
    let rule = QuadratureRule::for_ambient(
        body.dim(),
        cfg.volume_points_circle,
        cfg.volume_rule_sphere2,
    )?;
    rule.try_integrate(|u| {
        let a = body.radial(u);
        let b = body.radial(&-*u);
        let s_max = polar_limit(a, b, t);
        let inner = |s: f64| -> Result<f64> {
            let p = phi(body, u, s)?;
            Ok(q.busemann_density(&p)? * phi_jacobian(body, u, s)?)
        };
        integrate_adaptive(
            inner,
            0.0,
            s_max,
            s_max.ceil().max(1.0) as usize,
            cfg.integral_rel_tol,
        )
    })
}

/// Busemann–Hausdorff volume of B_t by plain polar coordinates in the
/// plane, ∫dθ ∫₀^{ρ_t} σ(r u) r dr, with r = ω(1 − e^{−x}) to resolve the
/// boundary layer (planar bodies).
pub fn ball_volume_direct(q: &MetricQuery, t: f64) -> Result<f64> {
    check_radius(t)?;
    let body = q.body();
    if body.dim() != 2 {
        return Err(Error::argument("direct ball volume needs a planar body"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let cfg = q.config();
    let rule = QuadratureRule::circle(cfg.volume_points_circle);
    rule.try_integrate(|u| {
        let a = body.radial(u);
        let b = body.radial(&-*u);
        let x_max = ((a + b * (2.0 * t).exp()) / (a + b)).ln();
        let inner = |x: f64| -> Result<f64> {
            let r = -a * (-x).exp_m1();
            let p = u.as_vector() * r;
            Ok(q.busemann_density(&p)? * r * a * (-x).exp())
        };
        integrate_adaptive(
            inner,
            0.0,
            x_max,
            x_max.ceil().max(1.0) as usize,
            cfg.integral_rel_tol,
        )
    })
}

/// Busemann–Hausdorff measure of the sphere S_t.
///
/// The sphere is parametrized by u ↦ ρ_t(u)u and the Finsler norm pulled
/// back through its differential. In the plane this is the Finsler length
/// ∫ F(c, c′) dθ; on S² the density at u is π over the area of the unit
/// ball of the pulled-back norm in an orthonormal tangent frame.
pub fn sphere_area(q: &MetricQuery, t: f64) -> Result<f64> {
    check_radius(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let body = q.body();
    let cfg = q.config();
    let sphere = SphereParam::new(body, t)?;
    if body.dim() == 2 {
        let rule = QuadratureRule::circle(cfg.quad_points_circle);
        return rule.try_integrate(|u| {
            let (c, dc) = sphere.tangents(u);
            q.finsler_norm(&c, &dc[0])
        });
    }
    let rule = QuadratureRule::sphere2(cfg.quad_rule_sphere2);
    let circle = QuadratureRule::circle(cfg.density_points_circle);
    let axes = [Vector3::x(), Vector3::y()];
    rule.try_integrate(|u| {
        let (c, dc) = sphere.tangents(u);
        q.body().check_interior(&c)?;
        let area = rounded_ball_volume(2, &axes, &circle, |w| {
            q.finsler_norm(&c, &(dc[0] * w.x + dc[1] * w.y))
        })?;
        Ok(PI / area)
    })
}

/// Sum of Hilbert distances between consecutive vertices of an n-gon
/// inscribed in S_t at equal angular spacing (planar bodies).
pub fn sphere_area_chords(q: &MetricQuery, t: f64, n_chords: usize) -> Result<f64> {
    check_radius(t)?;
    let body = q.body();
    if body.dim() != 2 {
        return Err(Error::argument("chord estimator needs a planar body"));
    }
    if n_chords < 64 {
        return Err(Error::argument("chord estimator needs at least 64 chords"));
    }
    let sphere = SphereParam::new(body, t)?;
    let h = 2.0 * PI / n_chords as f64;
    let vertices: Vec<Point> = (0..n_chords)
        .map(|j| sphere.point(&Direction::from_angle(h * j as f64)))
        .collect();
    let mut total = 0.0;
    for j in 0..n_chords {
        total += q.hilbert_distance(&vertices[j], &vertices[(j + 1) % n_chords])?;
    }
    Ok(total)
}

/// Asymptotic bounds on the Euclidean distance from Φ(u, s) to ∂U next to
/// the measured value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBounds {
    /// 2ω(u)e^{−2s}.
    pub upper: f64,
    /// 2(ω₀/R)ω(u)e^{−2s}.
    pub lower: f64,
    /// d(Φ(u, s), ∂U).
    pub actual: f64,
    /// Slack 5e^{−2s} for the o(e^{−2s}) remainder.
    pub slack: f64,
}

impl GapBounds {
    pub fn holds(&self) -> bool {
        self.lower * (1.0 - self.slack) <= self.actual
            && self.actual <= self.upper * (1.0 + self.slack)
    }
}

pub fn boundary_gap_bounds(
    body: &ConvexBody,
    summary: &BodySummary,
    u: &Direction,
    s: f64,
) -> Result<GapBounds> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::argument("boundary gap bounds need s ≥ 1"));
    }
    let w = body.radial(u);
    let decay = (-2.0 * s).exp();
    let p = phi(body, u, s)?;
    let (actual, _) = body.euclid_dist_to_boundary(&p)?;
    Ok(GapBounds {
        upper: 2.0 * w * decay,
        lower: 2.0 * (summary.omega0 / summary.outer_radius) * w * decay,
        actual,
        slack: 5.0 * decay,
    })
}
