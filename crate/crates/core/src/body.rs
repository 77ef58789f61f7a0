//! Smooth convex bodies described by their radial function ω about the
//! origin, plus the Euclidean queries everything else is built on.
//!
//! Each family is stored through its gauge (Minkowski functional)
//! g(x) = ‖x‖ / ω(x/‖x‖), which is 1-homogeneous with analytic gradient and
//! Hessian. The radial function and its derivatives on the sphere are
//! recovered as ω = 1/g restricted to unit vectors.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::{
    find_root_bracketed_with, golden_section_max, QuadratureRule, Sphere2Rule, ToleranceConfig,
};

/// A point or vector of ℝ² or ℝ³. Planar bodies use z = 0.
pub type Point = Vector3<f64>;

/// Points closer than this (along the ray from the origin) to ∂U are
/// rejected: chord root finding is ill-conditioned there.
pub const MIN_BOUNDARY_GAP: f64 = 1e-9;

/// A unit vector on S¹ (z = 0) or S².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vector3<f64>);

impl Direction {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::argument("direction must be a nonzero finite vector"));
        }
        Ok(Self(v / n))
    }

    /// (cos θ, sin θ, 0).
    pub fn from_angle(theta: f64) -> Self {
        Self(Vector3::new(theta.cos(), theta.sin(), 0.0))
    }

    /// Point on S² with height `z` = cos φ and azimuth `theta`.
    pub fn from_spherical(z: f64, theta: f64) -> Self {
        let s = (1.0 - z * z).max(0.0).sqrt();
        Self(Vector3::new(s * theta.cos(), s * theta.sin(), z))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    /// Polar angle in the xy-plane.
    pub fn angle(&self) -> f64 {
        self.0.y.atan2(self.0.x)
    }

    pub fn antipode(&self) -> Self {
        Self(-self.0)
    }
}

impl std::ops::Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        self.antipode()
    }
}

/// Orthonormal tangent frame at `u`.
///
/// In the plane the single vector is the counter-clockwise tangent, so frame
/// derivatives agree with d/dθ. On S² the frame is deterministic but
/// otherwise arbitrary.
pub fn tangent_frame(dim: usize, u: &Direction) -> Vec<Vector3<f64>> {
    let u = u.as_vector();
    if dim == 2 {
        return vec![Vector3::new(-u.y, u.x, 0.0)];
    }
    let axis = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vector3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (axis - u * u.dot(&axis)).normalize();
    let e2 = u.cross(&e1);
    vec![e1, e2]
}

/// Supported body families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Origin-centered ball.
    Ball { radius: f64 },
    /// Ball whose center is offset from the origin.
    OffsetBall { radius: f64, center: Vector3<f64> },
    /// Axis-aligned ellipse with semi-axes a (x) and b (y).
    Ellipse { a: f64, b: f64 },
    /// Axis-aligned ellipsoid.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Planar ω(θ) = 1 + ε cos(mθ).
    PerturbedBall { epsilon: f64, m: u32 },
}

/// Parsed body description: family plus ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    pub dim: usize,
    pub family: Family,
}

fn spec_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Spec {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn get_real(params: &Value, name: &str) -> Result<f64> {
    let field = format!("params.{name}");
    params
        .get(name)
        .ok_or_else(|| spec_err(&field, "missing"))?
        .as_f64()
        .ok_or_else(|| spec_err(&field, "expected a number"))
}

impl BodySpec {
    pub fn ball(dim: usize, radius: f64) -> Self {
        Self {
            dim,
            family: Family::Ball { radius },
        }
    }

    pub fn offset_ball(radius: f64, center: &[f64]) -> Self {
        let mut c = Vector3::zeros();
        for (i, x) in center.iter().take(3).enumerate() {
            c[i] = *x;
        }
        Self {
            dim: center.len(),
            family: Family::OffsetBall { radius, center: c },
        }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self {
            dim: 2,
            family: Family::Ellipse { a, b },
        }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Self {
            dim: 3,
            family: Family::Ellipsoid { a, b, c },
        }
    }

    pub fn perturbed_ball(epsilon: f64, m: u32) -> Self {
        Self {
            dim: 2,
            family: Family::PerturbedBall { epsilon, m },
        }
    }

    /// Reads `{"family": ..., "params": {...}, "dim": 2|3}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| spec_err("<document>", e.to_string()))?;
        Self::from_value(&root)
    }

    pub fn from_value(root: &Value) -> Result<Self> {
        let family = root
            .get("family")
            .ok_or_else(|| spec_err("family", "missing"))?
            .as_str()
            .ok_or_else(|| spec_err("family", "expected a string"))?;
        let params = root
            .get("params")
            .ok_or_else(|| spec_err("params", "missing"))?;
        if !params.is_object() {
            return Err(spec_err("params", "expected an object"));
        }
        let dim = match root.get("dim") {
            None => None,
            Some(v) => {
                let d = v
                    .as_u64()
                    .ok_or_else(|| spec_err("dim", "expected 2 or 3"))?;
                if d != 2 && d != 3 {
                    return Err(spec_err("dim", format!("expected 2 or 3, got {d}")));
                }
                Some(d as usize)
            }
        };
        let spec = match family {
            "ball" => Self::ball(dim.unwrap_or(2), get_real(params, "radius")?),
            "offset_ball" => {
                let radius = get_real(params, "radius")?;
                let center = params
                    .get("center")
                    .ok_or_else(|| spec_err("params.center", "missing"))?
                    .as_array()
                    .ok_or_else(|| spec_err("params.center", "expected an array"))?
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| spec_err("params.center", "expected numbers"))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if center.len() != 2 && center.len() != 3 {
                    return Err(spec_err("params.center", "expected 2 or 3 coordinates"));
                }
                if let Some(d) = dim {
                    if d != center.len() {
                        return Err(spec_err(
                            "params.center",
                            format!("has {} coordinates but dim is {d}", center.len()),
                        ));
                    }
                }
                Self::offset_ball(radius, &center)
            }
            "ellipse" => {
                if dim.is_some_and(|d| d != 2) {
                    return Err(spec_err("dim", "ellipse is planar (dim 2)"));
                }
                Self::ellipse(get_real(params, "a")?, get_real(params, "b")?)
            }
            "ellipsoid" => {
                if dim.is_some_and(|d| d != 3) {
                    return Err(spec_err("dim", "ellipsoid is spatial (dim 3)"));
                }
                Self::ellipsoid(
                    get_real(params, "a")?,
                    get_real(params, "b")?,
                    get_real(params, "c")?,
                )
            }
            "perturbed_ball" => {
                if dim.is_some_and(|d| d != 2) {
                    return Err(spec_err("dim", "perturbed_ball is planar (dim 2)"));
                }
                let m = params
                    .get("m")
                    .ok_or_else(|| spec_err("params.m", "missing"))?
                    .as_u64()
                    .ok_or_else(|| spec_err("params.m", "expected a nonnegative integer"))?;
                Self::perturbed_ball(get_real(params, "epsilon")?, m as u32)
            }
            other => {
                return Err(spec_err("family", format!("unknown family `{other}`")));
            }
        };
        Ok(spec)
    }

    pub fn to_json(&self) -> Value {
        let (family, params) = match &self.family {
            Family::Ball { radius } => ("ball", serde_json::json!({ "radius": radius })),
            Family::OffsetBall { radius, center } => {
                let c: Vec<f64> = center.iter().take(self.dim).copied().collect();
                (
                    "offset_ball",
                    serde_json::json!({ "radius": radius, "center": c }),
                )
            }
            Family::Ellipse { a, b } => ("ellipse", serde_json::json!({ "a": a, "b": b })),
            Family::Ellipsoid { a, b, c } => {
                ("ellipsoid", serde_json::json!({ "a": a, "b": b, "c": c }))
            }
            Family::PerturbedBall { epsilon, m } => (
                "perturbed_ball",
                serde_json::json!({ "epsilon": epsilon, "m": m }),
            ),
        };
        serde_json::json!({ "family": family, "params": params, "dim": self.dim })
    }
}

/// Value, gradient and Hessian of the gauge at a point.
#[derive(Debug, Clone, Copy)]
pub struct GaugeJet {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

/// ω and its first two derivatives at `u` along a normal chart
/// u(α) = normalize(u + Σ αᵢ eᵢ) built on the tangent frame `frame`.
///
/// In the plane these are exactly ω(θ), ω′(θ), ω″(θ).
#[derive(Debug, Clone)]
pub struct RadialJet {
    pub direction: Direction,
    pub frame: Vec<Vector3<f64>>,
    pub omega: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix2<f64>,
}

impl RadialJet {
    /// Tangential gradient of ω as an ambient vector.
    pub fn ambient_gradient(&self) -> Vector3<f64> {
        self.frame
            .iter()
            .zip(&self.gradient)
            .fold(Vector3::zeros(), |acc, (e, g)| acc + e * *g)
    }

    /// Tangent vectors ∂X/∂αᵢ of the boundary parametrization X = ω u.
    pub fn boundary_tangents(&self) -> Vec<Vector3<f64>> {
        let u = self.direction.as_vector();
        self.frame
            .iter()
            .zip(&self.gradient)
            .map(|(e, g)| u * *g + e * self.omega)
            .collect()
    }
}

/// Outward unit normal and principal curvatures of ∂U at ω(u)u.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub normal: Vector3<f64>,
    /// One value in the plane, two (ascending) in space.
    pub principal: Vec<f64>,
}

impl Curvature {
    pub fn min(&self) -> f64 {
        self.principal.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.principal
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Extremal constants of a body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySummary {
    /// min ω.
    pub omega0: f64,
    /// max ω.
    pub omega1: f64,
    /// max ω(u)/ω(−u).
    pub asymmetry: f64,
    /// Minimum normal curvature k.
    pub curvature_min: f64,
    /// Maximum normal curvature K.
    pub curvature_max: f64,
    /// Radius r = 1/K of the inscribed tangent spheres.
    pub inner_radius: f64,
    /// Radius R = 1/k of the circumscribed tangent spheres.
    pub outer_radius: f64,
}

/// Both boundary intersections of a line through an interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordEndpoints {
    /// Exit point in the −v direction.
    pub p_minus: Point,
    /// Exit point in the +v direction.
    pub p_plus: Point,
    /// Euclidean distance from the query point to `p_minus`.
    pub s_minus: f64,
    /// Euclidean distance from the query point to `p_plus`.
    pub s_plus: f64,
}

/// A validated smooth convex body, immutable after construction.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    spec: BodySpec,
    /// Upper bound on ω used to bracket ray exits.
    reach: f64,
}

impl ConvexBody {
    /// Validates the description on a dense grid (1024 angles in the plane,
    /// 64×128 directions in space): ω must be positive and every normal
    /// curvature strictly positive.
    pub fn new(spec: BodySpec) -> Result<Self> {
        validate_params(&spec)?;
        let mut body = Self {
            spec,
            reach: f64::INFINITY,
        };
        let grid = body.direction_grid(1024);
        let mut reach: f64 = 0.0;
        for u in &grid {
            let omega = body.radial(u);
            if !(omega > 0.0 && omega.is_finite()) {
                return Err(Error::InvalidBody {
                    direction: u.to_array(),
                    reason: format!("radial function is not a positive finite number ({omega})"),
                });
            }
            reach = reach.max(omega);
            let curv = body.normal_and_curvature(u);
            let kmin = curv.min();
            if !(kmin > 0.0 && kmin.is_finite()) {
                return Err(Error::InvalidBody {
                    direction: u.to_array(),
                    reason: format!("normal curvature is not a positive finite number ({kmin})"),
                });
            }
        }
        body.reach = reach * 1.05;
        Ok(body)
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    /// Ambient dimension (2 or 3).
    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Sphere dimension n = dim − 1.
    pub fn sphere_dim(&self) -> usize {
        self.spec.dim - 1
    }

    /// True for families symmetric under x ↦ −x.
    pub fn is_centrally_symmetric(&self) -> bool {
        match &self.spec.family {
            Family::Ball { .. } | Family::Ellipse { .. } | Family::Ellipsoid { .. } => true,
            Family::OffsetBall { center, .. } => center.norm() == 0.0,
            Family::PerturbedBall { epsilon, m } => *epsilon == 0.0 || m % 2 == 0,
        }
    }

    /// Builds a point from coordinates, checking the dimension.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        if coords.len() != self.dim() {
            return Err(Error::argument(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        let mut p = Point::zeros();
        for (i, c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::argument("coordinates must be finite"));
            }
            p[i] = *c;
        }
        Ok(p)
    }

    /// Direction grid used for validation and extremes: `n` angles in the
    /// plane, an (n/16)×(n/8) product grid on S² (64×128 for n = 1024).
    pub(crate) fn direction_grid(&self, n: usize) -> Vec<Direction> {
        if self.dim() == 2 {
            QuadratureRule::circle(n).nodes
        } else {
            QuadratureRule::sphere2(Sphere2Rule {
                n_polar: (n / 16).max(4),
                n_azimuth: (n / 8).max(8),
            })
            .nodes
        }
    }

    /// Gauge g(x) = ‖x‖/ω(ι(x)) with its derivatives.
    pub fn gauge_jet(&self, x: &Point) -> GaugeJet {
        let dim = self.dim();
        let eye = if dim == 2 {
            Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0))
        } else {
            Matrix3::identity()
        };
        match &self.spec.family {
            Family::Ball { radius } => {
                let r = x.norm();
                let xh = x / r;
                GaugeJet {
                    value: r / radius,
                    gradient: xh / *radius,
                    hessian: (eye - xh * xh.transpose()) / (radius * r),
                }
            }
            Family::OffsetBall { radius, center } => {
                let a = radius * radius - center.norm_squared();
                let xc = x.dot(center);
                let q = xc * xc + a * x.norm_squared();
                let s = q.sqrt();
                let dq = center * (2.0 * xc) + x * (2.0 * a);
                let ds = dq / (2.0 * s);
                let hq = center * center.transpose() * 2.0 + eye * (2.0 * a);
                let hs = hq / (2.0 * s) - dq * dq.transpose() / (4.0 * s * s * s);
                GaugeJet {
                    value: (s - xc) / a,
                    gradient: (ds - center) / a,
                    hessian: hs / a,
                }
            }
            Family::Ellipse { a, b } => {
                let d = Vector3::new(1.0 / (a * a), 1.0 / (b * b), 0.0);
                quadratic_gauge(&d, x)
            }
            Family::Ellipsoid { a, b, c } => {
                let d = Vector3::new(1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c));
                quadratic_gauge(&d, x)
            }
            Family::PerturbedBall { epsilon, m } => {
                let r = (x.x * x.x + x.y * x.y).sqrt();
                let theta = x.y.atan2(x.x);
                let mf = *m as f64;
                let (sn, cs) = (mf * theta).sin_cos();
                let w = 1.0 + epsilon * cs;
                let w1 = -epsilon * mf * sn;
                let w2 = -epsilon * mf * mf * cs;
                let h = 1.0 / w;
                let h1 = -w1 / (w * w);
                let h2 = -w2 / (w * w) + 2.0 * w1 * w1 / (w * w * w);
                let (st, ct) = theta.sin_cos();
                let xh = Vector3::new(ct, st, 0.0);
                let et = Vector3::new(-st, ct, 0.0);
                GaugeJet {
                    value: r * h,
                    gradient: xh * h + et * h1,
                    hessian: et * et.transpose() * ((h + h2) / r),
                }
            }
        }
    }

    /// g(x) alone.
    pub fn gauge(&self, x: &Point) -> f64 {
        match &self.spec.family {
            Family::Ball { radius } => x.norm() / radius,
            Family::OffsetBall { radius, center } => {
                let a = radius * radius - center.norm_squared();
                let xc = x.dot(center);
                ((xc * xc + a * x.norm_squared()).sqrt() - xc) / a
            }
            Family::Ellipse { a, b } => ((x.x / a).powi(2) + (x.y / b).powi(2)).sqrt(),
            Family::Ellipsoid { a, b, c } => {
                ((x.x / a).powi(2) + (x.y / b).powi(2) + (x.z / c).powi(2)).sqrt()
            }
            Family::PerturbedBall { epsilon, m } => {
                let r = (x.x * x.x + x.y * x.y).sqrt();
                let theta = x.y.atan2(x.x);
                r / (1.0 + epsilon * (*m as f64 * theta).cos())
            }
        }
    }

    /// ω(u).
    pub fn radial(&self, u: &Direction) -> f64 {
        1.0 / self.gauge(u.as_vector())
    }

    /// Boundary point ω(u)u.
    pub fn boundary_point(&self, u: &Direction) -> Point {
        u.as_vector() * self.radial(u)
    }

    /// ω with first and second derivatives along the tangent frame at `u`.
    pub fn radial_jet(&self, u: &Direction) -> RadialJet {
        let jet = self.gauge_jet(u.as_vector());
        let g = jet.value;
        let omega = 1.0 / g;
        let grad_f = -jet.gradient / (g * g);
        let hess_f =
            -jet.hessian / (g * g) + jet.gradient * jet.gradient.transpose() * (2.0 / (g * g * g));
        let frame = tangent_frame(self.dim(), u);
        let gradient: Vec<f64> = frame.iter().map(|e| grad_f.dot(e)).collect();
        let mut hessian = Matrix2::zeros();
        for (i, ei) in frame.iter().enumerate() {
            for (j, ej) in frame.iter().enumerate() {
                let delta = if i == j { omega } else { 0.0 };
                hessian[(i, j)] = ei.dot(&(hess_f * ej)) + delta;
            }
        }
        RadialJet {
            direction: *u,
            frame,
            omega,
            gradient,
            hessian,
        }
    }

    /// Outward unit normal and principal curvatures at ω(u)u from the first
    /// and second fundamental forms of X(α) = ω(u(α)) u(α).
    pub fn normal_and_curvature(&self, u: &Direction) -> Curvature {
        let jet = self.radial_jet(u);
        let uv = u.as_vector();
        let tangents = jet.boundary_tangents();
        let k = jet.frame.len();
        // X_ij = ω_ij u + ω_i e_j + ω_j e_i − δ_ij ω u
        let second = |i: usize, j: usize| -> Vector3<f64> {
            let delta = if i == j { jet.omega } else { 0.0 };
            uv * (jet.hessian[(i, j)] - delta)
                + jet.frame[j] * jet.gradient[i]
                + jet.frame[i] * jet.gradient[j]
        };
        let normal = if k == 1 {
            // rotate the tangent clockwise; for a CCW parametrization this points outward
            let t = tangents[0];
            Vector3::new(t.y, -t.x, 0.0).normalize()
        } else {
            let n = tangents[0].cross(&tangents[1]).normalize();
            if n.dot(uv) < 0.0 {
                -n
            } else {
                n
            }
        };
        if k == 1 {
            let first = tangents[0].norm_squared();
            let second = -second(0, 0).dot(&normal);
            return Curvature {
                normal,
                principal: vec![second / first],
            };
        }
        let mut first = Matrix2::zeros();
        let mut second_form = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                first[(i, j)] = tangents[i].dot(&tangents[j]);
                second_form[(i, j)] = -second(i, j).dot(&normal);
            }
        }
        // eigenvalues of I⁻¹ II as those of the symmetric L⁻¹ II L⁻ᵀ, I = L Lᵀ
        let l11 = first[(0, 0)].sqrt();
        let l21 = first[(1, 0)] / l11;
        let l22 = (first[(1, 1)] - l21 * l21).sqrt();
        let linv = Matrix2::new(1.0 / l11, 0.0, -l21 / (l11 * l22), 1.0 / l22);
        let s = linv * second_form * linv.transpose();
        let mean = 0.5 * (s[(0, 0)] + s[(1, 1)]);
        let half = 0.5 * (s[(0, 0)] - s[(1, 1)]);
        let rad = half.hypot(0.5 * (s[(0, 1)] + s[(1, 0)]));
        Curvature {
            normal,
            principal: vec![mean - rad, mean + rad],
        }
    }

    /// True iff ‖p‖ < ω(ι(p)); the origin is always inside.
    pub fn contains(&self, p: &Point) -> bool {
        self.gauge(p) < 1.0
    }

    /// Rejects points outside, on, or within [`MIN_BOUNDARY_GAP`] of ∂U.
    pub(crate) fn check_interior(&self, p: &Point) -> Result<()> {
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(p, "not finite"));
        }
        if self.dim() == 2 && p.z != 0.0 {
            return Err(Error::domain(p, "off the plane of a planar body"));
        }
        let g = self.gauge(p);
        if g >= 1.0 {
            return Err(Error::domain(p, "not strictly inside the body"));
        }
        let gap = if g > 0.0 {
            p.norm() * (1.0 - g) / g
        } else {
            f64::INFINITY
        };
        if gap < MIN_BOUNDARY_GAP {
            return Err(Error::domain(p, "too close to the boundary"));
        }
        Ok(())
    }

    /// Distance from an interior point `p` to ∂U along the unit vector `v`.
    ///
    /// The exit is the sign change of g(p + s v) − 1 on [0, reach]; the root
    /// is refined first to `root_tol` absolutely and then, for short
    /// distances, to `root_tol` relative to the distance itself.
    ///
    /// Quadric families solve the quadratic exactly instead.
    pub(crate) fn ray_exit(
        &self,
        p: &Point,
        v: &Vector3<f64>,
        cfg: &ToleranceConfig,
    ) -> Result<f64> {
        match self.quadric_exit(p, v) {
            Some(s) => Ok(s),
            None => self.ray_exit_bracketed(p, v, cfg),
        }
    }

    /// Positive root of the quadratic exit condition for balls and
    /// ellipsoids; `None` for other families.
    fn quadric_exit(&self, p: &Point, v: &Vector3<f64>) -> Option<f64> {
        let (a, b, c) = match &self.spec.family {
            Family::Ball { radius } => (
                v.norm_squared(),
                p.dot(v),
                p.norm_squared() - radius * radius,
            ),
            Family::OffsetBall { radius, center } => {
                let q = p - center;
                (
                    v.norm_squared(),
                    q.dot(v),
                    q.norm_squared() - radius * radius,
                )
            }
            Family::Ellipse { a, b } => {
                let d = Vector3::new(1.0 / (a * a), 1.0 / (b * b), 0.0);
                let dv = d.component_mul(v);
                (v.dot(&dv), p.dot(&dv), p.dot(&d.component_mul(p)) - 1.0)
            }
            Family::Ellipsoid { a, b, c } => {
                let d = Vector3::new(1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c));
                let dv = d.component_mul(v);
                (v.dot(&dv), p.dot(&dv), p.dot(&d.component_mul(p)) - 1.0)
            }
            Family::PerturbedBall { .. } => return None,
        };
        // a s² + 2 b s + c = 0 with c < 0; pick the cancellation-free form
        let root = (b * b - a * c).max(0.0).sqrt();
        Some(if b >= 0.0 {
            -c / (b + root)
        } else {
            (root - b) / a
        })
    }

    /// Ray exit by bracketed root finding on the gauge, used for every
    /// family without a closed form.
    pub(crate) fn ray_exit_bracketed(
        &self,
        p: &Point,
        v: &Vector3<f64>,
        cfg: &ToleranceConfig,
    ) -> Result<f64> {
        let h = |s: f64| Ok(self.gauge(&(p + v * s)) - 1.0);
        let far = p.norm() + 2.0 * self.reach;
        let s = find_root_bracketed_with(h, 0.0, far, cfg.root_tol)?;
        if s < 1.0 {
            let width = 2.0 * cfg.root_tol;
            let lo = (s - width).max(0.0);
            let hi = s + width;
            if h(lo)? < 0.0 && h(hi)? > 0.0 {
                return find_root_bracketed_with(h, lo, hi, cfg.root_tol * s);
            }
        }
        Ok(s)
    }

    /// Intersections of the line p + ℝv with ∂U.
    pub fn chord_endpoints(
        &self,
        p: &Point,
        v: &Vector3<f64>,
        cfg: &ToleranceConfig,
    ) -> Result<ChordEndpoints> {
        self.check_interior(p)?;
        let v = Direction::new(*v)?;
        let v = v.as_vector();
        let s_plus = self.ray_exit(p, v, cfg)?;
        let s_minus = self.ray_exit(p, &-v, cfg)?;
        Ok(ChordEndpoints {
            p_minus: p - v * s_minus,
            p_plus: p + v * s_plus,
            s_minus,
            s_plus,
        })
    }

    /// Extremes of ω, of the normal curvatures and of ω(u)/ω(−u), each
    /// refined by golden-section search around the best grid direction.
    ///
    /// `grid_size` is the number of angles in the plane; in space a
    /// (grid_size/2)×grid_size product grid is used.
    pub fn summarize(&self, grid_size: usize) -> BodySummary {
        let grid: Vec<(Direction, (f64, f64))> = if self.dim() == 2 {
            let h = 2.0 * PI / grid_size as f64;
            (0..grid_size)
                .map(|j| {
                    let th = h * j as f64;
                    (Direction::from_angle(th), (0.0, th))
                })
                .collect()
        } else {
            let (zs, _) = crate::numerics::gauss_legendre((grid_size / 2).max(4));
            let na = grid_size.max(8);
            let h = 2.0 * PI / na as f64;
            zs.iter()
                .flat_map(|z| {
                    (0..na).map(move |j| {
                        let th = h * (j as f64 + 0.5);
                        (Direction::from_spherical(*z, th), (z.acos(), th))
                    })
                })
                .collect()
        };
        let step = 2.0 * PI / grid_size as f64;
        let omega = |u: &Direction| self.radial(u);
        let ratio = |u: &Direction| self.radial(u) / self.radial(&u.antipode());
        let kmin = |u: &Direction| self.normal_and_curvature(u).min();
        let kmax = |u: &Direction| self.normal_and_curvature(u).max();

        let omega1 = self.refine_extreme(&grid, step, &omega);
        let omega0 = -self.refine_extreme(&grid, step, &|u| -omega(u));
        let asymmetry = self.refine_extreme(&grid, step, &ratio).max(1.0);
        let curvature_max = self.refine_extreme(&grid, step, &kmax);
        let curvature_min = -self.refine_extreme(&grid, step, &|u| -kmin(u));
        BodySummary {
            omega0,
            omega1,
            asymmetry,
            curvature_min,
            curvature_max,
            inner_radius: 1.0 / curvature_max,
            outer_radius: 1.0 / curvature_min,
        }
    }

    fn refine_extreme(
        &self,
        grid: &[(Direction, (f64, f64))],
        step: f64,
        f: &dyn Fn(&Direction) -> f64,
    ) -> f64 {
        let (best, best_val) = grid.iter().map(|(u, angles)| (*angles, f(u))).fold(
            ((0.0, 0.0), f64::NEG_INFINITY),
            |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            },
        );
        let tol = 1e-10;
        if self.dim() == 2 {
            let (_, val) = golden_section_max(
                |th| f(&Direction::from_angle(th)),
                best.1 - step,
                best.1 + step,
                tol,
            );
            return val.max(best_val);
        }
        // alternate polar / azimuthal golden-section sweeps
        let (mut phi, mut th) = best;
        let mut val = best_val;
        let mut width = 2.0 * step;
        let at = |phi: f64, th: f64| f(&Direction::from_spherical(phi.cos(), th));
        for _ in 0..6 {
            let (p, v1) = golden_section_max(|x| at(x, th), phi - width, phi + width, tol);
            if v1 > val {
                phi = p;
                val = v1;
            }
            let (t, v2) = golden_section_max(|x| at(phi, x), th - width, th + width, tol);
            if v2 > val {
                th = t;
                val = v2;
            }
            width *= 0.5;
        }
        val
    }

    /// Euclidean distance from an interior point to ∂U and the nearest
    /// boundary point, by dense sampling and golden-section refinement.
    pub fn euclid_dist_to_boundary(&self, p: &Point) -> Result<(f64, Point)> {
        if self.gauge(p) >= 1.0 {
            return Err(Error::domain(p, "not strictly inside the body"));
        }
        let dist = |u: &Direction| (self.boundary_point(u) - p).norm();
        let tol = 1e-13;
        if self.dim() == 2 {
            let n = 1024;
            let h = 2.0 * PI / n as f64;
            let (j, _) = (0..n)
                .map(|j| (j, dist(&Direction::from_angle(h * j as f64))))
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                );
            let th0 = h * j as f64;
            let (th, negd) = golden_section_max(
                |th| -dist(&Direction::from_angle(th)),
                th0 - h,
                th0 + h,
                tol,
            );
            let u = Direction::from_angle(th);
            return Ok((-negd, self.boundary_point(&u)));
        }
        let (zs, _) = crate::numerics::gauss_legendre(64);
        let na = 128;
        let h = 2.0 * PI / na as f64;
        let mut best = (0.0, 0.0, f64::INFINITY);
        for z in &zs {
            for j in 0..na {
                let th = h * (j as f64 + 0.5);
                let d = dist(&Direction::from_spherical(*z, th));
                if d < best.2 {
                    best = (z.acos(), th, d);
                }
            }
        }
        let (mut phi, mut th, mut d) = best;
        let at = |phi: f64, th: f64| dist(&Direction::from_spherical(phi.cos(), th));
        let mut width = 0.1;
        for _ in 0..30 {
            let (p1, v1) = golden_section_max(|x| -at(x, th), phi - width, phi + width, tol);
            if -v1 <= d {
                phi = p1;
                d = -v1;
            }
            let (t1, v2) = golden_section_max(|x| -at(phi, x), th - width, th + width, tol);
            if -v2 <= d {
                th = t1;
                d = -v2;
            }
            width = (width * 0.6).max(1e-7);
        }
        let u = Direction::from_spherical(phi.cos(), th);
        Ok((d, self.boundary_point(&u)))
    }
}

fn quadratic_gauge(d: &Vector3<f64>, x: &Point) -> GaugeJet {
    let dx = d.component_mul(x);
    let g = x.dot(&dx).sqrt();
    GaugeJet {
        value: g,
        gradient: dx / g,
        hessian: Matrix3::from_diagonal(d) / g - dx * dx.transpose() / (g * g * g),
    }
}

fn validate_params(spec: &BodySpec) -> Result<()> {
    let positive = |field: &str, v: f64| -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(spec_err(field, format!("must be positive, got {v}")))
        }
    };
    if spec.dim != 2 && spec.dim != 3 {
        return Err(spec_err(
            "dim",
            format!("expected 2 or 3, got {}", spec.dim),
        ));
    }
    match &spec.family {
        Family::Ball { radius } => positive("params.radius", *radius),
        Family::OffsetBall { radius, center } => {
            positive("params.radius", *radius)?;
            if center.iter().any(|c| !c.is_finite()) {
                return Err(spec_err("params.center", "must be finite"));
            }
            if spec.dim == 2 && center.z != 0.0 {
                return Err(spec_err(
                    "params.center",
                    "planar center must have 2 coordinates",
                ));
            }
            if center.norm() >= *radius {
                return Err(Error::InvalidBody {
                    direction: [0.0; 3],
                    reason: "origin is not inside the offset ball".into(),
                });
            }
            Ok(())
        }
        Family::Ellipse { a, b } => {
            positive("params.a", *a)?;
            positive("params.b", *b)
        }
        Family::Ellipsoid { a, b, c } => {
            positive("params.a", *a)?;
            positive("params.b", *b)?;
            positive("params.c", *c)
        }
        Family::PerturbedBall { epsilon, .. } => {
            if !epsilon.is_finite() {
                return Err(spec_err("params.epsilon", "must be finite"));
            }
            Ok(())
        }
    }
}
