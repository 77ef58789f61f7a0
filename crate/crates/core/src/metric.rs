//! Hilbert and Funk metrics of a body: distances, Finsler norms and
//! Busemann–Hausdorff densities.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::body::{tangent_frame, ConvexBody, Direction, Point};
use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, QuadratureRule, ToleranceConfig};

/// Rounding stops once the moment correction is this close to identity.
const ROUNDING_TOL: f64 = 0.1;
const MAX_ROUNDING_STEPS: usize = 4;

/// Euclidean volume of the unit ball of ℝ^dim.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(dim as f64 / 2.0) / gamma_half_int(dim + 2),
    }
}

// Γ(k/2) for integer k ≥ 1
fn gamma_half_int(k: usize) -> f64 {
    if k == 1 {
        PI.sqrt()
    } else if k == 2 {
        1.0
    } else {
        (k as f64 / 2.0 - 1.0) * gamma_half_int(k - 2)
    }
}

/// A body paired with the tolerances used for every query on it.
#[derive(Debug, Clone)]
pub struct MetricQuery {
    body: ConvexBody,
    config: ToleranceConfig,
    density_rule: QuadratureRule,
}

impl MetricQuery {
    pub fn new(body: ConvexBody, config: ToleranceConfig) -> Self {
        let density_rule = if body.dim() == 2 {
            QuadratureRule::circle(config.density_points_circle)
        } else {
            QuadratureRule::sphere2(config.density_rule_sphere2)
        };
        Self {
            body,
            config,
            density_rule,
        }
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn config(&self) -> &ToleranceConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// Hilbert distance ½ ln[(‖q−p₁‖‖p−q₁‖)/(‖p−p₁‖‖q−q₁‖)] with p₁ behind
    /// p and q₁ beyond q on the chord through both points.
    ///
    /// Each boundary gap is measured from the endpoint nearest to it, which
    /// keeps the logarithm accurate when a point is close to ∂U.
    pub fn hilbert_distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.body.check_interior(p)?;
        self.body.check_interior(q)?;
        let diff = q - p;
        let len = diff.norm();
        if len == 0.0 {
            return Ok(0.0);
        }
        let v = diff / len;
        let s_back = self.body.ray_exit(p, &-v, &self.config)?;
        let s_fwd = self.body.ray_exit(q, &v, &self.config)?;
        Ok(0.5 * ((len / s_back).ln_1p() + (len / s_fwd).ln_1p()))
    }

    /// Hilbert–Finsler norm ½‖v‖(1/‖p−p₋‖ + 1/‖p−p₊‖).
    pub fn finsler_norm(&self, p: &Point, v: &Vector3<f64>) -> Result<f64> {
        self.body.check_interior(p)?;
        self.finsler_norm_unchecked(p, v)
    }

    pub(crate) fn finsler_norm_unchecked(&self, p: &Point, v: &Vector3<f64>) -> Result<f64> {
        let n = v.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        let u = v / n;
        let s_plus = self.body.ray_exit(p, &u, &self.config)?;
        let s_minus = self.body.ray_exit(p, &-u, &self.config)?;
        Ok(0.5 * n * (1.0 / s_minus + 1.0 / s_plus))
    }

    /// Funk norm: the F > 0 with p + v/F ∈ ∂U.
    pub fn funk_norm(&self, p: &Point, v: &Vector3<f64>) -> Result<f64> {
        self.body.check_interior(p)?;
        if v.norm() == 0.0 {
            return Err(Error::argument("Funk norm needs a nonzero vector"));
        }
        self.funk_norm_unchecked(p, v)
    }

    fn funk_norm_unchecked(&self, p: &Point, v: &Vector3<f64>) -> Result<f64> {
        let n = v.norm();
        let s_plus = self.body.ray_exit(p, &(v / n), &self.config)?;
        Ok(n / s_plus)
    }

    /// Busemann–Hausdorff density Vol(𝔹^dim)/Vol(B_F(p)) of the Hilbert
    /// metric in Cartesian coordinates.
    ///
    /// The tangent unit ball becomes very thin near ∂U, so it is first
    /// mapped to a nearly round body by a linear map fitted to its second
    /// moments; the polar volume formula is then applied to the round body.
    pub fn busemann_density(&self, p: &Point) -> Result<f64> {
        self.body.check_interior(p)?;
        self.busemann_density_unchecked(p)
    }

    pub(crate) fn busemann_density_unchecked(&self, p: &Point) -> Result<f64> {
        let dim = self.dim();
        let axes = self.normal_axes(p);
        let vol = rounded_ball_volume(dim, &axes, &self.density_rule, |w| {
            self.finsler_norm_unchecked(p, w)
        })?;
        Ok(unit_ball_volume(dim) / vol)
    }

    /// Busemann–Hausdorff density of the Funk metric.
    ///
    /// The Funk unit ball at p is U − p, star-shaped about an origin that
    /// may sit close to its boundary, so the polar integral is split at the
    /// hyperplane orthogonal to the local normal and integrated adaptively.
    pub fn funk_density(&self, p: &Point) -> Result<f64> {
        self.body.check_interior(p)?;
        self.funk_density_unchecked(p)
    }

    pub(crate) fn funk_density_unchecked(&self, p: &Point) -> Result<f64> {
        let dim = self.dim();
        let axes = self.normal_axes(p);
        let tol = self.config.integral_rel_tol;
        let radius_pow = |w: &Vector3<f64>| -> Result<f64> {
            let f = self.funk_norm_unchecked(p, w)?;
            Ok(f.powi(-(dim as i32)))
        };
        let vol = if dim == 2 {
            let (n, t) = (axes[0], axes[1]);
            let f = |th: f64| radius_pow(&(n * th.cos() + t * th.sin()));
            integrate_adaptive(f, 0.0, 2.0 * PI, 16, tol)? / 2.0
        } else {
            let (n, e1, e2) = (axes[0], axes[1], axes[2]);
            let na = self.config.density_rule_sphere2.n_azimuth.max(8);
            let h = 2.0 * PI / na as f64;
            let ring = |z: f64| -> Result<f64> {
                let s = (1.0 - z * z).max(0.0).sqrt();
                let mut acc = 0.0;
                for j in 0..na {
                    let (sn, cs) = (h * j as f64).sin_cos();
                    acc += radius_pow(&(n * z + (e1 * cs + e2 * sn) * s))?;
                }
                Ok(acc * h)
            };
            (integrate_adaptive(ring, -1.0, 0.0, 4, tol)?
                + integrate_adaptive(ring, 0.0, 1.0, 4, tol)?)
                / 3.0
        };
        Ok(unit_ball_volume(dim) / vol)
    }

    /// Orthonormal frame whose first vector is the gauge normal at p (the
    /// standard basis at the origin).
    fn normal_axes(&self, p: &Point) -> Vec<Vector3<f64>> {
        let dim = self.dim();
        let grad = if p.norm() > 0.0 {
            self.body.gauge_jet(p).gradient
        } else {
            Vector3::zeros()
        };
        let n = match Direction::new(grad) {
            Ok(n) => n,
            Err(_) => Direction::from_angle(0.0),
        };
        let mut axes = vec![*n.as_vector()];
        axes.extend(tangent_frame(dim, &n));
        axes
    }
}

/// Euclidean volume of the star body {w : F(w) ≤ 1} for a positively
/// homogeneous `norm`, after rounding it with a linear map.
///
/// The initial map scales the given axes by the body's width along them;
/// each further step whitens the second-moment tensor of the mapped body.
pub(crate) fn rounded_ball_volume<F>(
    dim: usize,
    axes: &[Vector3<f64>],
    rule: &QuadratureRule,
    norm: F,
) -> Result<f64>
where
    F: Fn(&Vector3<f64>) -> Result<f64>,
{
    let mut map = Matrix3::zeros();
    if dim == 2 {
        map[(2, 2)] = 1.0;
    }
    for e in axes.iter().take(dim) {
        let width = 2.0 / (norm(e)? + norm(&-e)?);
        map += e * e.transpose() * width;
    }
    let d = dim as f64;
    let identity = Matrix3::identity();
    let mut vol = 0.0;
    for step in 0..=MAX_ROUNDING_STEPS {
        let mut v = 0.0;
        let mut moment = Matrix3::zeros();
        for (w, wt) in rule.nodes.iter().zip(&rule.weights) {
            let w = w.as_vector();
            let f = norm(&(map * w))?;
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Evaluation {
                    node: [w.x, w.y, w.z],
                    value: f,
                });
            }
            let r = 1.0 / f;
            let rd = r.powi(dim as i32);
            v += wt * rd;
            moment += w * w.transpose() * (wt * rd * r * r);
        }
        v /= d;
        vol = v * map.determinant().abs();
        if step == MAX_ROUNDING_STEPS {
            break;
        }
        let mut a2 = moment / v;
        if dim == 2 {
            a2[(2, 2)] = 1.0;
        }
        let eig = a2.symmetric_eigen();
        let root = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
        let a = eig.eigenvectors * Matrix3::from_diagonal(&root) * eig.eigenvectors.transpose();
        if (a - identity).amax() < ROUNDING_TOL {
            break;
        }
        map *= a;
    }
    Ok(vol)
}

/// Klein-model norm of the ball of `radius` about `center`:
/// √(‖v‖²/(ρ²−‖p̃‖²) + ⟨v,p̃⟩²/(ρ²−‖p̃‖²)²) with p̃ = p − center.
pub fn klein_norm(radius: f64, center: &Point, p: &Point, v: &Vector3<f64>) -> Result<f64> {
    let pt = p - center;
    let gap = radius * radius - pt.norm_squared();
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::domain(p, "outside the Klein ball"));
    }
    let vp = v.dot(&pt);
    Ok((v.norm_squared() / gap + vp * vp / (gap * gap)).sqrt())
}

/// Busemann–Hausdorff density of the Klein metric of a ball of `radius` at
/// Euclidean depth `depth` below its boundary.
pub fn klein_density(dim: usize, radius: f64, depth: f64) -> f64 {
    let x = 1.0 - depth / radius;
    (1.0 - x * x).powf(-(dim as f64 + 1.0) / 2.0) / radius.powi(dim as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodySpec;
    use approx::assert_abs_diff_eq;

    fn query(spec: BodySpec) -> MetricQuery {
        MetricQuery::new(ConvexBody::new(spec).unwrap(), ToleranceConfig::default())
    }

    fn disk() -> MetricQuery {
        query(BodySpec::ball(2, 1.0))
    }

    fn v2(x: f64, y: f64) -> Vector3<f64> {
        Vector3::new(x, y, 0.0)
    }

    #[test]
    fn distance_examples() {
        let q = disk();
        let d = q.hilbert_distance(&v2(0.0, 0.0), &v2(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(d, 0.5 * 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(d, 0.5f64.atanh(), epsilon = 1e-12);
        let d = q
            .hilbert_distance(&v2(0.0, 0.0), &v2(0.0, 1f64.tanh()))
            .unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        let p = v2(0.3, -0.2);
        assert_eq!(q.hilbert_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn distance_domain_errors() {
        let q = disk();
        assert!(matches!(
            q.hilbert_distance(&v2(0.0, 0.0), &v2(1.0, 0.0)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            q.hilbert_distance(&v2(2.0, 0.0), &v2(0.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn distance_matches_klein_model_in_a_ball() {
        // Klein model: cosh d = (1 − ⟨p,q⟩)/√((1−|p|²)(1−|q|²)) on the unit ball
        let q = query(BodySpec::ball(3, 1.0));
        let pts: [Vector3<f64>; 3] = [
            Vector3::new(0.2, -0.4, 0.1),
            Vector3::new(-0.7, 0.3, 0.5),
            Vector3::new(0.9, 0.0, -0.3),
        ];
        for a in &pts {
            for b in &pts {
                let expected: f64 = ((1.0 - a.dot(b))
                    / ((1.0 - a.norm_squared()) * (1.0 - b.norm_squared())).sqrt())
                .max(1.0);
                let expected = expected.acosh();
                let d = q.hilbert_distance(a, b).unwrap();
                assert_abs_diff_eq!(d, expected, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn finsler_norm_examples() {
        let q = disk();
        assert_abs_diff_eq!(
            q.finsler_norm(&v2(0.0, 0.0), &v2(1.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            q.finsler_norm(&v2(0.5, 0.0), &v2(1.0, 0.0)).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            q.finsler_norm(&v2(0.5, 0.0), &v2(0.0, 1.0)).unwrap(),
            2.0 / 3f64.sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(q.finsler_norm(&v2(0.5, 0.0), &v2(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn klein_norm_examples() {
        let o = Point::zeros();
        assert_abs_diff_eq!(
            klein_norm(1.0, &o, &o, &v2(0.6, 0.8)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            klein_norm(1.0, &o, &v2(0.5, 0.0), &v2(1.0, 0.0)).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            klein_norm(2.0, &o, &o, &v2(1.0, 0.0)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(klein_norm(1.0, &o, &v2(1.0, 0.0), &v2(1.0, 0.0)).is_err());
    }

    #[test]
    fn finsler_norm_equals_klein_norm_on_balls() {
        let q = query(BodySpec::offset_ball(1.5, &[0.3, -0.2]));
        let c = v2(0.3, -0.2);
        for (p, v) in [
            (v2(0.1, 0.2), v2(1.0, 0.3)),
            (v2(-0.9, 0.5), v2(-0.2, 0.7)),
            (v2(1.6, -0.3), v2(0.5, 0.5)),
        ] {
            let f = q.finsler_norm(&p, &v).unwrap();
            let k = klein_norm(1.5, &c, &p, &v).unwrap();
            assert_abs_diff_eq!(f / k, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn funk_norm_examples() {
        let q = disk();
        assert_abs_diff_eq!(
            q.funk_norm(&v2(0.0, 0.0), &v2(0.0, 1.0)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            q.funk_norm(&v2(0.5, 0.0), &v2(1.0, 0.0)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            q.funk_norm(&v2(0.5, 0.0), &v2(-1.0, 0.0)).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            q.funk_norm(&v2(0.5, 0.0), &v2(0.0, 0.0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn density_examples() {
        let q = disk();
        assert_abs_diff_eq!(
            q.busemann_density(&v2(0.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            q.busemann_density(&v2(0.5, 0.0)).unwrap(),
            0.75f64.powf(-1.5),
            epsilon = 1e-10
        );
        let q = query(BodySpec::ball(2, 2.0));
        assert_abs_diff_eq!(
            q.busemann_density(&v2(0.0, 0.0)).unwrap(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn density_matches_klein_oracle_near_the_boundary() {
        for dim in [2, 3] {
            let q = query(BodySpec::ball(dim, 2.0));
            for depth in [1e-1, 1e-3, 1e-5, 1e-7] {
                let p = Vector3::new(0.6, -0.8, 0.0).normalize() * (2.0 - depth);
                let sigma = q.busemann_density(&p).unwrap();
                let expected = klein_density(dim, 2.0, depth);
                assert_abs_diff_eq!(sigma / expected, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn funk_density_examples() {
        let q = disk();
        assert_abs_diff_eq!(q.funk_density(&v2(0.0, 0.0)).unwrap(), 1.0, epsilon = 1e-10);
        let q2 = query(BodySpec::ball(2, 2.0));
        assert_abs_diff_eq!(
            q2.funk_density(&v2(0.0, 0.0)).unwrap(),
            0.25,
            epsilon = 1e-10
        );

        // brute-force polar quadrature of F^{-2} at (0.5, 0)
        let p = v2(0.5, 0.0);
        let n = 20000;
        let h = 2.0 * PI / n as f64;
        let area: f64 = (0..n)
            .map(|j| {
                let th = h * j as f64;
                q.funk_norm(&p, &v2(th.cos(), th.sin())).unwrap().powi(-2)
            })
            .sum::<f64>()
            * h
            / 2.0;
        assert_abs_diff_eq!(q.funk_density(&p).unwrap(), PI / area, epsilon = 1e-8);
    }

    #[test]
    fn funk_density_is_that_of_the_translated_body() {
        // the Funk unit ball at p is U − p
        let q = query(BodySpec::ellipse(2.0, 1.0));
        for p in [
            v2(0.0, 0.0),
            v2(1.2, 0.3),
            v2(1.999, 0.0),
            v2(0.0, -0.99999),
        ] {
            assert_abs_diff_eq!(q.funk_density(&p).unwrap(), 0.5, epsilon = 1e-7);
        }
        let q = query(BodySpec::ellipsoid(1.5, 1.0, 0.8));
        let expected = 1.0 / (1.5 * 0.8);
        for p in [
            Vector3::zeros(),
            Vector3::new(1.0, 0.2, -0.3),
            Vector3::new(0.0, 0.0, 0.7999),
        ] {
            assert_abs_diff_eq!(q.funk_density(&p).unwrap() / expected, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn ellipse_density_is_affine_image_of_disk_density() {
        // x ↦ (2x, y) maps the disk to ellipse(2,1); densities scale by 1/2
        let e = query(BodySpec::ellipse(2.0, 1.0));
        for p in [v2(0.3, 0.4), v2(1.8, 0.2), v2(-1.0, -0.86)] {
            let pd = v2(p.x / 2.0, p.y);
            let expected = (1.0 - pd.norm_squared()).powf(-1.5) / 2.0;
            assert_abs_diff_eq!(
                e.busemann_density(&p).unwrap() / expected,
                1.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn rounded_volume_of_a_thin_ellipse() {
        let rule = QuadratureRule::circle(64);
        let (a, b) = (3.0, 1e-4);
        let norm = |w: &Vector3<f64>| Ok(((w.x / a).powi(2) + (w.y / b).powi(2)).sqrt());
        let axes = [Vector3::new(0.6, 0.8, 0.0), Vector3::new(-0.8, 0.6, 0.0)];
        let vol = rounded_ball_volume(2, &axes, &rule, norm).unwrap();
        assert_abs_diff_eq!(vol / (PI * a * b), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_ball_volumes() {
        assert_abs_diff_eq!(unit_ball_volume(2), PI);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * PI / 3.0);
        assert_abs_diff_eq!(unit_ball_volume(4), PI * PI / 2.0, epsilon = 1e-14);
    }
}
