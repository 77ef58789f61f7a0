//! Large-radius behaviour: entropy fits, ball/sphere volume ratios and the
//! constants bounding them.

use std::f64::consts::PI;

use crate::body::{BodySummary, ConvexBody, Direction};
use crate::error::{Error, Result};
use crate::metric::MetricQuery;
use crate::numerics::{fit_slope, integrate_adaptive, QuadratureRule, ToleranceConfig};
use crate::spheres::{ball_volume_polar, sphere_area, MAX_RADIUS};

/// Fit window for entropy estimates.
pub const ENTROPY_WINDOW: (f64, f64) = (4.0, 8.0);

/// Grid size giving the 1024-angle planar grid or the 64×128 spatial grid.
pub fn default_summary(body: &ConvexBody) -> BodySummary {
    if body.dim() == 2 {
        body.summarize(1024)
    } else {
        body.summarize(128)
    }
}

/// One radius of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct ExperimentRow {
    pub t: f64,
    pub sphere_area: f64,
    pub ball_volume: f64,
    pub ratio: f64,
    pub ln_area_over_t: f64,
}

impl ExperimentRow {
    fn new(t: f64, sphere_area: f64, ball_volume: f64) -> Self {
        Self {
            t,
            sphere_area,
            ball_volume,
            ratio: ball_volume / sphere_area,
            ln_area_over_t: sphere_area.ln() / t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Rows in strictly increasing t.
    pub rows: Vec<ExperimentRow>,
    pub summary: BodySummary,
    pub constants: BoundConstants,
}

/// Shell offsets and volume-asymptote constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// −½ ln(½(1 + 1/c)).
    pub d1: f64,
    /// −½ ln(½(1 + c)).
    pub d2: f64,
    /// 2⁻ⁿ ∫ (ω/R)^{n/2} du.
    pub c1: f64,
    /// 2⁻ⁿ (R/ω₀)^{(n+2)/2} ∫ (ω/r)^{n/2} du.
    pub c2: f64,
}

/// Upper and lower bounds on lim Vol(B_t)/Vol(S_t) in three forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    pub upper_sharp: f64,
    pub lower_sharp: f64,
    pub upper_simple: f64,
    pub lower_simple: f64,
    pub upper_symmetric: f64,
    pub lower_symmetric: f64,
}

impl RatioBounds {
    pub fn as_pairs(&self) -> [(&'static str, f64); 6] {
        [
            ("upper_sharp", self.upper_sharp),
            ("lower_sharp", self.lower_sharp),
            ("upper_simple", self.upper_simple),
            ("lower_simple", self.lower_simple),
            ("upper_symmetric", self.upper_symmetric),
            ("lower_symmetric", self.lower_symmetric),
        ]
    }
}

/// Minimum of cos∠(u, N(ω(u)u)) over a grid against the bound ω₀/R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Report {
    pub min_cos: f64,
    pub bound: f64,
}

impl Lemma2Report {
    pub fn holds(&self) -> bool {
        self.min_cos >= self.bound - 1e-9
    }
}

fn check_entropy_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 4 {
        return Err(Error::argument("entropy fits need at least 4 radii"));
    }
    if t_grid.iter().all(|t| *t == t_grid[0]) {
        return Err(Error::DegenerateFit);
    }
    let (lo, hi) = ENTROPY_WINDOW;
    if let Some(t) = t_grid.iter().find(|t| !(lo..=hi).contains(*t)) {
        return Err(Error::argument(format!(
            "entropy radius {t} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn check_curve_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::argument("empty radius grid"));
    }
    for t in t_grid {
        if !(*t > 0.0 && *t <= MAX_RADIUS) {
            return Err(Error::argument(format!(
                "radius {t} outside (0, {MAX_RADIUS}]"
            )));
        }
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::argument("radii must be strictly increasing"));
    }
    Ok(())
}

/// Least-squares slope of ln Vol(S_t) against t.
pub fn entropy_spheres(q: &MetricQuery, t_grid: &[f64]) -> Result<f64> {
    check_entropy_grid(t_grid)?;
    let pts = t_grid
        .iter()
        .map(|t| Ok((*t, sphere_area(q, *t)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    fit_slope(&pts)
}

/// Least-squares slope of ln Vol(B_t) against t.
pub fn entropy_balls(q: &MetricQuery, t_grid: &[f64]) -> Result<f64> {
    check_entropy_grid(t_grid)?;
    let pts = t_grid
        .iter()
        .map(|t| Ok((*t, ball_volume_polar(q, *t)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    fit_slope(&pts)
}

/// Sphere and ball entropy slopes from one pass over the radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub spheres: f64,
    pub balls: f64,
}

pub fn entropy_curve(
    q: &MetricQuery,
    t_grid: &[f64],
) -> Result<(ExperimentReport, EntropyEstimate)> {
    check_entropy_grid(t_grid)?;
    let report = ratio_curve(q, t_grid)?;
    let fit = |f: fn(&ExperimentRow) -> f64| {
        let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.t, f(r).ln())).collect();
        fit_slope(&pts)
    };
    let estimate = EntropyEstimate {
        spheres: fit(|r| r.sphere_area)?,
        balls: fit(|r| r.ball_volume)?,
    };
    Ok((report, estimate))
}

/// Sphere area, ball volume and their ratio at each radius.
pub fn ratio_curve(q: &MetricQuery, t_grid: &[f64]) -> Result<ExperimentReport> {
    check_curve_grid(t_grid)?;
    let rows = t_grid
        .iter()
        .map(|t| {
            Ok(ExperimentRow::new(
                *t,
                sphere_area(q, *t)?,
                ball_volume_polar(q, *t)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = default_summary(q.body());
    let constants = shell_constants(q.body(), &summary, q.config())?;
    Ok(ExperimentReport {
        rows,
        summary,
        constants,
    })
}

fn sphere_rule(body: &ConvexBody, cfg: &ToleranceConfig) -> Result<QuadratureRule> {
    QuadratureRule::for_ambient(body.dim(), cfg.quad_points_circle, cfg.quad_rule_sphere2)
}

/// Euclidean area element of the boundary parametrization u ↦ ω(u)u.
fn boundary_element(body: &ConvexBody, u: &Direction) -> f64 {
    let tangents = body.radial_jet(u).boundary_tangents();
    if tangents.len() == 1 {
        tangents[0].norm()
    } else {
        tangents[0].cross(&tangents[1]).norm()
    }
}

/// Euclidean n-volume of ∂U.
pub fn boundary_area(body: &ConvexBody, cfg: &ToleranceConfig) -> Result<f64> {
    sphere_rule(body, cfg)?.integrate(|u| boundary_element(body, u))
}

pub fn shell_constants(
    body: &ConvexBody,
    summary: &BodySummary,
    cfg: &ToleranceConfig,
) -> Result<BoundConstants> {
    let c = summary.asymmetry;
    let n = body.sphere_dim() as f64;
    let h = n / 2.0;
    let rule = sphere_rule(body, cfg)?;
    let (r_in, r_out) = (summary.inner_radius, summary.outer_radius);
    let int_outer = rule.integrate(|u| (body.radial(u) / r_out).powf(h))?;
    let int_inner = rule.integrate(|u| (body.radial(u) / r_in).powf(h))?;
    let scale = 2f64.powf(-n);
    Ok(BoundConstants {
        d1: 0.5 * (2.0 / (1.0 + 1.0 / c)).ln(),
        d2: 0.5 * (2.0 / (1.0 + c)).ln(),
        c1: scale * int_outer,
        c2: scale * (r_out / summary.omega0).powf((n + 2.0) / 2.0) * int_inner,
    })
}

/// Measure of the unit sphere Sⁿ.
fn sphere_measure(n: usize) -> f64 {
    match n {
        1 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// The six ratio bounds; every exponent uses n = dim − 1.
pub fn theorem2_bounds(
    body: &ConvexBody,
    summary: &BodySummary,
    cfg: &ToleranceConfig,
) -> Result<RatioBounds> {
    let n = body.sphere_dim() as f64;
    let h = n / 2.0;
    let rule = sphere_rule(body, cfg)?;
    let over_sphere = rule.integrate(|u| body.radial(u).powf(h))?;
    let over_boundary = rule.integrate(|u| body.radial(u).powf(-h) * boundary_element(body, u))?;
    let area_ratio = sphere_measure(body.sphere_dim()) / boundary_area(body, cfg)?;

    let BodySummary {
        omega0: w0,
        omega1: w1,
        asymmetry: c,
        curvature_min: k,
        curvature_max: kk,
        ..
    } = *summary;
    let integrals = over_sphere / over_boundary;
    let kw0 = k * w0;
    Ok(RatioBounds {
        upper_sharp: c.powf(h) * (kk / k).powf(h) / kw0.powf(h + 1.0) * integrals / n,
        lower_sharp: c.powf(-h) * (k / kk).powf(h) * kw0.powf(h) * integrals / n,
        upper_simple: (kk / k).powf(h) * (w1 / w0).powf(n + 1.0) * (w1 / k).powf(h) / (k * w1)
            * area_ratio
            / n,
        lower_simple: (k / kk).powf(h) * (w0 / w1).powf(h) * w0.powf(n) * kw0.powf(h) * area_ratio
            / n,
        upper_symmetric: c.powf(h) * (kk / k).powf(h) * w1.powf(n) / kw0.powf(h + 1.0) * area_ratio
            / n,
        lower_symmetric: c.powf(-h) * (k / kk).powf(h) * kw0.powf(h) * w0.powf(n) * area_ratio / n,
    })
}

/// Smallest cosine between the radial direction and the boundary normal.
pub fn lemma2_check(body: &ConvexBody, summary: &BodySummary, grid: usize) -> Result<Lemma2Report> {
    if grid < 512 {
        return Err(Error::argument(
            "normal-angle check needs a grid of at least 512",
        ));
    }
    let min_cos = body
        .direction_grid(grid)
        .iter()
        .map(|u| body.normal_and_curvature(u).normal.dot(u.as_vector()))
        .fold(f64::INFINITY, f64::min);
    Ok(Lemma2Report {
        min_cos,
        bound: summary.omega0 / summary.outer_radius,
    })
}

/// Forward Funk sphere radius ω(u)(1 − e^{−t}).
pub fn funk_radial(body: &ConvexBody, u: &Direction, t: f64) -> f64 {
    -body.radial(u) * (-t).exp_m1()
}

/// Funk length of the forward sphere and Funk volume of the forward ball
/// at each radius (planar bodies).
pub fn funk_ratio_curve(q: &MetricQuery, t_grid: &[f64]) -> Result<ExperimentReport> {
    let body = q.body();
    if body.dim() != 2 {
        return Err(Error::argument("Funk experiment needs a planar body"));
    }
    check_curve_grid(t_grid)?;
    let cfg = q.config();
    let length_rule = QuadratureRule::circle(cfg.quad_points_circle);
    let volume_rule = QuadratureRule::circle(cfg.volume_points_circle);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let shrink = -(-t).exp_m1();
        // counter-clockwise circuit of the forward sphere
        let length = length_rule.try_integrate(|u| {
            let jet = body.radial_jet(u);
            let c = u.as_vector() * (jet.omega * shrink);
            let dc = (u.as_vector() * jet.gradient[0] + jet.frame[0] * jet.omega) * shrink;
            q.funk_norm(&c, &dc)
        })?;
        // r = ω(1 − e^{−x}) for x ∈ [0, t]
        let volume = volume_rule.try_integrate(|u| {
            let a = body.radial(u);
            let inner = |x: f64| -> Result<f64> {
                let r = -a * (-x).exp_m1();
                Ok(q.funk_density(&(u.as_vector() * r))? * r * a * (-x).exp())
            };
            integrate_adaptive(
                inner,
                0.0,
                t,
                t.ceil().max(1.0) as usize,
                cfg.integral_rel_tol,
            )
        })?;
        rows.push(ExperimentRow::new(t, length, volume));
    }
    let summary = default_summary(body);
    let constants = shell_constants(body, &summary, cfg)?;
    Ok(ExperimentReport {
        rows,
        summary,
        constants,
    })
}

/// (ball volume, sphere area) of radius t in hyperbolic space ℍ^{n+1}.
pub fn hyperbolic_oracle(t: f64, n: usize) -> Result<(f64, f64)> {
    match n {
        1 => Ok((2.0 * PI * (t.cosh() - 1.0), 2.0 * PI * t.sinh())),
        2 => Ok((
            PI * ((2.0 * t).sinh() - 2.0 * t),
            4.0 * PI * t.sinh().powi(2),
        )),
        _ => Err(Error::argument(format!(
            "hyperbolic oracle supports n = 1, 2, not {n}"
        ))),
    }
}
