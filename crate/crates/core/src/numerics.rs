//! Quadrature on S¹/S², bracketed root finding, adaptive 1D integration,
//! golden-section search and least-squares slope fitting.
//!
//! Everything here is a pure function of its inputs. Sums are accumulated in
//! node order so repeated runs are bit-identical.

use std::f64::consts::PI;

use crate::body::Direction;
use crate::error::{Error, Result};

/// Numerical settings shared by every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceConfig {
    /// Absolute bracket width for root finding.
    pub root_tol: f64,
    /// Trapezoid points for integrals over S¹ (sphere lengths, body integrals).
    pub quad_points_circle: usize,
    /// Product rule for integrals over S².
    pub quad_rule_sphere2: Sphere2Rule,
    /// Relative tolerance of adaptive 1D integration.
    pub integral_rel_tol: f64,
    /// Trapezoid points on S¹ for tangent unit-ball areas (2D densities and
    /// pulled-back sphere norms).
    pub density_points_circle: usize,
    /// Product rule on S² for tangent unit-ball volumes in 3D.
    pub density_rule_sphere2: Sphere2Rule,
    /// Direction points for the outer integral of ball volumes in 2D.
    pub volume_points_circle: usize,
    /// Direction rule for the outer integral of ball volumes in 3D.
    pub volume_rule_sphere2: Sphere2Rule,
}

/// Gauss–Legendre in cos φ times uniform azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sphere2Rule {
    pub n_polar: usize,
    pub n_azimuth: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            root_tol: 1e-12,
            quad_points_circle: 2048,
            quad_rule_sphere2: Sphere2Rule {
                n_polar: 64,
                n_azimuth: 128,
            },
            integral_rel_tol: 1e-8,
            density_points_circle: 64,
            density_rule_sphere2: Sphere2Rule {
                n_polar: 10,
                n_azimuth: 20,
            },
            volume_points_circle: 256,
            volume_rule_sphere2: Sphere2Rule {
                n_polar: 16,
                n_azimuth: 32,
            },
        }
    }
}

impl ToleranceConfig {
    /// Cheap settings for 3D experiments.
    pub fn coarse() -> Self {
        Self {
            quad_points_circle: 512,
            quad_rule_sphere2: Sphere2Rule {
                n_polar: 16,
                n_azimuth: 32,
            },
            integral_rel_tol: 1e-6,
            density_points_circle: 32,
            density_rule_sphere2: Sphere2Rule {
                n_polar: 8,
                n_azimuth: 16,
            },
            volume_points_circle: 128,
            volume_rule_sphere2: Sphere2Rule {
                n_polar: 10,
                n_azimuth: 20,
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("root_tol", self.root_tol),
            ("integral_rel_tol", self.integral_rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("quad_points_circle", self.quad_points_circle),
            ("density_points_circle", self.density_points_circle),
            ("volume_points_circle", self.volume_points_circle),
        ];
        for (name, n) in counts {
            if n < 8 {
                return Err(Error::argument(format!(
                    "{name} must be at least 8, got {n}"
                )));
            }
        }
        for (name, r) in [
            ("quad_rule_sphere2", self.quad_rule_sphere2),
            ("density_rule_sphere2", self.density_rule_sphere2),
            ("volume_rule_sphere2", self.volume_rule_sphere2),
        ] {
            if r.n_polar < 2 || r.n_azimuth < 4 {
                return Err(Error::argument(format!("{name} is too small: {r:?}")));
            }
        }
        Ok(())
    }
}

/// Sphere dimension of a direction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereDim {
    /// The circle S¹.
    One,
    /// The sphere S².
    Two,
}

impl SphereDim {
    /// Total measure of the sphere.
    pub fn measure(self) -> f64 {
        match self {
            SphereDim::One => 2.0 * PI,
            SphereDim::Two => 4.0 * PI,
        }
    }
}

/// Nodes and positive weights approximating the uniform measure on S¹ or S².
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dimension: SphereDim,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Periodic trapezoid rule with `n` equally spaced angles starting at 0.
    pub fn circle(n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let nodes = (0..n)
            .map(|j| Direction::from_angle(h * j as f64))
            .collect();
        Self {
            dimension: SphereDim::One,
            nodes,
            weights: vec![h; n],
        }
    }

    /// Gauss–Legendre in z = cos φ times the periodic trapezoid in azimuth.
    pub fn sphere2(rule: Sphere2Rule) -> Self {
        let (zs, wz) = gauss_legendre(rule.n_polar);
        let h = 2.0 * PI / rule.n_azimuth as f64;
        let mut nodes = Vec::with_capacity(rule.n_polar * rule.n_azimuth);
        let mut weights = Vec::with_capacity(rule.n_polar * rule.n_azimuth);
        for (z, w) in zs.iter().zip(&wz) {
            for j in 0..rule.n_azimuth {
                // half-step stagger keeps nodes off the coordinate planes
                let theta = h * (j as f64 + 0.5);
                nodes.push(Direction::from_spherical(*z, theta));
                weights.push(w * h);
            }
        }
        Self {
            dimension: SphereDim::Two,
            nodes,
            weights,
        }
    }

    /// Rule for S^{dim-1}: the circle for dim 2, the product rule for dim 3.
    pub fn for_ambient(dim: usize, circle_points: usize, sphere2: Sphere2Rule) -> Result<Self> {
        match dim {
            2 => Ok(Self::circle(circle_points)),
            3 => Ok(Self::sphere2(sphere2)),
            _ => Err(Error::argument(format!("unsupported dimension {dim}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted node sum of an infallible integrand.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Direction) -> f64,
    {
        self.try_integrate(|u| Ok(f(u)))
    }

    /// Weighted node sum of a fallible integrand; the first error aborts.
    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Direction) -> Result<f64>,
    {
        let mut sum = 0.0;
        for (u, w) in self.nodes.iter().zip(&self.weights) {
            let value = f(u)?;
            if !value.is_finite() {
                return Err(Error::Evaluation {
                    node: u.to_array(),
                    value,
                });
            }
            sum += w * value;
        }
        Ok(sum)
    }
}

/// Periodic trapezoid approximation of ∫_{S¹} f.
pub fn integrate_circle<F>(f: F, n_points: usize) -> Result<f64>
where
    F: Fn(&Direction) -> f64,
{
    if n_points < 8 {
        return Err(Error::argument(format!(
            "integrate_circle needs at least 8 points, got {n_points}"
        )));
    }
    QuadratureRule::circle(n_points).integrate(f)
}

/// Weighted node sum approximating ∫_{S²} f.
pub fn integrate_sphere2<F>(f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&Direction) -> f64,
{
    if rule.dimension != SphereDim::Two {
        return Err(Error::argument("integrate_sphere2 needs a rule on S²"));
    }
    rule.integrate(f)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Root of `g` on `[a, b]` located to a bracket of width at most `tol`
/// (or to the resolution of f64 near the root).
///
/// Brent's method: inverse quadratic / secant steps, falling back to
/// bisection whenever the fast step leaves the bracket or stalls.
pub fn find_root_bracketed<G>(g: G, a: f64, b: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    find_root_bracketed_with(|x| Ok(g(x)), a, b, tol)
}

pub(crate) fn find_root_bracketed_with<G>(g: G, a: f64, b: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = g(a)?;
    let mut fb = g(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            a,
            b,
            ga: fa,
            gb: fb,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = g(b)?;
        if !fb.is_finite() {
            return Err(Error::Evaluation {
                node: [b, 0.0, 0.0],
                value: fb,
            });
        }
    }
    Ok(b)
}

/// Least-squares slope of y against x.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const GK15_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK15_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = GK15_WK[7] * fc;
    let mut gauss = GK15_WG[3] * fc;
    for j in 0..7 {
        let dx = h * GK15_X[j];
        let fsum = f(c - dx)? + f(c + dx)?;
        kronrod += GK15_WK[j] * fsum;
        if j % 2 == 1 {
            gauss += GK15_WG[j / 2] * fsum;
        }
    }
    let value = kronrod * h;
    if !value.is_finite() {
        return Err(Error::Evaluation {
            node: [c, 0.0, 0.0],
            value,
        });
    }
    Ok((value, ((kronrod - gauss) * h).abs()))
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`, starting from
/// `initial_panels` equal panels and bisecting the worst panel until the
/// summed error estimate is below `rel_tol` times the integral.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rel_tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if b <= a {
        return Ok(0.0);
    }
    let n0 = initial_panels.max(1);
    let h = (b - a) / n0 as f64;
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(n0 * 4);
    for i in 0..n0 {
        let lo = a + h * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + h };
        let (v, e) = gk15(&f, lo, hi)?;
        panels.push((lo, hi, v, e));
    }
    for _ in 0..2000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || err < 1e-300 {
            break;
        }
        let (worst, _) =
            panels.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc },
            );
        let (lo, hi, _, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid)?;
        let (v2, e2) = gk15(&f, mid, hi)?;
        panels[worst] = (lo, mid, v1, e1);
        panels.push((mid, hi, v2, e2));
    }
    // sum in left-to-right order for reproducibility
    panels.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Argmax of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_section_max<F>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
