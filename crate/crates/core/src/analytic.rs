//! Closed-form curves used as equilibria, barriers and sub-solutions, and the
//! canonical initial family `y = sigma * phi(x)`.

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{FlowError, Result};
use crate::geometry::{GraphProfile, PolarProfile, ProblemParams, SampledCurve};
use crate::scalar::{lit, to_f64, Scalar};

/// Radius of the lower cap `y = sqrt(1/A^2 - x^2) - c` along the ray at `theta`.
pub fn lower_radius<T: Scalar>(params: &ProblemParams<T>, theta: T) -> T {
    let c = params.center_height();
    let r = params.eq_radius();
    let ct = theta.cos();
    -c * theta.sin() + (r * r - c * c * ct * ct).max(T::zero()).sqrt()
}

/// Radius of the upper arc (centre `(0, c)`, radius `1/A`) along the ray at `theta`.
pub fn upper_radius<T: Scalar>(params: &ProblemParams<T>, theta: T) -> T {
    let c = params.center_height();
    let r = params.eq_radius();
    let ct = theta.cos();
    c * theta.sin() + (r * r - c * c * ct * ct).max(T::zero()).sqrt()
}

/// Lower equilibrium as a graph, exact at the nodes.
pub fn gamma_lower<T: Scalar>(params: &ProblemParams<T>) -> GraphProfile<T> {
    let c = params.center_height();
    let r2 = params.eq_radius() * params.eq_radius();
    GraphProfile::from_fn(*params, |x| (r2 - x * x).max(T::zero()).sqrt() - c)
        .expect("lower equilibrium is a valid graph")
}

/// Lower equilibrium in the polar chart.
pub fn gamma_lower_polar<T: Scalar>(params: &ProblemParams<T>) -> PolarProfile<T> {
    let (c, s) = params.trig_table();
    let cy = params.center_height();
    let r = params.eq_radius();
    let mut rho: Vec<T> = c.iter().zip(&s).map(|(&ct, &st)| -cy * st + (r * r - cy * cy * ct * ct).max(T::zero()).sqrt()).collect();
    let n = rho.len();
    rho[0] = params.half_span();
    rho[n - 1] = params.half_span();
    PolarProfile::new(*params, rho).expect("lower equilibrium is star-shaped")
}

/// Upper equilibrium `rho = c sin(theta) + sqrt(1/A^2 - c^2 cos^2(theta))`.
pub fn gamma_upper<T: Scalar>(params: &ProblemParams<T>) -> PolarProfile<T> {
    let (c, s) = params.trig_table();
    let cy = params.center_height();
    let r = params.eq_radius();
    let mut rho: Vec<T> = c.iter().zip(&s).map(|(&ct, &st)| cy * st + (r * r - cy * cy * ct * ct).max(T::zero()).sqrt()).collect();
    let n = rho.len();
    rho[0] = params.half_span();
    rho[n - 1] = params.half_span();
    PolarProfile::new(*params, rho).expect("upper equilibrium is star-shaped")
}

/// `G(x, t) = C - t/b + b ln cos(x/b)` on `|x| < b pi / 2`.
pub fn grim_reaper_value<T: Scalar>(b: T, offset: T, x: T, t: T) -> Result<T> {
    let limit = b * T::FRAC_PI_2();
    if x.abs() >= limit {
        return Err(FlowError::GrimReaperDomain { x: to_f64(x.abs()), limit: to_f64(limit) });
    }
    Ok(offset - t / b + b * (x / b).cos().ln())
}

/// Exact `(G_t, G_x, G_xx)` of the Grim reaper.
pub fn grim_reaper_derivatives<T: Scalar>(b: T, x: T) -> (T, T, T) {
    let z = x / b;
    let sec2 = T::one() / (z.cos() * z.cos());
    (-T::one() / b, -z.tan(), -sec2 / b)
}

/// Positive root `x(t)` of `G(x, t) = 0`, or `None` once `t >= b C`.
pub fn grim_reaper_kink<T: Scalar>(b: T, offset: T, t: T) -> Option<T> {
    let height = offset - t / b;
    if height <= T::zero() {
        return None;
    }
    Some(b * (-height / b).exp().acos())
}

/// The capped Grim reaper `max(G, 0)` flattened to the axis outside
/// `|x| < b pi / 2`, sampled at the x-nodes plus the two kink points.
pub fn grim_reaper_subsolution<T: Scalar>(params: &ProblemParams<T>, b: T, offset: T, t: T) -> Result<SampledCurve<T>> {
    let a = params.half_span();
    let limit = lit::<T>(2.0) * a / T::PI();
    if !(b > T::zero()) || b >= limit {
        return Err(FlowError::GrimReaperWidth { b: to_f64(b), limit: to_f64(limit) });
    }
    let x = params.x_nodes();
    let kink = grim_reaper_kink(b, offset, t);
    let mut pts: Vec<[T; 2]> = Vec::with_capacity(x.len() + 2);
    let height = |xv: T| -> T {
        match kink {
            Some(k) if xv.abs() < k => grim_reaper_value(b, offset, xv, t).map(|g| g.max(T::zero())).unwrap_or(T::zero()),
            _ => T::zero(),
        }
    };
    for &xv in &x {
        if let Some(k) = kink {
            let last = pts.last().map(|p| p[0]);
            for kx in [-k, k] {
                if last.is_none_or(|l| l < kx) && xv > kx {
                    pts.push([kx, T::zero()]);
                }
            }
        }
        pts.push([xv, height(xv)]);
    }
    let n = pts.len();
    pts[0] = params.p();
    pts[n - 1] = params.q();
    SampledCurve::new(pts)
}

const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince 5(4) for a scalar autonomous ODE `y' = f(y)` on `[0, t_end]`.
pub fn integrate_scalar<T: Scalar>(f: impl Fn(T) -> T, y0: T, t_end: T, tol: T) -> T {
    let mut t = T::zero();
    let mut y = y0;
    let mut h = (t_end * lit::<T>(1e-3)).max(lit::<T>(1e-6));
    let mut k = [T::zero(); 7];
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        for i in 0..7 {
            let mut acc = y;
            for j in 0..i {
                acc = acc + h * lit::<T>(DP_A[i][j]) * k[j];
            }
            k[i] = f(acc);
        }
        let y5 = y + h * (0..7).map(|i| lit::<T>(DP_B5[i]) * k[i]).sum::<T>();
        let y4 = y + h * (0..7).map(|i| lit::<T>(DP_B4[i]) * k[i]).sum::<T>();
        let scale = tol * (T::one() + y.abs().max(y5.abs()));
        let err = (y5 - y4).abs() / scale;
        if err <= T::one() {
            t = t + h;
            y = y5;
        }
        let fac = if err == T::zero() {
            lit::<T>(5.0)
        } else {
            (lit::<T>(0.9) * err.powf(lit::<T>(-0.2))).max(lit::<T>(0.2)).min(lit::<T>(5.0))
        };
        h = h * fac;
    }
    y
}

/// `R(t)` solving `R' = A - 1/R`, `R(0) = r0 > 1/A`, by adaptive Runge-Kutta.
pub fn circle_radius<T: Scalar>(r0: T, force: T, t: T) -> Result<T> {
    if !(force * r0 > T::one()) {
        return Err(FlowError::CircleRadius { r0: to_f64(r0), eq: to_f64(T::one() / force) });
    }
    if t <= T::zero() {
        return Ok(r0);
    }
    let tol = lit::<T>(1e-13).max(T::epsilon() * lit::<T>(16.0));
    Ok(integrate_scalar(|r| force - T::one() / r, r0, t, tol))
}

/// Time at which the expanding circle reaches radius `r` (closed form).
pub fn circle_time_to_radius<T: Scalar>(r0: T, force: T, r: T) -> Result<T> {
    if !(force * r0 > T::one()) {
        return Err(FlowError::CircleRadius { r0: to_f64(r0), eq: to_f64(T::one() / force) });
    }
    Ok((r - r0) / force + ((force * r - T::one()) / (force * r0 - T::one())).ln() / (force * force))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierCircle<T> {
    pub center: [T; 2],
    pub radius: T,
}

/// The two barrier circles, the height `K` where the outer one meets the
/// positive y-axis, and the time `t_star` at which an expanding circle of
/// initial radius `R` reaches the outer radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierGeometry<T> {
    pub inner: BarrierCircle<T>,
    pub outer: BarrierCircle<T>,
    pub k: T,
    pub t_star: T,
}

pub fn barrier_geometry<T: Scalar>(params: &ProblemParams<T>, r: T) -> Result<BarrierGeometry<T>> {
    let a_force = params.force();
    if !(a_force * r > T::one()) {
        return Err(FlowError::CircleRadius { r0: to_f64(r), eq: to_f64(T::one() / a_force) });
    }
    let a = params.half_span();
    let scale = T::one() + r / a;
    let center = [r, scale * params.center_height()];
    let r2 = scale / a_force;
    let k = center[1] + (r2 * r2 - r * r).sqrt();
    let t_star = circle_time_to_radius(r, a_force, r2)?;
    Ok(BarrierGeometry {
        inner: BarrierCircle { center, radius: r },
        outer: BarrierCircle { center, radius: r2 },
        k,
        t_star,
    })
}

/// Shape of the initial profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi {
    /// `cos(pi x / (2a))`
    #[default]
    Cosine,
    /// `1 - (x/a)^2`
    Parabola,
}

impl Phi {
    pub fn eval<T: Scalar>(self, half_span: T, x: T) -> T {
        let z = x.abs() / half_span;
        match self {
            Phi::Cosine => {
                if z >= T::one() {
                    T::zero()
                } else {
                    (T::FRAC_PI_2() * z).cos()
                }
            }
            Phi::Parabola => (T::one() - z * z).max(T::zero()),
        }
    }
}

/// `Gamma_sigma = { y = sigma * phi(x) }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialFamily<T> {
    pub params: ProblemParams<T>,
    pub phi: Phi,
    pub sigma: T,
}

impl<T: Scalar> InitialFamily<T> {
    /// Validates that `Gamma_sigma` meets the upper equilibrium at most 4 times.
    pub fn new(params: ProblemParams<T>, phi: Phi, sigma: T) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(FlowError::InvalidParams(format!("sigma = {sigma} must be finite")));
        }
        let fam = InitialFamily { params, phi, sigma };
        initial_curve(&fam)?;
        Ok(fam)
    }

    pub fn with_sigma(&self, sigma: T) -> Result<Self> {
        Self::new(self.params, self.phi, sigma)
    }

    pub fn with_grid(&self, grid_n: usize) -> Result<Self> {
        Self::new(self.params.with_grid(grid_n)?, self.phi, self.sigma)
    }
}

/// Nodes of `sigma * phi`, rejecting profiles that meet the upper equilibrium
/// more than four times (endpoints included).
pub fn initial_curve<T: Scalar>(fam: &InitialFamily<T>) -> Result<GraphProfile<T>> {
    let a = fam.params.half_span();
    let g = GraphProfile::from_fn(fam.params, |x| fam.sigma * fam.phi.eval(a, x))?;
    let upper = gamma_upper(&fam.params).to_sampled();
    let tol = analysis::default_tolerance(&fam.params);
    match analysis::intersection_count(&g.to_sampled(), &upper, tol) {
        Ok(z) if z > 4 => Err(FlowError::TooManyIntersections(z)),
        Ok(_) => Ok(g),
        Err(e) => Err(e),
    }
}

/// Checks the at-most-four-intersections hypothesis over a set of amplitudes.
pub fn validate_phi<T: Scalar>(params: &ProblemParams<T>, phi: Phi, sigmas: &[T]) -> Result<()> {
    for &s in sigmas {
        initial_curve(&InitialFamily { params: *params, phi, sigma: s })?;
    }
    Ok(())
}

/// The Grim-reaper construction that certifies escape: width `b`, offset `C`,
/// and the smallest amplitude (with a 1% margin) whose profile dominates the
/// capped reaper at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeCertificate<T> {
    pub barrier: BarrierGeometry<T>,
    pub width: T,
    pub offset: T,
    pub sigma: T,
}

/// Builds the escape certificate with barrier radius `R = 2/A`,
/// `b = 0.9 * 2a/pi` and `C = K + t_star / b + 1`.
pub fn escape_certificate<T: Scalar>(params: &ProblemParams<T>, phi: Phi) -> Result<EscapeCertificate<T>> {
    let barrier = barrier_geometry(params, lit::<T>(2.0) / params.force())?;
    let a = params.half_span();
    let width = lit::<T>(0.9) * lit::<T>(2.0) * a / T::PI();
    let offset = barrier.k + barrier.t_star / width + T::one();
    let kink = grim_reaper_kink(width, offset, T::zero()).unwrap_or(T::zero());
    let samples = 4000;
    let mut ratio = T::zero();
    for i in 0..samples {
        let x = kink * lit::<T>(i as f64 / samples as f64);
        let g = grim_reaper_value(width, offset, x, T::zero())?;
        let p = phi.eval(a, x);
        if p > T::zero() {
            ratio = ratio.max(g / p);
        }
    }
    Ok(EscapeCertificate { barrier, width, offset, sigma: ratio * lit::<T>(1.01) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature_graph;

    fn params(n: usize) -> ProblemParams<f64> {
        ProblemParams::<f64>::new(1.0, 0.5, n).unwrap()
    }

    #[test]
    fn lower_apex_and_pins() {
        let g = gamma_lower(&params(201));
        assert!((g.heights()[100] - (1.0 - 0.75f64.sqrt())).abs() < 1e-15);
        assert!((g.heights()[100] - 0.1339746).abs() < 1e-7);
        assert_eq!(g.heights()[0], 0.0);
        assert_eq!(g.heights()[200], 0.0);
    }

    #[test]
    fn degenerate_span_collapses_equilibria() {
        let p = ProblemParams::<f64>::new(1.0, 1.0, 101).unwrap();
        let up = gamma_upper(&p);
        assert!(up.radii().iter().all(|&r| (r - 1.0).abs() < 1e-15));
        let lo = gamma_lower(&p);
        let x = p.x_nodes();
        for (xi, ui) in x.iter().zip(lo.heights()) {
            assert!((ui - (1.0 - xi * xi).max(0.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn upper_apex() {
        let p = params(201);
        let up = gamma_upper(&p);
        assert_eq!(up.radii()[0], 0.5);
        assert!((up.radii()[100] - (0.75f64.sqrt() + 1.0)).abs() < 1e-14);
        assert!((up.radii()[100] - 1.8660254).abs() < 1e-7);
        let pt = up.to_sampled().points()[100];
        assert!(pt[0].abs() < 1e-15 && (pt[1] - 1.8660254).abs() < 1e-7);
    }

    #[test]
    fn lower_cap_in_both_charts_is_the_same_circle() {
        let p = params(101);
        for q in gamma_lower_polar(&p).to_sampled().points() {
            let d = (q[0] * q[0] + (q[1] + 0.75f64.sqrt()).powi(2)).sqrt();
            assert!((d - 1.0).abs() < 1e-14);
        }
        let k = curvature_graph(&gamma_lower(&p));
        assert!(k.iter().all(|&v| (v - 1.0).abs() < 5e-3));
    }

    #[test]
    fn grim_reaper_identities() {
        let (b, c) = (0.25f64, 3.0);
        assert_eq!(grim_reaper_value(b, c, 0.0, 0.0).unwrap(), c);
        for &x in &[-0.3, 0.0, 0.1, 0.37] {
            let g0 = grim_reaper_value(b, c, x, 0.7).unwrap();
            let g1 = grim_reaper_value(b, c, x, 0.7 + b).unwrap();
            assert!((g1 - g0 + 1.0).abs() < 1e-14);
        }
        let (gt, gx, gxx) = grim_reaper_derivatives(b, 0.3);
        assert!((gt - gxx / (1.0 + gx * gx)).abs() < 1e-10);
        assert!(grim_reaper_value(b, c, b * std::f64::consts::FRAC_PI_2, 0.0).is_err());
    }

    #[test]
    fn grim_reaper_derivatives_match_finite_differences() {
        let (b, c, x, t) = (0.25, 3.0, 0.3, 1.0);
        let h = 1e-5;
        let g = |x: f64, t: f64| grim_reaper_value(b, c, x, t).unwrap();
        let gt = (g(x, t + h) - g(x, t - h)) / (2.0 * h);
        let gx = (g(x + h, t) - g(x - h, t)) / (2.0 * h);
        let gxx = (g(x + h, t) - 2.0 * g(x, t) + g(x - h, t)) / (h * h);
        let (et, ex, exx) = grim_reaper_derivatives(b, x);
        assert!((gt - et).abs() < 1e-8);
        assert!((gx - ex).abs() < 1e-7);
        assert!((gxx - exx).abs() < 1e-3);
    }

    #[test]
    fn kink_is_the_root_of_g() {
        let (b, c, t) = (0.25, 0.3, 0.02);
        // independent bisection on G(x, t) = 0 over (0, b pi / 2)
        let (mut lo, mut hi) = (0.0, b * std::f64::consts::FRAC_PI_2 * (1.0 - 1e-12));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if grim_reaper_value(b, c, mid, t).unwrap() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = grim_reaper_kink(b, c, t).unwrap();
        assert!((k - lo).abs() < 1e-12, "{k} vs {lo}");
        assert!(grim_reaper_kink(b, c, b * c).is_none());
    }

    #[test]
    fn grim_subsolution_shapes() {
        let p = params(101);
        let (b, c) = (0.2, 0.5);
        let s0 = grim_reaper_subsolution(&p, b, c, 0.0).unwrap();
        let apex = s0.points().iter().map(|q| q[1]).fold(0.0, f64::max);
        assert!((apex - c).abs() < 1e-15);
        let late = grim_reaper_subsolution(&p, b, c, b * c).unwrap();
        assert!(late.points().iter().all(|q| q[1] == 0.0));
        assert!(grim_reaper_subsolution(&p, 2.0 * 0.5 / std::f64::consts::PI, c, 0.0).is_err());
        let k = grim_reaper_kink(b, c, 0.0).unwrap();
        assert!(s0.points().iter().any(|q| q[0] == k && q[1] == 0.0));
    }

    #[test]
    fn circle_radius_matches_implicit_form() {
        for &t in &[0.5f64, 1.0, 2.0] {
            let r = circle_radius(2.0f64, 1.0, t).unwrap();
            let back = circle_time_to_radius(2.0, 1.0, r).unwrap();
            assert!((back - t).abs() < 1e-8, "t={t}: {back}");
            assert!(r > 2.0);
        }
        let tstar = circle_time_to_radius(2.0f64, 1.0, 3.0).unwrap();
        assert!((circle_radius(2.0, 1.0, tstar).unwrap() - 3.0).abs() < 1e-8);
        assert!(circle_radius(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn circle_radius_is_monotone() {
        let mut prev = 2.0;
        for i in 1..20 {
            let r = circle_radius(2.0, 1.0, i as f64 * 0.25).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn barrier_geometry_properties() {
        let p = params(101);
        let g = barrier_geometry(&p, 2.0).unwrap();
        let d = (g.outer.center[0] + 0.5).hypot(g.outer.center[1]);
        assert!((d - g.outer.radius).abs() < 1e-10);
        assert!(g.outer.radius > g.inner.radius);
        assert!(g.k.is_finite() && g.t_star > 0.0);
        // K is on the outer circle at x = 0
        let dk = g.outer.center[0].hypot(g.k - g.outer.center[1]);
        assert!((dk - g.outer.radius).abs() < 1e-12);
        let rt = circle_radius(2.0, 1.0, g.t_star).unwrap();
        assert!((rt - g.outer.radius).abs() < 1e-8);
    }

    #[test]
    fn phi_properties() {
        for phi in [Phi::Cosine, Phi::Parabola] {
            assert_eq!(phi.eval(0.5, 0.5), 0.0);
            assert_eq!(phi.eval(0.5, -0.5), 0.0);
            assert_eq!(phi.eval(0.5, 0.0), 1.0);
            for i in 0..50 {
                let x = 0.5 * i as f64 / 50.0;
                assert_eq!(phi.eval(0.5, x), phi.eval(0.5, -x));
                let h = 1e-3;
                if x + h < 0.5 && x > h {
                    let d2 = phi.eval(0.5, x + h) - 2.0 * phi.eval(0.5, x) + phi.eval(0.5, x - h);
                    assert!(d2 <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn initial_family_examples() {
        let p = params(101);
        let flat = initial_curve(&InitialFamily::new(p, Phi::Cosine, 0.0).unwrap()).unwrap();
        assert!(flat.heights().iter().all(|&u| u == 0.0));
        let neg = initial_curve(&InitialFamily::new(p, Phi::Cosine, -1.0).unwrap()).unwrap();
        assert!(neg.heights()[1..100].iter().all(|&u| u < 0.0));
        assert_eq!(neg.heights()[0], 0.0);
        let grid: Vec<f64> = (-10..=60).map(|i| i as f64 * 0.5).collect();
        validate_phi(&p, Phi::Cosine, &grid).unwrap();
        validate_phi(&p, Phi::Parabola, &grid).unwrap();
    }

    #[test]
    fn escape_certificate_dominates_reaper() {
        let p = params(201);
        let cert = escape_certificate(&p, Phi::Cosine).unwrap();
        assert!(cert.width < 2.0 * 0.5 / std::f64::consts::PI);
        let reaper = grim_reaper_subsolution(&p, cert.width, cert.offset, 0.0).unwrap();
        for q in reaper.points() {
            assert!(cert.sigma * Phi::Cosine.eval(0.5, q[0]) >= q[1]);
        }
        // the reaper apex stays above K until t_star
        let apex_at_tstar = grim_reaper_value(cert.width, cert.offset, 0.0, cert.barrier.t_star).unwrap();
        assert!(apex_at_tstar > cert.barrier.k);
    }

    #[test]
    fn generic_over_f32() {
        let p = ProblemParams::<f32>::new(1.0, 0.5, 33).unwrap();
        let g = gamma_lower(&p);
        assert!((g.heights()[16] - 0.133_974_6).abs() < 1e-6);
        assert!((circle_radius(2.0f32, 1.0, 1.0).unwrap() - circle_radius(2.0f64, 1.0, 1.0).unwrap() as f32).abs() < 1e-4);
    }
}
