//! Curve representations and differential-geometric quantities.
//!
//! Two chart representations are used by the evolvers: a graph `y = u(x)` over
//! `[-a, a]` and a polar profile `rho(theta)` over `[0, pi]`. Both convert into a
//! chart-free [`SampledCurve`], ordered from `P = (-a, 0)` to `Q = (a, 0)`.

mod curvature;
mod measure;
pub mod stencil;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::scalar::{lit, to_f64, Scalar};

pub use curvature::{curvature_graph, curvature_polar, curvature_sampled, endpoint_curvatures};
pub use measure::{endpoint_tangents, enclosed_area, length, signed_area, EndpointTangents};

/// Smallest admissible node count per chart.
pub const MIN_GRID: usize = 17;

/// Driving force `A`, endpoint half-span `a` and chart resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams<T> {
    force: T,
    half_span: T,
    grid_n: usize,
}

impl<T: Scalar> ProblemParams<T> {
    pub fn new(force: T, half_span: T, grid_n: usize) -> Result<Self> {
        if !(force > T::zero()) || !force.is_finite() {
            return Err(FlowError::InvalidParams(format!("driving force A = {force} must be positive")));
        }
        if !(half_span > T::zero()) || !half_span.is_finite() {
            return Err(FlowError::InvalidParams(format!("half-span a = {half_span} must be positive")));
        }
        // a <= 1/A, with a relative slack of a few ulps so that a = 1/A computed
        // in floating point is accepted
        let limit = T::one() / force;
        if half_span > limit * (T::one() + lit::<T>(8.0) * T::epsilon()) {
            return Err(FlowError::InvalidParams(format!(
                "half-span a = {half_span} exceeds 1/A = {limit}; only the regime 0 < a <= 1/A is supported"
            )));
        }
        if grid_n < MIN_GRID || grid_n.is_multiple_of(2) {
            return Err(FlowError::InvalidParams(format!(
                "grid_n = {grid_n} must be odd and at least {MIN_GRID}"
            )));
        }
        let p = ProblemParams { force, half_span, grid_n };
        if p.is_degenerate() {
            log::warn!("a = 1/A: the two equilibria coincide and the upper and lower convergence categories merge");
        }
        Ok(p)
    }

    pub fn force(&self) -> T {
        self.force
    }

    pub fn half_span(&self) -> T {
        self.half_span
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    /// Same physical problem on a different grid.
    pub fn with_grid(&self, grid_n: usize) -> Result<Self> {
        Self::new(self.force, self.half_span, grid_n)
    }

    /// Radius `1/A` of the equilibrium circle.
    pub fn eq_radius(&self) -> T {
        T::one() / self.force
    }

    /// Height `sqrt(1/A^2 - a^2)` of the equilibrium circle's centre.
    pub fn center_height(&self) -> T {
        let r = self.eq_radius();
        (r * r - self.half_span * self.half_span).max(T::zero()).sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.center_height() <= lit::<T>(1e-12) * self.eq_radius()
    }

    pub fn p(&self) -> [T; 2] {
        [-self.half_span, T::zero()]
    }

    pub fn q(&self) -> [T; 2] {
        [self.half_span, T::zero()]
    }

    fn mid(&self) -> usize {
        (self.grid_n - 1) / 2
    }

    /// Graph-chart spacing.
    pub fn dx(&self) -> T {
        lit::<T>(2.0) * self.half_span / lit::<T>((self.grid_n - 1) as f64)
    }

    /// Polar-chart spacing.
    pub fn dtheta(&self) -> T {
        T::PI() / lit::<T>((self.grid_n - 1) as f64)
    }

    /// Uniform x-nodes over `[-a, a]`, exactly mirror-symmetric about `x = 0`.
    pub fn x_nodes(&self) -> Vec<T> {
        let n = self.grid_n;
        let m = self.mid();
        let mut x = vec![T::zero(); n];
        let mf = lit::<T>(m as f64);
        for i in 0..m {
            let v = -self.half_span * (T::one() - lit::<T>(i as f64) / mf);
            x[i] = v;
            x[n - 1 - i] = -v;
        }
        x
    }

    /// Uniform theta-nodes over `[0, pi]`; index 0 is `theta = 0` (the point `Q`).
    pub fn theta_nodes(&self) -> Vec<T> {
        let n = self.grid_n;
        (0..n).map(|i| T::PI() * lit::<T>(i as f64) / lit::<T>((n - 1) as f64)).collect()
    }

    /// `(cos theta_i, sin theta_i)` with exact values at `0`, `pi/2`, `pi` and
    /// exact mirror symmetry `theta -> pi - theta`.
    pub fn trig_table(&self) -> (Vec<T>, Vec<T>) {
        let n = self.grid_n;
        let m = self.mid();
        let mut c = vec![T::zero(); n];
        let mut s = vec![T::zero(); n];
        let half_pi = T::FRAC_PI_2();
        let mf = lit::<T>(m as f64);
        for i in 0..m {
            let th = half_pi * lit::<T>(i as f64) / mf;
            let (si, ci) = if i == 0 { (T::zero(), T::one()) } else { th.sin_cos() };
            c[i] = ci;
            s[i] = si;
            c[n - 1 - i] = -ci;
            s[n - 1 - i] = si;
        }
        c[m] = T::zero();
        s[m] = T::one();
        (c, s)
    }
}

/// Heights `u(x_i)` of a graph curve at the uniform x-nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphProfile<T> {
    params: ProblemParams<T>,
    u: Vec<T>,
}

impl<T: Scalar> GraphProfile<T> {
    pub fn new(params: ProblemParams<T>, u: Vec<T>) -> Result<Self> {
        if u.len() != params.grid_n() {
            return Err(FlowError::InvalidProfile(format!(
                "expected {} heights, got {}",
                params.grid_n(),
                u.len()
            )));
        }
        if u[0] != T::zero() || u[u.len() - 1] != T::zero() {
            return Err(FlowError::InvalidProfile("graph endpoints must be pinned at 0".into()));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::InvalidProfile("non-finite height".into()));
        }
        Ok(GraphProfile { params, u })
    }

    /// Builds a profile from a function of `x`, pinning the endpoints.
    pub fn from_fn(params: ProblemParams<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let x = params.x_nodes();
        let mut u: Vec<T> = x.iter().map(|&xi| f(xi)).collect();
        let n = u.len();
        u[0] = T::zero();
        u[n - 1] = T::zero();
        Self::new(params, u)
    }

    pub(crate) fn from_raw(params: ProblemParams<T>, u: Vec<T>) -> Self {
        debug_assert_eq!(u.len(), params.grid_n());
        GraphProfile { params, u }
    }

    pub fn params(&self) -> &ProblemParams<T> {
        &self.params
    }

    pub fn heights(&self) -> &[T] {
        &self.u
    }

    pub fn into_heights(self) -> Vec<T> {
        self.u
    }

    /// Largest `|u_x|` by central differences (one-sided at the ends).
    pub fn max_slope(&self) -> T {
        let dx = self.params.dx();
        let n = self.u.len();
        let mut m = ((self.u[1] - self.u[0]) / dx).abs().max(((self.u[n - 1] - self.u[n - 2]) / dx).abs());
        for i in 1..n - 1 {
            m = m.max(((self.u[i + 1] - self.u[i - 1]) / (dx + dx)).abs());
        }
        m
    }

    pub fn to_sampled(&self) -> SampledCurve<T> {
        graph_to_sampled(self)
    }
}

/// Radii `rho(theta_i)` of a curve star-shaped about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarProfile<T> {
    params: ProblemParams<T>,
    rho: Vec<T>,
}

impl<T: Scalar> PolarProfile<T> {
    pub fn new(params: ProblemParams<T>, rho: Vec<T>) -> Result<Self> {
        if rho.len() != params.grid_n() {
            return Err(FlowError::InvalidProfile(format!(
                "expected {} radii, got {}",
                params.grid_n(),
                rho.len()
            )));
        }
        let a = params.half_span();
        if rho[0] != a || rho[rho.len() - 1] != a {
            return Err(FlowError::InvalidProfile("polar endpoints must be pinned at rho = a".into()));
        }
        if rho.iter().any(|r| !r.is_finite() || *r <= T::zero()) {
            return Err(FlowError::InvalidProfile("radii must be finite and positive".into()));
        }
        Ok(PolarProfile { params, rho })
    }

    pub fn from_fn(params: ProblemParams<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let th = params.theta_nodes();
        let mut rho: Vec<T> = th.iter().map(|&t| f(t)).collect();
        let n = rho.len();
        rho[0] = params.half_span();
        rho[n - 1] = params.half_span();
        Self::new(params, rho)
    }

    pub(crate) fn from_raw(params: ProblemParams<T>, rho: Vec<T>) -> Self {
        debug_assert_eq!(rho.len(), params.grid_n());
        PolarProfile { params, rho }
    }

    pub fn params(&self) -> &ProblemParams<T> {
        &self.params
    }

    pub fn radii(&self) -> &[T] {
        &self.rho
    }

    pub fn into_radii(self) -> Vec<T> {
        self.rho
    }

    pub fn to_sampled(&self) -> SampledCurve<T> {
        polar_to_sampled(self)
    }
}

/// Chart-free polyline from `P = (-a, 0)` to `Q = (a, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve<T> {
    points: Vec<[T; 2]>,
}

impl<T: Scalar> SampledCurve<T> {
    pub fn new(points: Vec<[T; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(FlowError::InvalidProfile("a sampled curve needs at least two points".into()));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first[1] != T::zero() || last[1] != T::zero() || !(last[0] > T::zero()) || first[0] != -last[0] {
            return Err(FlowError::InvalidProfile(
                "sampled curve must run from (-a, 0) to (a, 0)".into(),
            ));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(FlowError::InvalidProfile("non-finite vertex".into()));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(FlowError::InvalidProfile("consecutive vertices coincide".into()));
        }
        Ok(SampledCurve { points })
    }

    pub(crate) fn from_raw(points: Vec<[T; 2]>) -> Self {
        SampledCurve { points }
    }

    pub fn points(&self) -> &[[T; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn half_span(&self) -> T {
        self.points[self.points.len() - 1][0]
    }

    pub fn min_y(&self) -> T {
        self.points.iter().map(|p| p[1]).fold(T::infinity(), T::min)
    }

    /// Strictly increasing x along the curve.
    pub fn is_x_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1][0] > w[0][0])
    }

    /// Every interior vertex lies strictly above the axis and the polar angle
    /// about the origin strictly decreases from `pi` at `P` to `0` at `Q`.
    pub fn is_star_shaped(&self) -> bool {
        let n = self.points.len();
        if n < 2 {
            return false;
        }
        if self.points[1..n - 1].iter().any(|p| !(p[1] > T::zero())) {
            return false;
        }
        let th = self.polar_angles();
        th.windows(2).all(|w| w[1] < w[0])
    }

    /// Polar angle of each vertex; exactly `pi` at `P` and `0` at `Q`.
    pub fn polar_angles(&self) -> Vec<T> {
        let n = self.points.len();
        let mut th: Vec<T> = self.points.iter().map(|p| p[1].atan2(p[0])).collect();
        th[0] = T::PI();
        th[n - 1] = T::zero();
        th
    }

    /// Cumulative chord length at each vertex.
    pub fn arc_params(&self) -> Vec<T> {
        let mut s = Vec::with_capacity(self.points.len());
        let mut acc = T::zero();
        s.push(acc);
        for w in self.points.windows(2) {
            acc = acc + (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            s.push(acc);
        }
        s
    }

    /// Brute-force check for crossings between non-adjacent segments.
    pub fn has_self_intersection(&self) -> bool {
        let n = self.points.len();
        for i in 0..n.saturating_sub(1) {
            for j in i + 2..n - 1 {
                if let Some((s, t)) = stencil::segment_intersection(
                    self.points[i],
                    self.points[i + 1],
                    self.points[j],
                    self.points[j + 1],
                ) {
                    let shared = i == 0 && j == n - 2 && s == T::zero() && t == T::one();
                    if !shared {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// CSV with header `x,y`, numbers at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.points {
            writeln!(w, "{:.16e},{:.16e}", to_f64(p[0]), to_f64(p[1]))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// One vertex per x-node, ordered `P -> Q`.
pub fn graph_to_sampled<T: Scalar>(g: &GraphProfile<T>) -> SampledCurve<T> {
    let x = g.params.x_nodes();
    SampledCurve::from_raw(x.into_iter().zip(g.u.iter()).map(|(x, &y)| [x, y]).collect())
}

/// `x = rho cos(theta)`, `y = rho sin(theta)`, emitted from `theta = pi` down
/// to `theta = 0` so the result runs `P -> Q`.
pub fn polar_to_sampled<T: Scalar>(p: &PolarProfile<T>) -> SampledCurve<T> {
    let (c, s) = p.params.trig_table();
    let n = p.rho.len();
    let mut pts: Vec<[T; 2]> = (0..n).rev().map(|i| [p.rho[i] * c[i], p.rho[i] * s[i]]).collect();
    pts[0] = p.params.p();
    pts[n - 1] = p.params.q();
    SampledCurve::from_raw(pts)
}
