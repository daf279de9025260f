//! Semi-discrete right-hand sides.
//!
//! Both charts discretise the flow as a gradient flow of the polygon energy
//! `E_h = (chord length) - A (polygon area)`: the node velocity is
//! `-mobility * dE_h/dnode`, with the mobility chosen so the scheme is a
//! second-order central discretisation of the chart PDE. Hence
//! `dE_h/dt = -sum(weight * rate^2)` holds exactly before time
//! discretisation, which is the discrete form of the dissipation identity.

use crate::error::{FlowError, Result};
use crate::scalar::{lit, Scalar};

/// Bound on `|u|`, `|u_x|` and `rho` before a run is declared blown up.
pub const BLOWUP_LIMIT: f64 = 1e6;
/// Smallest admissible polar radius.
pub const ORIGIN_LIMIT: f64 = 1e-9;

/// Summary of one right-hand-side evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInfo<T> {
    pub length: T,
    pub area: T,
    pub energy: T,
    /// `sum(weight * rate^2)`, the exact semi-discrete `-dE_h/dt`.
    pub dissipation: T,
    /// Largest diagonal entry of `-d(rate)/d(node)`; sets the explicit step.
    pub stiffness: T,
    /// Largest `|du/dx|` over cells (graph chart only).
    pub max_slope: T,
}

/// Tridiagonal frozen-mobility Jacobian of the rate on interior nodes.
#[derive(Debug, Clone, Default)]
pub struct Tridiag<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiag<T> {
    fn reset(&mut self, n: usize) {
        for v in [&mut self.lower, &mut self.diag, &mut self.upper] {
            v.clear();
            v.resize(n, T::zero());
        }
    }
}

fn blowup<T: Scalar>(what: &str, value: T) -> FlowError {
    FlowError::Blowup(format!("{what} = {value}"))
}

/// Graph chart `u_t = u_xx / (1 + u_x^2) + A sqrt(1 + u_x^2)`. `rate` receives
/// `u_t` at every node, zero at the pinned ends.
pub fn graph_rate<T: Scalar>(u: &[T], dx: T, force: T, rate: &mut Vec<T>, mut jac: Option<&mut Tridiag<T>>) -> Result<RateInfo<T>> {
    let n = u.len();
    let big = lit::<T>(BLOWUP_LIMIT);
    rate.clear();
    rate.resize(n, T::zero());
    if let Some(j) = jac.as_deref_mut() {
        j.reset(n);
    }
    let mut length = T::zero();
    let mut interior = T::zero();
    let mut max_slope = T::zero();
    // cell quantities, computed once so mirrored cells see identical values
    let mut sin = Vec::with_capacity(n - 1);
    let mut inv_l3 = Vec::with_capacity(n - 1);
    for m in 0..n - 1 {
        let d = u[m + 1] - u[m];
        let l = dx.hypot(d);
        let slope = (d / dx).abs();
        if !(slope <= big) {
            return Err(blowup("|u_x|", slope));
        }
        max_slope = max_slope.max(slope);
        length = length + l;
        sin.push(d / l);
        inv_l3.push(T::one() / (l * l * l));
    }
    for &v in u {
        if !(v.abs() <= big) {
            return Err(blowup("|u|", v));
        }
    }
    let two = lit::<T>(2.0);
    let mut dissipation = T::zero();
    let mut stiffness = T::zero();
    for i in 1..n - 1 {
        interior = interior + u[i];
        let ux = (u[i + 1] - u[i - 1]) / (two * dx);
        let w = (T::one() + ux * ux).sqrt();
        let r = w / dx * ((sin[i] - sin[i - 1]) + force * dx);
        rate[i] = r;
        dissipation = dissipation + dx * r * r / w;
        let coef = w * dx;
        let (lo, up) = (coef * inv_l3[i - 1], coef * inv_l3[i]);
        stiffness = stiffness.max(lo + up);
        if let Some(j) = jac.as_deref_mut() {
            j.lower[i] = lo;
            j.diag[i] = -(lo + up);
            j.upper[i] = up;
        }
    }
    let area = dx * interior;
    Ok(RateInfo { length, area, energy: length - force * area, dissipation, stiffness, max_slope })
}

/// Precomputed constants of the uniform polar grid.
#[derive(Debug, Clone, Copy)]
pub struct PolarGrid<T> {
    pub dtheta: T,
    /// `cos(dtheta)`
    pub c: T,
    /// `sin(dtheta)`
    pub s: T,
    /// `1 - cos(dtheta)`, evaluated without cancellation
    pub one_minus_c: T,
}

impl<T: Scalar> PolarGrid<T> {
    pub fn new(dtheta: T) -> Self {
        let half = (dtheta * lit::<T>(0.5)).sin();
        PolarGrid { dtheta, c: dtheta.cos(), s: dtheta.sin(), one_minus_c: lit::<T>(2.0) * half * half }
    }
}

/// Polar chart `rho_t = rho_tt/(rho^2+rho_t^2) - (2 rho_t^2+rho^2)/(rho (rho^2+rho_t^2)) + A sqrt(rho^2+rho_t^2)/rho`
/// on nodes `theta_j = j dtheta`, with `rho` pinned at both ends.
pub fn polar_rate<T: Scalar>(rho: &[T], grid: &PolarGrid<T>, force: T, rate: &mut Vec<T>, mut jac: Option<&mut Tridiag<T>>) -> Result<RateInfo<T>> {
    let n = rho.len();
    let big = lit::<T>(BLOWUP_LIMIT);
    let tiny = lit::<T>(ORIGIN_LIMIT);
    rate.clear();
    rate.resize(n, T::zero());
    if let Some(j) = jac.as_deref_mut() {
        j.reset(n);
    }
    for &r in rho {
        if !(r > tiny) {
            return Err(blowup("rho", r));
        }
        if !(r < big) {
            return Err(blowup("rho", r));
        }
    }
    let PolarGrid { dtheta, c: _, s, one_minus_c } = *grid;
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let mut length = T::zero();
    let mut fan = T::zero();
    let mut len = Vec::with_capacity(n - 1);
    for m in 0..n - 1 {
        let d = rho[m + 1] - rho[m];
        let l = (d * d + two * rho[m] * rho[m + 1] * one_minus_c).sqrt();
        length = length + l;
        fan = fan + rho[m] * rho[m + 1];
        len.push(l);
    }
    let mut dissipation = T::zero();
    let mut stiffness = T::zero();
    for j in 1..n - 1 {
        let (rm, r, rp) = (rho[j - 1], rho[j], rho[j + 1]);
        let (lm, lp) = (len[j - 1], len[j]);
        // r - r_nb cos(dtheta), split to avoid cancellation
        let gp = ((r - rp) + rp * one_minus_c) / lp;
        let gm = ((r - rm) + rm * one_minus_c) / lm;
        let grad = (gp + gm) - force * half * s * (rm + rp);
        let rt = (rp - rm) / (two * dtheta);
        let mob = (r * r + rt * rt).sqrt() / (r * r);
        let v = -mob / dtheta * grad;
        rate[j] = v;
        dissipation = dissipation + dtheta * v * v / mob;
        let k = mob / dtheta * s * s;
        let (lp3, lm3) = (lp * lp * lp, lm * lm * lm);
        let diag = k * (rp * rp / lp3 + rm * rm / lm3);
        stiffness = stiffness.max(diag);
        if let Some(jm) = jac.as_deref_mut() {
            let fs = mob / dtheta * force * half * s;
            jm.lower[j] = k * r * rm / lm3 + fs;
            jm.diag[j] = -diag;
            jm.upper[j] = k * r * rp / lp3 + fs;
        }
    }
    let area = half * s * fan;
    Ok(RateInfo { length, area, energy: length - force * area, dissipation, stiffness, max_slope: T::zero() })
}

/// Solves `(I - dt J) x = rhs` on interior nodes, ends fixed at zero.
pub fn solve_linearized<T: Scalar>(jac: &Tridiag<T>, dt: T, rhs: &mut [T]) {
    let n = rhs.len();
    if n < 3 {
        return;
    }
    // Thomas algorithm on indices 1..n-1
    let mut cp = vec![T::zero(); n];
    let mut prev_c = T::zero();
    let mut prev_d = T::zero();
    for i in 1..n - 1 {
        let a = if i > 1 { -dt * jac.lower[i] } else { T::zero() };
        let b = T::one() - dt * jac.diag[i];
        let c = if i < n - 2 { -dt * jac.upper[i] } else { T::zero() };
        let denom = b - a * prev_c;
        cp[i] = c / denom;
        rhs[i] = (rhs[i] - a * prev_d) / denom;
        prev_c = cp[i];
        prev_d = rhs[i];
    }
    for i in (1..n - 2).rev() {
        rhs[i] = rhs[i] - cp[i] * rhs[i + 1];
    }
    rhs[0] = T::zero();
    rhs[n - 1] = T::zero();
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn graph_pde(u: impl Fn(f64) -> f64, x: f64, force: f64) -> f64 {
        let h = 1e-4;
        let ux = (u(x + h) - u(x - h)) / (2.0 * h);
        let uxx = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
        uxx / (1.0 + ux * ux) + force * (1.0 + ux * ux).sqrt()
    }

    fn polar_pde(r: impl Fn(f64) -> f64, t: f64, force: f64) -> f64 {
        let h = 1e-4;
        let rt = (r(t + h) - r(t - h)) / (2.0 * h);
        let rtt = (r(t + h) - 2.0 * r(t) + r(t - h)) / (h * h);
        let rho = r(t);
        let q = rho * rho + rt * rt;
        rtt / q - (2.0 * rt * rt + rho * rho) / (rho * q) + force * q.sqrt() / rho
    }

    fn graph_error(n: usize) -> f64 {
        let dx = 1.0 / (n - 1) as f64;
        let f = |x: f64| 0.4 * (PI * x).cos() + 0.1 * (3.0 * PI * x).cos() + 0.05 * x;
        let u: Vec<f64> = (0..n).map(|i| f(-0.5 + i as f64 * dx)).collect();
        let mut rate = Vec::new();
        graph_rate(&u, dx, 1.0, &mut rate, None).unwrap();
        (1..n - 1).map(|i| (rate[i] - graph_pde(f, -0.5 + i as f64 * dx, 1.0)).abs()).fold(0.0, f64::max)
    }

    fn polar_error(n: usize) -> f64 {
        let dt = PI / (n - 1) as f64;
        let f = |t: f64| 0.5 + 0.8 * t.sin() + 0.1 * (2.0 * t).sin();
        let rho: Vec<f64> = (0..n).map(|j| f(j as f64 * dt)).collect();
        let mut rate = Vec::new();
        polar_rate(&rho, &PolarGrid::new(dt), 1.0, &mut rate, None).unwrap();
        (1..n - 1).map(|j| (rate[j] - polar_pde(f, j as f64 * dt, 1.0)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn graph_rate_is_second_order() {
        let e: Vec<f64> = [51, 101, 201].iter().map(|&n| graph_error(n)).collect();
        assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{e:?}");
    }

    #[test]
    fn polar_rate_is_second_order() {
        let e: Vec<f64> = [51, 101, 201].iter().map(|&n| polar_error(n)).collect();
        assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{e:?}");
    }

    #[test]
    fn dissipation_is_the_energy_rate() {
        // dE/dt along the rate, by a centred difference in the direction of motion
        let n = 41;
        let dx = 1.0 / (n - 1) as f64;
        let u: Vec<f64> = (0..n).map(|i| 0.3 * (PI * (-0.5 + i as f64 * dx)).cos()).collect();
        let mut rate = Vec::new();
        let info = graph_rate(&u, dx, 1.0, &mut rate, None).unwrap();
        let eps = 1e-6;
        let shifted = |sgn: f64| -> f64 {
            let v: Vec<f64> = u.iter().zip(&rate).map(|(a, r)| a + sgn * eps * r).collect();
            graph_rate(&v, dx, 1.0, &mut Vec::new(), None).unwrap().energy
        };
        let de = (shifted(1.0) - shifted(-1.0)) / (2.0 * eps);
        assert!((de + info.dissipation).abs() < 1e-6 * info.dissipation, "{de} {}", info.dissipation);

        let grid = PolarGrid::new(PI / 40.0);
        let rho: Vec<f64> = (0..41).map(|j| 0.5 + 0.6 * (j as f64 * PI / 40.0).sin()).collect();
        let info = polar_rate(&rho, &grid, 1.0, &mut rate, None).unwrap();
        let shifted = |sgn: f64| -> f64 {
            let v: Vec<f64> = rho.iter().zip(&rate).map(|(a, r)| a + sgn * eps * r).collect();
            polar_rate(&v, &grid, 1.0, &mut Vec::new(), None).unwrap().energy
        };
        let de = (shifted(1.0) - shifted(-1.0)) / (2.0 * eps);
        assert!((de + info.dissipation).abs() < 1e-6 * info.dissipation, "{de} {}", info.dissipation);
    }

    #[test]
    fn origin_centred_circle_follows_ode() {
        let err = |n: usize| {
            let grid = PolarGrid::new(PI / (n - 1) as f64);
            let mut rate = Vec::new();
            polar_rate(&vec![2.0; n], &grid, 1.0, &mut rate, None).unwrap();
            rate[1..n - 1].iter().map(|r| (r - 0.5).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(51), err(101));
        assert!(e2 < 1e-3 && e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let n = 21;
        let dx = 1.0 / 20.0;
        let u: Vec<f64> = (0..n).map(|i| 0.2 * (PI * (-0.5 + i as f64 * dx)).cos()).collect();
        let mut rate = Vec::new();
        let mut jac = Tridiag::default();
        graph_rate(&u, dx, 1.0, &mut rate, Some(&mut jac)).unwrap();
        let grid = PolarGrid::new(PI / 20.0);
        let rho: Vec<f64> = (0..n).map(|j| 0.5 + 0.4 * (j as f64 * PI / 20.0).sin()).collect();
        let mut prate = Vec::new();
        let mut pjac = Tridiag::default();
        polar_rate(&rho, &grid, 1.0, &mut prate, Some(&mut pjac)).unwrap();
        // the graph mobility does not depend on u_i, so the diagonal is exact
        let i = 7;
        let h = 1e-7;
        let probe = |delta: f64| -> f64 {
            let mut v = u.clone();
            v[i] += delta;
            let mut r = Vec::new();
            graph_rate(&v, dx, 1.0, &mut r, None).unwrap();
            r[i]
        };
        let fd = (probe(h) - probe(-h)) / (2.0 * h);
        assert!((fd - jac.diag[i]).abs() < 1e-5 * jac.diag[i].abs(), "{fd} {}", jac.diag[i]);
        assert!(pjac.diag[i] < 0.0 && pjac.lower[i] > 0.0 && pjac.upper[i] > 0.0);
    }

    #[test]
    fn thomas_solves_tridiagonal() {
        let n = 7;
        let jac = Tridiag { lower: vec![0.5; n], diag: vec![-3.0; n], upper: vec![0.25; n] };
        let dt = 0.1;
        let want = [0.0, 1.0, -2.0, 0.5, 3.0, 1.5, 0.0];
        let mut rhs = vec![0.0f64; n];
        for i in 1..n - 1 {
            let mut v = (1.0 - dt * jac.diag[i]) * want[i];
            v -= dt * jac.lower[i] * want[i - 1];
            v -= dt * jac.upper[i] * want[i + 1];
            rhs[i] = v;
        }
        solve_linearized(&jac, dt, &mut rhs);
        for i in 0..n {
            assert!((rhs[i] - want[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn blowup_detection() {
        let mut r = Vec::new();
        assert!(matches!(graph_rate(&[0.0, 1e7, 0.0], 0.5, 1.0, &mut r, None), Err(FlowError::Blowup(_))));
        assert!(matches!(graph_rate(&[0.0, f64::NAN, 0.0], 0.5, 1.0, &mut r, None), Err(FlowError::Blowup(_))));
        let g = PolarGrid::new(PI / 2.0);
        assert!(matches!(polar_rate(&[0.5, 1e-12, 0.5], &g, 1.0, &mut r, None), Err(FlowError::Blowup(_))));
    }
}
