//! Length, area and energy monitors.

use serde::{Deserialize, Serialize};

use crate::geometry::{curvature_sampled, endpoint_curvatures, length, signed_area, GraphProfile, SampledCurve};
use crate::scalar::{lit, Scalar};

/// One diagnostic sample of the energy `E = L - A S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord<T> {
    pub t: T,
    pub length: T,
    pub area: T,
    pub energy: T,
    /// Graph functional `J[u] - A int u dx`, present while in the graph chart.
    pub j_graph: Option<T>,
    pub dissipation: T,
}

impl<T: Scalar> EnergyRecord<T> {
    pub fn measure(t: T, c: &SampledCurve<T>, force: T, graph: Option<&GraphProfile<T>>) -> Self {
        let (length, area, energy) = energy(c, force);
        EnergyRecord {
            t,
            length,
            area,
            energy,
            j_graph: graph.map(|g| lyapunov_graph(g).monitor),
            dissipation: dissipation_estimate(c, force),
        }
    }
}

/// `J[u] = int sqrt(1 + u_x^2) dx` and the monitored `J[u] - A int u dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphLyapunov<T> {
    pub j: T,
    pub monitor: T,
}

/// Trapezoid quadrature on the graph grid, with `u_x` from central differences
/// (one-sided second order at the ends).
pub fn lyapunov_graph<T: Scalar>(g: &GraphProfile<T>) -> GraphLyapunov<T> {
    let u = g.heights();
    let n = u.len();
    let dx = g.params().dx();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let slope = |i: usize| -> T {
        if i == 0 {
            (lit::<T>(-3.0) * u[0] + lit::<T>(4.0) * u[1] - u[2]) / (two * dx)
        } else if i == n - 1 {
            (lit::<T>(3.0) * u[n - 1] - lit::<T>(4.0) * u[n - 2] + u[n - 3]) / (two * dx)
        } else {
            (u[i + 1] - u[i - 1]) / (two * dx)
        }
    };
    let trap = |f: &dyn Fn(usize) -> T| -> T {
        let inner: T = (1..n - 1).map(f).sum();
        dx * (inner + half * (f(0) + f(n - 1)))
    };
    let j = trap(&|i| (T::one() + slope(i).powi(2)).sqrt());
    let integral = trap(&|i| u[i]);
    GraphLyapunov { j, monitor: j - g.params().force() * integral }
}

/// `(L, S, E)` with `S` the signed area above the axis.
pub fn energy<T: Scalar>(c: &SampledCurve<T>, force: T) -> (T, T, T) {
    let l = length(c);
    let s = signed_area(c);
    (l, s, l - force * s)
}

/// Trapezoid rule for `int (kappa - A)^2 ds` on the chord-length parameter.
pub fn dissipation_estimate<T: Scalar>(c: &SampledCurve<T>, force: T) -> T {
    let k = curvature_sampled(c);
    let pts = c.points();
    let half = lit::<T>(0.5);
    (0..pts.len() - 1)
        .map(|i| {
            let ds = (pts[i + 1][0] - pts[i][0]).hypot(pts[i + 1][1] - pts[i][1]);
            let f0 = (k[i] - force).powi(2);
            let f1 = (k[i + 1] - force).powi(2);
            half * ds * (f0 + f1)
        })
        .sum()
}

/// `(|kappa(P) - A|, |kappa(Q) - A|)`.
pub fn endpoint_curvature_deviation<T: Scalar>(c: &SampledCurve<T>, force: T) -> (T, T) {
    let (kp, kq) = endpoint_curvatures(c);
    ((kp - force).abs(), (kq - force).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{gamma_lower, gamma_upper};
    use crate::geometry::ProblemParams;

    fn params(n: usize) -> ProblemParams<f64> {
        ProblemParams::new(1.0, 0.5, n).unwrap()
    }

    // Simpson oracle for the area under the lower cap
    fn cap_area() -> f64 {
        let c = 0.75f64.sqrt();
        let f = |x: f64| (1.0 - x * x).sqrt() - c;
        let m = 20000;
        let h = 1.0 / m as f64;
        let mut s = f(-0.5) + f(0.5);
        for k in 1..m {
            let x = -0.5 + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn flat_profile() {
        let g = GraphProfile::from_fn(params(101), |_| 0.0).unwrap();
        let ly = lyapunov_graph(&g);
        assert!((ly.j - 1.0).abs() < 1e-15);
        assert!((ly.monitor - 1.0).abs() < 1e-15);
        let (l, s, e) = energy(&g.to_sampled(), 1.0);
        assert!((l - 1.0).abs() < 1e-14 && s == 0.0 && (e - 1.0).abs() < 1e-14);
        assert!((dissipation_estimate(&g.to_sampled(), 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(endpoint_curvature_deviation(&g.to_sampled(), 1.0), (1.0, 1.0));
    }

    #[test]
    fn lower_cap_values() {
        let p = params(201);
        let g = gamma_lower(&p);
        let ly = lyapunov_graph(&g);
        let arc = 2.0 * 0.5f64.asin();
        assert!((ly.j - arc).abs() < 1e-4, "{}", ly.j);
        assert!((ly.monitor - (arc - cap_area())).abs() < 1e-4);
        let (l, s, e) = energy(&g.to_sampled(), 1.0);
        assert!((l - arc).abs() < 1e-5);
        assert!((s - cap_area()).abs() < 1e-5);
        assert!((e - (arc - cap_area())).abs() < 1e-5);
        assert!(dissipation_estimate(&g.to_sampled(), 1.0) < 1e-5);
    }

    #[test]
    fn equilibria_satisfy_endpoint_condition() {
        for n in [101, 201, 401] {
            let p = params(n);
            for c in [gamma_lower(&p).to_sampled(), gamma_upper(&p).to_sampled()] {
                let (dp, dq) = endpoint_curvature_deviation(&c, 1.0);
                assert!(dp < 20.0 * p.dx() && dq < 20.0 * p.dx(), "n {n}: {dp} {dq}");
            }
        }
    }

    #[test]
    fn upper_arc_energy_below_tall_initial_data() {
        let p = params(201);
        let up = gamma_upper(&p).to_sampled();
        let tall = GraphProfile::from_fn(p, |x| 2.0 * (std::f64::consts::PI * x).cos()).unwrap().to_sampled();
        let (_, _, e_up) = energy(&up, 1.0);
        let (_, _, e_tall) = energy(&tall, 1.0);
        // upper arc: L = 5 pi / 3, S = segment of the unit disk plus triangle
        let c = 0.75f64.sqrt();
        let s_exact = 5.0 * std::f64::consts::PI / 6.0 + 0.5 * c;
        assert!((e_up - (5.0 * std::f64::consts::PI / 3.0 - s_exact)).abs() < 1e-3);
        assert!(e_up < e_tall);
    }

    #[test]
    fn dissipation_nonnegative_f32() {
        let p = ProblemParams::<f32>::new(1.0, 0.5, 65).unwrap();
        let g = GraphProfile::from_fn(p, |x| 0.3 * (std::f32::consts::PI * x).cos()).unwrap();
        assert!(dissipation_estimate(&g.to_sampled(), 1.0) >= 0.0);
    }
}
