//! Signed curvature. Convention: a concave-down graph (a cap above the chord)
//! has positive curvature, so both equilibria carry `kappa = +A`.

use super::stencil::{cross, fd_weights};
use super::{GraphProfile, PolarProfile, SampledCurve};
use crate::scalar::{lit, Scalar};

/// `-u_xx / (1 + u_x^2)^{3/2}` at interior nodes, central differences.
pub fn curvature_graph<T: Scalar>(g: &GraphProfile<T>) -> Vec<T> {
    let u = g.heights();
    let dx = g.params().dx();
    let n = u.len();
    let two = lit::<T>(2.0);
    (1..n - 1)
        .map(|i| {
            let ux = (u[i + 1] - u[i - 1]) / (two * dx);
            let uxx = ((u[i + 1] + u[i - 1]) - two * u[i]) / (dx * dx);
            let w = T::one() + ux * ux;
            -uxx / (w * w.sqrt())
        })
        .collect()
}

/// `(rho^2 + 2 rho_t^2 - rho rho_tt) / (rho^2 + rho_t^2)^{3/2}` at interior nodes.
pub fn curvature_polar<T: Scalar>(p: &PolarProfile<T>) -> Vec<T> {
    let r = p.radii();
    let h = p.params().dtheta();
    let n = r.len();
    let two = lit::<T>(2.0);
    (1..n - 1)
        .map(|i| {
            let rt = (r[i + 1] - r[i - 1]) / (two * h);
            let rtt = ((r[i + 1] + r[i - 1]) - two * r[i]) / (h * h);
            let rho = r[i];
            let w = rho * rho + rt * rt;
            (rho * rho + two * rt * rt - rho * rtt) / (w * w.sqrt())
        })
        .collect()
}

fn parametric_curvature<T: Scalar>(pts: &[[T; 2]], s: &[T], at: usize, idx: &[usize]) -> T {
    let nodes: Vec<T> = idx.iter().map(|&j| s[j]).collect();
    let w = fd_weights(s[at], &nodes, 2);
    let mut d1 = [T::zero(); 2];
    let mut d2 = [T::zero(); 2];
    for (k, &j) in idx.iter().enumerate() {
        for c in 0..2 {
            d1[c] = d1[c] + w[1][k] * pts[j][c];
            d2[c] = d2[c] + w[2][k] * pts[j][c];
        }
    }
    let speed = d1[0].hypot(d1[1]);
    -cross(d1, d2) / (speed * speed * speed)
}

/// Curvature at every vertex, parametrised by cumulative chord length.
/// Interior vertices use 3-point stencils; the endpoints use one-sided
/// 4-point stencils (3-point when the curve has only three vertices).
pub fn curvature_sampled<T: Scalar>(c: &SampledCurve<T>) -> Vec<T> {
    let pts = c.points();
    let n = pts.len();
    if n < 3 {
        return vec![T::zero(); n];
    }
    let s = c.arc_params();
    let mut k = Vec::with_capacity(n);
    let m = n.min(4);
    let head: Vec<usize> = (0..m).collect();
    let tail: Vec<usize> = (n - m..n).collect();
    k.push(parametric_curvature(pts, &s, 0, &head));
    for i in 1..n - 1 {
        k.push(parametric_curvature(pts, &s, i, &[i - 1, i, i + 1]));
    }
    k.push(parametric_curvature(pts, &s, n - 1, &tail));
    k
}

/// One-sided curvature estimates at `P` and `Q`.
pub fn endpoint_curvatures<T: Scalar>(c: &SampledCurve<T>) -> (T, T) {
    let pts = c.points();
    let n = pts.len();
    let s = c.arc_params();
    let m = n.min(4);
    let head: Vec<usize> = (0..m).collect();
    let tail: Vec<usize> = (n - m..n).collect();
    (parametric_curvature(pts, &s, 0, &head), parametric_curvature(pts, &s, n - 1, &tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ProblemParams;

    fn lower_cap(p: ProblemParams<f64>) -> GraphProfile<f64> {
        let c = (1.0f64 - 0.25).sqrt();
        GraphProfile::from_fn(p, |x| (1.0 - x * x).sqrt() - c).unwrap()
    }

    fn upper_arc(p: ProblemParams<f64>) -> PolarProfile<f64> {
        let c = 0.75f64.sqrt();
        PolarProfile::from_fn(p, |t| c * t.sin() + (1.0 - c * c * t.cos() * t.cos()).sqrt()).unwrap()
    }

    #[test]
    fn straight_line_has_zero_curvature() {
        let p = ProblemParams::<f64>::new(1.0, 0.5, 17).unwrap();
        let g = GraphProfile::from_fn(p, |_| 0.0).unwrap();
        assert!(curvature_graph(&g).iter().all(|&k| k == 0.0));
        assert!(curvature_sampled(&g.to_sampled()).iter().all(|&k| k == 0.0));
    }

    #[test]
    fn lower_cap_has_unit_curvature() {
        let p = ProblemParams::<f64>::new(1.0, 0.5, 201).unwrap();
        let k = curvature_graph(&lower_cap(p));
        let err = k.iter().map(|&v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn parabola_apex_curvature_converges_to_two() {
        // u = a^2 - x^2 has u_x(0) = 0 and -u_xx(0) = 2
        let mut prev = f64::INFINITY;
        for n in [17, 33, 65] {
            let p = ProblemParams::<f64>::new(1.0, 0.5, n).unwrap();
            let g = GraphProfile::from_fn(p, |x| 0.25 - x * x).unwrap();
            let k = curvature_graph(&g);
            let err = (k[(n - 3) / 2] - 2.0).abs();
            assert!(err <= prev);
            prev = err;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn circle_radius_r_has_curvature_inverse_r() {
        let p = ProblemParams::<f64>::new(1.0, 0.5, 101).unwrap();
        let pr = PolarProfile::from_fn(p, |_| 0.5).unwrap();
        assert!(curvature_polar(&pr).iter().all(|&k| (k - 2.0).abs() < 1e-12));
    }

    #[test]
    fn upper_arc_has_unit_curvature() {
        let p = ProblemParams::<f64>::new(1.0, 0.5, 201).unwrap();
        let k = curvature_polar(&upper_arc(p));
        let err = k.iter().map(|&v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        let ks = curvature_sampled(&upper_arc(p).to_sampled());
        let err = ks.iter().map(|&v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn polar_curvature_of_a_horizontal_line_vanishes() {
        // y = eps  <=>  rho = eps / sin(theta), away from the ends
        let p = ProblemParams::<f64>::new(1.0, 0.5, 201).unwrap();
        let eps = 0.3;
        let th = p.theta_nodes();
        let k = curvature_polar(&PolarProfile::from_fn(p, |t| if t > 0.7 && t < 2.4 { eps / t.sin() } else { 0.5 }).unwrap());
        for (i, &kv) in k.iter().enumerate() {
            let t = th[i + 1];
            if t > 0.8 && t < 2.3 {
                assert!(kv.abs() < 1e-3, "theta {t}: {kv}");
            }
        }
    }

    #[test]
    fn graph_and_polar_curvature_agree_on_lower_cap() {
        let p = ProblemParams::<f64>::new(1.0, 0.5, 201).unwrap();
        let c = 0.75f64.sqrt();
        let pr = PolarProfile::from_fn(p, |t| -c * t.sin() + (1.0 - c * c * t.cos() * t.cos()).sqrt()).unwrap();
        let kp = curvature_polar(&pr);
        let kg = curvature_graph(&lower_cap(p));
        let mp = kp.iter().map(|&v| (v - 1.0).abs()).fold(0.0, f64::max);
        let mg = kg.iter().map(|&v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(mp < 1e-3 && mg < 1e-3, "{mp} {mg}");
    }

    #[test]
    fn endpoint_curvature_on_equilibria() {
        let p = ProblemParams::<f64>::new(1.0, 0.5, 201).unwrap();
        let (kp, kq) = endpoint_curvatures(&lower_cap(p).to_sampled());
        assert!((kp - 1.0).abs() < 1e-3 && (kq - 1.0).abs() < 1e-3, "{kp} {kq}");
        let (kp, kq) = endpoint_curvatures(&upper_arc(p).to_sampled());
        assert!((kp - 1.0).abs() < 1e-2 && (kq - 1.0).abs() < 1e-2, "{kp} {kq}");
    }
}
