//! Finite-difference weights and small planar predicates.

use crate::scalar::Scalar;

/// Fornberg weights for derivatives of order `0..=max_order` at `z` from
/// values at `nodes`. Returns `w[k][j]`: weight of node `j` for derivative `k`.
pub fn fd_weights<T: Scalar>(z: T, nodes: &[T], max_order: usize) -> Vec<Vec<T>> {
    let n = nodes.len();
    let mut c = vec![vec![T::zero(); n]; max_order + 1];
    let mut c1 = T::one();
    let mut c4 = nodes[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kf = T::from_usize(k).unwrap();
                    c[k][i] = c1 * (kf * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                let kf = T::from_usize(k).unwrap();
                c[k][j] = (c4 * c[k][j] - kf * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[inline]
pub fn cross<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn sub<T: Scalar>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Parameters `(s, t)` in `[0, 1]^2` where segment `a0->a1` meets `b0->b1`,
/// or `None` when they are disjoint or collinear.
pub fn segment_intersection<T: Scalar>(a0: [T; 2], a1: [T; 2], b0: [T; 2], b1: [T; 2]) -> Option<(T, T)> {
    let r = sub(a1, a0);
    let q = sub(b1, b0);
    let denom = cross(r, q);
    if denom == T::zero() {
        return None;
    }
    let w = sub(b0, a0);
    let s = cross(w, q) / denom;
    let t = cross(w, r) / denom;
    let (zero, one) = (T::zero(), T::one());
    if s >= zero && s <= one && t >= zero && t <= one {
        Some((s, t))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_weights() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn one_sided_weights_are_exact_on_cubics() {
        let nodes = [0.0, 0.1, 0.25, 0.45];
        let w = fd_weights(0.0, &nodes, 2);
        let f = |s: f64| 1.0 + 2.0 * s - 3.0 * s * s + 0.5 * s * s * s;
        let d1: f64 = nodes.iter().zip(&w[1]).map(|(&s, &c)| c * f(s)).sum();
        let d2: f64 = nodes.iter().zip(&w[2]).map(|(&s, &c)| c * f(s)).sum();
        assert!((d1 - 2.0).abs() < 1e-12);
        assert!((d2 + 6.0).abs() < 1e-10);
    }

    #[test]
    fn segments() {
        let hit = segment_intersection([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]).unwrap();
        assert_eq!(hit, (0.5, 0.5));
        assert!(segment_intersection([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]).is_none());
    }
}
