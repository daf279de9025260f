//! Monotone piecewise-cubic Hermite interpolation.
//!
//! Node derivatives come from the 3-point parabola through each node and its
//! neighbours. Where the data are locally monotone they are limited to
//! `3 min(|S_left|, |S_right|)` with the sign of the data, which keeps the
//! interpolant monotone there; at data extrema the parabolic derivative is
//! kept, so smooth extrema are reproduced to full order.

use crate::error::{FlowError, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone)]
pub struct MonotoneCubic<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

fn limit<T: Scalar>(d: T, s_left: T, s_right: T) -> T {
    if s_left * s_right <= T::zero() {
        return d;
    }
    if d * s_right <= T::zero() {
        return T::zero();
    }
    let cap = lit::<T>(3.0) * s_left.abs().min(s_right.abs());
    if d.abs() > cap {
        cap * d.signum()
    } else {
        d
    }
}

impl<T: Scalar> MonotoneCubic<T> {
    /// `x` must be strictly increasing, with at least two nodes.
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(FlowError::InvalidProfile("interpolation needs two or more (x, y) pairs".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FlowError::NotRepresentable {
                chart: "interpolant",
                reason: "abscissae are not strictly increasing".into(),
            });
        }
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = s[0];
            d[1] = s[0];
            return Ok(MonotoneCubic { x, y, d });
        }
        for i in 1..n - 1 {
            let raw = (h[i - 1] * s[i] + h[i] * s[i - 1]) / (h[i - 1] + h[i]);
            d[i] = limit(raw, s[i - 1], s[i]);
        }
        let two = lit::<T>(2.0);
        let d0 = ((two * h[0] + h[1]) * s[0] - h[0] * s[1]) / (h[0] + h[1]);
        d[0] = limit(d0, s[1], s[0]);
        let m = n - 2;
        let dn = ((two * h[m] + h[m - 1]) * s[m] - h[m] * s[m - 1]) / (h[m] + h[m - 1]);
        d[n - 1] = limit(dn, s[m - 1], s[m]);
        Ok(MonotoneCubic { x, y, d })
    }

    /// Value at `xq`; outside the node range the end cubic is extended.
    pub fn eval(&self, xq: T) -> T {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= xq).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let x = vec![0.0, 0.3, 0.5, 1.2, 2.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let p = MonotoneCubic::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(p.eval(*a), *b);
        }
        for k in 0..50 {
            let q = 2.0 * k as f64 / 49.0;
            assert!((p.eval(q) - (2.0 * q - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn smooth_extremum_is_high_order() {
        let errs: Vec<f64> = [41usize, 81, 161]
            .iter()
            .map(|&n| {
                let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
                let y: Vec<f64> = x.iter().map(|v| (1.0 - 0.25 * v * v).sqrt()).collect();
                let p = MonotoneCubic::new(x, y).unwrap();
                (0..997)
                    .map(|k| -1.0 + 2.0 * (k as f64 + 0.37) / 997.0)
                    .map(|q| (p.eval(q) - (1.0 - 0.25 * q * q).sqrt()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] / errs[1] > 6.0 && errs[1] / errs[2] > 6.0, "{errs:?}");
    }

    #[test]
    fn rejects_unsorted() {
        assert!(MonotoneCubic::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0], vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(steps in prop::collection::vec((0.01f64..1.0, 0.0f64..2.0), 2..12)) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() + dy);
            }
            let p = MonotoneCubic::new(x.clone(), y).unwrap();
            let end = *x.last().unwrap();
            let mut prev = p.eval(0.0);
            for k in 1..=400 {
                let v = p.eval(end * k as f64 / 400.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
