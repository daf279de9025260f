use serde::{Deserialize, Serialize};

use super::stencil::fd_weights;
use super::SampledCurve;
use crate::error::{FlowError, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Unit tangents `dF/ds` at both ends, oriented `P -> Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointTangents<T> {
    pub at_p: [T; 2],
    pub at_q: [T; 2],
}

/// Sum of chord lengths.
pub fn length<T: Scalar>(c: &SampledCurve<T>) -> T {
    c.points().windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// Shoelace area of the polygon closed by the baseline `Q -> P`, positive for
/// curves above the axis. Written in trapezoid form; the baseline contributes 0.
pub fn signed_area<T: Scalar>(c: &SampledCurve<T>) -> T {
    let half = lit::<T>(0.5);
    c.points().windows(2).map(|w| (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]) * half).sum()
}

/// Area between the curve and the axis; undefined (error) once the curve dips
/// below `y = -1e-9`.
pub fn enclosed_area<T: Scalar>(c: &SampledCurve<T>) -> Result<T> {
    let min_y = c.min_y();
    if min_y < lit::<T>(-1e-9) {
        return Err(FlowError::BelowBaseline(to_f64(min_y)));
    }
    Ok(signed_area(c))
}

fn unit_tangent<T: Scalar>(pts: &[[T; 2]], s: &[T], at: usize, idx: [usize; 3]) -> [T; 2] {
    let nodes = [s[idx[0]], s[idx[1]], s[idx[2]]];
    let w = fd_weights(s[at], &nodes, 1);
    let mut d = [T::zero(); 2];
    for k in 0..3 {
        d[0] = d[0] + w[1][k] * pts[idx[k]][0];
        d[1] = d[1] + w[1][k] * pts[idx[k]][1];
    }
    let norm = d[0].hypot(d[1]);
    [d[0] / norm, d[1] / norm]
}

/// One-sided 3-point tangents in the chord-length parameter, normalised.
pub fn endpoint_tangents<T: Scalar>(c: &SampledCurve<T>) -> EndpointTangents<T> {
    let pts = c.points();
    let n = pts.len();
    if n < 3 {
        let d = [pts[n - 1][0] - pts[0][0], pts[n - 1][1] - pts[0][1]];
        let norm = d[0].hypot(d[1]);
        let t = [d[0] / norm, d[1] / norm];
        return EndpointTangents { at_p: t, at_q: t };
    }
    let s = c.arc_params();
    EndpointTangents {
        at_p: unit_tangent(pts, &s, 0, [0, 1, 2]),
        at_q: unit_tangent(pts, &s, n - 1, [n - 3, n - 2, n - 1]),
    }
}
