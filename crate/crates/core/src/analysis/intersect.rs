//! Intersection number, SGN words and the semi-order between two curves that
//! share the endpoints `P` and `Q`.
//!
//! Gaps are evaluated along a common parameterization: the polar angle when
//! both curves are star-shaped about the origin in the upper half-plane, else
//! the abscissa when both are graphs. Pairs with no common chart fall back to
//! explicit segment crossings, signed by the orientation of the loop each arc
//! pair encloses.

use serde::{Deserialize, Serialize};

use super::words::{Sign, SgnWord};
use crate::error::{FlowError, Result};
use crate::geometry::stencil::{cross, segment_intersection};
use crate::geometry::{endpoint_tangents, ProblemParams, SampledCurve};
use crate::scalar::{lit, Scalar};

/// Chart shared by two curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommonParam {
    Polar,
    Abscissa,
}

/// Position of `c1` relative to `c2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemiOrder {
    Above,
    Below,
    Crossing,
    Touching,
}

/// Minimum endpoint angle between tangents for a strict order.
const TRANSVERSAL_ANGLE: f64 = 1e-6;

/// Gap tolerance `3 h^2`, with `h` the polar arc spacing `pi a / (n - 1)`.
pub fn default_tolerance<T: Scalar>(params: &ProblemParams<T>) -> T {
    let h = params.half_span() * params.dtheta();
    lit::<T>(3.0) * h * h
}

pub fn common_parameterization<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>) -> Option<CommonParam> {
    if c1.is_star_shaped() && c2.is_star_shaped() {
        Some(CommonParam::Polar)
    } else if c1.is_x_monotone() && c2.is_x_monotone() {
        Some(CommonParam::Abscissa)
    } else {
        None
    }
}

struct PolarLookup<'a, T> {
    pts: &'a [[T; 2]],
    th: Vec<T>,
}

impl<'a, T: Scalar> PolarLookup<'a, T> {
    fn new(c: &'a SampledCurve<T>) -> Self {
        PolarLookup { pts: c.points(), th: c.polar_angles() }
    }

    /// Distance from the origin to the polyline along the ray at `theta`.
    fn radius_at(&self, theta: T) -> T {
        let n = self.th.len();
        let idx = self.th.partition_point(|&v| v > theta).clamp(1, n - 1);
        let (p0, p1) = (self.pts[idx - 1], self.pts[idx]);
        if self.th[idx] == theta {
            return p1[0].hypot(p1[1]);
        }
        let u = [theta.cos(), theta.sin()];
        let d = [p1[0] - p0[0], p1[1] - p0[1]];
        let denom = cross(u, d);
        if denom == T::zero() {
            return p0[0].hypot(p0[1]);
        }
        cross(p0, d) / denom
    }
}

fn height_at<T: Scalar>(pts: &[[T; 2]], x: T) -> T {
    let n = pts.len();
    let idx = pts.partition_point(|p| p[0] < x).clamp(1, n - 1);
    let (p0, p1) = (pts[idx - 1], pts[idx]);
    if p1[0] == x {
        return p1[1];
    }
    let w = (x - p0[0]) / (p1[0] - p0[0]);
    p0[1] + w * (p1[1] - p0[1])
}

/// A gap sample: parameter value, signed gap `c1 - c2`, and the length of
/// curve it stands for (used to measure coincident stretches).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample<T> {
    pub param: T,
    pub gap: T,
    pub extent: T,
}

fn merged_params<T: Scalar>(mut v: Vec<T>, descending: bool) -> Vec<T> {
    if descending {
        v.sort_by(|a, b| b.partial_cmp(a).expect("finite parameters"));
    } else {
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
    }
    let eps = lit::<T>(1e-14);
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&l: &T| (l - x).abs() > eps) {
            out.push(x);
        }
    }
    out
}

/// Signed gaps `c1 - c2` at the union of both curves' interior vertices,
/// ordered from `P` to `Q`.
pub fn gap_profile<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>, param: CommonParam) -> Vec<GapSample<T>> {
    match param {
        CommonParam::Polar => {
            let l1 = PolarLookup::new(c1);
            let l2 = PolarLookup::new(c2);
            let n1 = l1.th.len();
            let n2 = l2.th.len();
            let all: Vec<T> = l1.th[1..n1 - 1].iter().chain(&l2.th[1..n2 - 1]).copied().collect();
            let th = merged_params(all, true);
            let mut prev = T::PI();
            th.iter()
                .map(|&t| {
                    let r1 = l1.radius_at(t);
                    let r2 = l2.radius_at(t);
                    let extent = (prev - t) * r1;
                    prev = t;
                    GapSample { param: t, gap: r1 - r2, extent }
                })
                .collect()
        }
        CommonParam::Abscissa => {
            let p1 = c1.points();
            let p2 = c2.points();
            let all: Vec<T> = p1[1..p1.len() - 1].iter().chain(&p2[1..p2.len() - 1]).map(|p| p[0]).collect();
            let xs = merged_params(all, false);
            let mut prev = -c1.half_span();
            xs.iter()
                .map(|&x| {
                    let extent = x - prev;
                    prev = x;
                    GapSample { param: x, gap: height_at(p1, x) - height_at(p2, x), extent }
                })
                .collect()
        }
    }
}

enum WordOutcome {
    Word(SgnWord),
    Coincident(String),
}

fn word_from_gaps<T: Scalar>(samples: &[GapSample<T>], tol: T, scale: T) -> WordOutcome {
    let coincide = lit::<T>(64.0) * T::epsilon() * scale.max(T::one());
    // length spanned by each run of exactly coincident samples
    let mut run: Option<T> = None;
    for s in samples {
        if s.gap.abs() <= coincide {
            let span = run.map_or(T::zero(), |r| r + s.extent);
            if span > tol {
                return WordOutcome::Coincident("curves coincide over a sub-arc longer than the tolerance".into());
            }
            run = Some(span);
        } else {
            run = None;
        }
    }
    let mut letters: Vec<Sign> = Vec::new();
    let mut contact_since_last = false;
    for s in samples {
        let sign = if s.gap > tol {
            Some(Sign::Plus)
        } else if s.gap < -tol {
            Some(Sign::Minus)
        } else {
            None
        };
        match sign {
            None => {
                if !letters.is_empty() {
                    contact_since_last = true;
                }
            }
            Some(sg) => {
                match letters.last() {
                    Some(&last) if last == sg && !contact_since_last => {}
                    _ => letters.push(sg),
                }
                contact_since_last = false;
            }
        }
    }
    match SgnWord::new(letters) {
        Some(w) => WordOutcome::Word(w),
        None => WordOutcome::Coincident("curves are indistinguishable at the gap tolerance".into()),
    }
}

fn point_at<T: Scalar>(pts: &[[T; 2]], s: &[T], pos: T) -> [T; 2] {
    let n = pts.len();
    let idx = s.partition_point(|&v| v < pos).clamp(1, n - 1);
    let seg = s[idx] - s[idx - 1];
    let w = if seg > T::zero() { (pos - s[idx - 1]) / seg } else { T::zero() };
    [
        pts[idx - 1][0] + w * (pts[idx][0] - pts[idx - 1][0]),
        pts[idx - 1][1] + w * (pts[idx][1] - pts[idx - 1][1]),
    ]
}

fn subpath<T: Scalar>(pts: &[[T; 2]], s: &[T], from: T, to: T) -> Vec<[T; 2]> {
    let mut out = vec![point_at(pts, s, from)];
    for (p, &sv) in pts.iter().zip(s) {
        if sv > from && sv < to {
            out.push(*p);
        }
    }
    out.push(point_at(pts, s, to));
    out
}

fn word_by_crossings<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>, tol: T) -> Result<WordOutcome> {
    let (a, b) = (c1.points(), c2.points());
    let (s1, s2) = (c1.arc_params(), c2.arc_params());
    let (len1, len2) = (s1[s1.len() - 1], s2[s2.len() - 1]);
    let mut hits: Vec<(T, T)> = Vec::new();
    for i in 0..a.len() - 1 {
        for j in 0..b.len() - 1 {
            if let Some((s, t)) = segment_intersection(a[i], a[i + 1], b[j], b[j + 1]) {
                let p1 = s1[i] + s * (s1[i + 1] - s1[i]);
                let p2 = s2[j] + t * (s2[j + 1] - s2[j]);
                hits.push((p1, p2));
            }
        }
    }
    hits.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite arc positions"));
    let mut kept: Vec<(T, T)> = Vec::new();
    for h in hits {
        if h.0 <= tol || h.0 >= len1 - tol || h.1 <= tol || h.1 >= len2 - tol {
            continue;
        }
        if kept.last().is_none_or(|k| h.0 - k.0 > tol) {
            kept.push(h);
        }
    }
    if kept.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Err(FlowError::Unresolvable("intersections occur in different orders along the two curves".into()));
    }
    let mut breaks = vec![(T::zero(), T::zero())];
    breaks.extend(kept);
    breaks.push((len1, len2));
    let mut letters = Vec::with_capacity(breaks.len() - 1);
    for w in breaks.windows(2) {
        let mut lp = subpath(a, &s1, w[0].0, w[1].0);
        let mut back = subpath(b, &s2, w[0].1, w[1].1);
        back.reverse();
        lp.extend(back);
        let twice: T = (0..lp.len()).map(|k| cross(lp[k], lp[(k + 1) % lp.len()])).sum();
        if twice < T::zero() {
            letters.push(Sign::Plus);
        } else if twice > T::zero() {
            letters.push(Sign::Minus);
        } else {
            return Ok(WordOutcome::Coincident("zero-area arc pair".into()));
        }
    }
    Ok(WordOutcome::Word(SgnWord::new(letters).expect("at least one arc")))
}

fn check_shared_endpoints<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>) -> Result<()> {
    if c1.half_span() != c2.half_span() {
        return Err(FlowError::InvalidProfile("curves do not share their endpoints".into()));
    }
    Ok(())
}

fn outcome<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>, tol: T) -> Result<WordOutcome> {
    check_shared_endpoints(c1, c2)?;
    match common_parameterization(c1, c2) {
        Some(param) => Ok(word_from_gaps(&gap_profile(c1, c2, param), tol, c1.half_span())),
        None => word_by_crossings(c1, c2, tol),
    }
}

/// Ordered signs of `c1 - c2` between consecutive intersections.
pub fn sgn_word<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>, tol: T) -> Result<SgnWord> {
    match outcome(c1, c2, tol)? {
        WordOutcome::Word(w) => Ok(w),
        WordOutcome::Coincident(why) => Err(FlowError::Unresolvable(why)),
    }
}

/// Number of intersections, the shared endpoints included. Contacts within
/// `tol` count once.
pub fn intersection_count<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>, tol: T) -> Result<usize> {
    sgn_word(c1, c2, tol).map(|w| w.z())
}

fn angle_between<T: Scalar>(u: [T; 2], v: [T; 2]) -> T {
    cross(u, v).abs().atan2(u[0] * v[0] + u[1] * v[1])
}

pub fn semi_order<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>, tol: T) -> Result<SemiOrder> {
    let w = match outcome(c1, c2, tol)? {
        WordOutcome::Word(w) => w,
        WordOutcome::Coincident(_) => return Ok(SemiOrder::Touching),
    };
    let strict = |sign: Sign| -> bool {
        if w.len() != 1 || !w.is_all(sign) {
            return false;
        }
        let t1 = endpoint_tangents(c1);
        let t2 = endpoint_tangents(c2);
        let min_angle = lit::<T>(TRANSVERSAL_ANGLE);
        angle_between(t1.at_p, t2.at_p) > min_angle && angle_between(t1.at_q, t2.at_q) > min_angle
    };
    Ok(if strict(Sign::Plus) {
        SemiOrder::Above
    } else if strict(Sign::Minus) {
        SemiOrder::Below
    } else if w.is_all(Sign::Plus) || w.is_all(Sign::Minus) {
        SemiOrder::Touching
    } else {
        SemiOrder::Crossing
    })
}

/// Smallest interior gap `c1 - c2` along the common parameterization.
pub fn min_gap<T: Scalar>(c1: &SampledCurve<T>, c2: &SampledCurve<T>) -> Option<T> {
    let param = common_parameterization(c1, c2)?;
    gap_profile(c1, c2, param).iter().map(|s| s.gap).reduce(T::min)
}

/// `max |rho_i - target(theta_i)|` over the vertices of a star-shaped curve.
pub fn sup_distance_radial<T: Scalar>(c: &SampledCurve<T>, target: impl Fn(T) -> T) -> T {
    c.points()
        .iter()
        .zip(c.polar_angles())
        .map(|(p, th)| (p[0].hypot(p[1]) - target(th)).abs())
        .fold(T::zero(), T::max)
}

/// `max |y_i - target(x_i)|` over the vertices.
pub fn sup_distance_vertical<T: Scalar>(c: &SampledCurve<T>, target: impl Fn(T) -> T) -> T {
    c.points().iter().map(|p| (p[1] - target(p[0])).abs()).fold(T::zero(), T::max)
}
