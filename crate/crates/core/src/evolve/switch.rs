use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::geometry::{GraphProfile, PolarProfile, ProblemParams, SampledCurve};
use crate::interp::MonotoneCubic;
use crate::scalar::Scalar;

/// Representation used by the evolver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Graph,
    Polar,
}

impl std::fmt::Display for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Chart::Graph => "graph",
            Chart::Polar => "polar",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartProfile<T> {
    Graph(GraphProfile<T>),
    Polar(PolarProfile<T>),
}

/// Resamples `c` onto the `target` chart grid of `params` by monotone cubic
/// interpolation; the pinned endpoints are set exactly.
pub fn switch_chart<T: Scalar>(c: &SampledCurve<T>, params: &ProblemParams<T>, target: Chart) -> Result<ChartProfile<T>> {
    match target {
        Chart::Graph => to_graph(c, params).map(ChartProfile::Graph),
        Chart::Polar => to_polar(c, params).map(ChartProfile::Polar),
    }
}

pub fn to_graph<T: Scalar>(c: &SampledCurve<T>, params: &ProblemParams<T>) -> Result<GraphProfile<T>> {
    if !c.is_x_monotone() {
        return Err(FlowError::NotRepresentable {
            chart: "graph",
            reason: "curve is not single-valued over x".into(),
        });
    }
    let (x, y): (Vec<T>, Vec<T>) = c.points().iter().map(|p| (p[0], p[1])).unzip();
    let f = MonotoneCubic::new(x, y)?;
    let xs = params.x_nodes();
    let n = xs.len();
    let mut u: Vec<T> = xs.iter().map(|&x| f.eval(x)).collect();
    u[0] = T::zero();
    u[n - 1] = T::zero();
    GraphProfile::new(*params, u)
}

pub fn to_polar<T: Scalar>(c: &SampledCurve<T>, params: &ProblemParams<T>) -> Result<PolarProfile<T>> {
    if !c.is_star_shaped() {
        return Err(FlowError::NotRepresentable {
            chart: "polar",
            reason: "some ray from the origin meets the curve more than once".into(),
        });
    }
    let th = c.polar_angles();
    let (t, r): (Vec<T>, Vec<T>) = th.iter().zip(c.points()).rev().map(|(&t, p)| (t, p[0].hypot(p[1]))).unzip();
    let f = MonotoneCubic::new(t, r)?;
    let nodes = params.theta_nodes();
    let n = nodes.len();
    let mut rho: Vec<T> = nodes.iter().map(|&t| f.eval(t)).collect();
    rho[0] = params.half_span();
    rho[n - 1] = params.half_span();
    PolarProfile::new(*params, rho)
}
