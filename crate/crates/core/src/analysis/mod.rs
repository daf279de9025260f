//! Sturmian diagnostics (intersection number, SGN words, semi-order) and the
//! length/area Lyapunov monitors, as pure functions over sampled curves.

mod energy;
mod intersect;
mod words;

pub use energy::{
    dissipation_estimate, endpoint_curvature_deviation, energy, lyapunov_graph, EnergyRecord, GraphLyapunov,
};
pub use intersect::{
    common_parameterization, default_tolerance, gap_profile, intersection_count, min_gap, semi_order, sgn_word,
    sup_distance_radial, sup_distance_vertical, CommonParam, SemiOrder,
};
pub use words::{subword, Sign, SgnWord};
