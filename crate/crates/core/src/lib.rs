//! Driven curvature flow `V = -kappa + A` of planar curves pinned at
//! `P = (-a, 0)` and `Q = (a, 0)`.
//!
//! The crate evolves a one-parameter family of initial graphs `y = sigma * phi(x)`
//! and classifies each run as escaping past the upper equilibrium arc,
//! converging to it, or converging to the lower equilibrium cap. The numeric
//! core is generic over the scalar type ([`Scalar`]); `f64` aliases are
//! provided at the crate root.

pub mod analysis;
pub mod analytic;
pub mod classify;
pub mod config;
pub mod error;
pub mod evolve;
pub mod geometry;
pub mod interp;
pub mod output;
pub mod scalar;
pub mod verify;

pub use analysis::{SemiOrder, SgnWord};
pub use analytic::{BarrierCircle, BarrierGeometry, InitialFamily, Phi};
pub use classify::{Bracket, Category, ClassifierTolerances};
pub use error::{FlowError, Result};
pub use evolve::{Chart, EventKind, StepControl, StepScheme, TerminationEvent, Trajectory};
pub use geometry::{EndpointTangents, GraphProfile, PolarProfile, ProblemParams, SampledCurve};
pub use scalar::Scalar;

pub type ProblemParams64 = ProblemParams<f64>;
pub type GraphProfile64 = GraphProfile<f64>;
pub type PolarProfile64 = PolarProfile<f64>;
pub type SampledCurve64 = SampledCurve<f64>;
pub type InitialFamily64 = InitialFamily<f64>;
pub type StepControl64 = StepControl<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ClassifierTolerances64 = ClassifierTolerances<f64>;
pub type Bracket64 = Bracket<f64>;

pub type ProblemParams32 = ProblemParams<f32>;
pub type GraphProfile32 = GraphProfile<f32>;
pub type PolarProfile32 = PolarProfile<f32>;
pub type SampledCurve32 = SampledCurve<f32>;
