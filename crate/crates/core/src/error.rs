use thiserror::Error;

/// Errors raised by the flow toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("curve dips below the baseline (min y = {0:e}); enclosed area undefined")]
    BelowBaseline(f64),
    #[error("grim reaper evaluated outside its domain: |x| = {x} >= b*pi/2 = {limit}")]
    GrimReaperDomain { x: f64, limit: f64 },
    #[error("grim reaper width b = {b} must satisfy b < 2a/pi = {limit}")]
    GrimReaperWidth { b: f64, limit: f64 },
    #[error("circle radius {r0} must exceed the equilibrium radius 1/A = {eq}")]
    CircleRadius { r0: f64, eq: f64 },
    #[error("initial curve meets the upper equilibrium {0} times (at most 4 allowed)")]
    TooManyIntersections(usize),
    #[error("intersection structure unresolvable: {0}")]
    Unresolvable(String),
    #[error("curve not representable in the {chart} chart: {reason}")]
    NotRepresentable { chart: &'static str, reason: String },
    #[error("blow-up: {0}")]
    Blowup(String),
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),
    #[error("monotonicity audit failed: {0}")]
    Monotonicity(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FlowError {
    fn from(e: std::io::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FlowError>;
