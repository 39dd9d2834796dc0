use thiserror::Error;

/// Errors raised by model construction, analytic pricing and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jump rates must be strictly increasing and positive (phase {index})")]
    NonIncreasingRates { index: usize },
    #[error("phase weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("bounded-variation model needs a strictly positive drift, got {drift}")]
    NegativeSubordinator { drift: f64 },
    #[error("parameter `{name}` = {value} is out of range")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("positive jump rate requires at least one phase")]
    MissingPhases,
    #[error("Laplace exponent evaluated at pole s = {s}")]
    PoleEvaluation { s: f64 },
    #[error("no admissible risk-neutral calibration: {reason}")]
    NoAdmissibleSolution { reason: String },
    #[error("roots {a} and {b} are not distinct")]
    RootMultiplicity { a: f64, b: f64 },
    #[error("found {found} real roots, expected {expected}")]
    ComplexRoots { found: usize, expected: usize },
    #[error("argument {value} outside the domain: {reason}")]
    DomainError { value: f64, reason: &'static str },
    #[error("credit spread undefined at or below the default barrier (x = {x})")]
    DegenerateAtDefault { x: f64 },
    #[error("premium/protection changes have opposite signs (p_check = {p_check}, a_check = {a_check})")]
    MixedSpecification { p_check: f64, a_check: f64 },
    #[error("no sign change of the fit function below {cap}")]
    BracketExhausted { cap: f64 },
    #[error("creeping threshold A* = 0 reached with a bounded-variation model")]
    InconsistentBoundedVariation,
    #[error("mirror contract is inadmissible (2p - p_hat = {premium}, 2alpha - alpha_hat = {protection})")]
    MirrorInadmissible { premium: f64, protection: f64 },
    #[error("contract value has no sign change in [0, {cap}]")]
    NoSignChange { cap: f64 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("truncation error bound {bound:e} exceeds tolerance {tolerance:e}")]
    HorizonTooShort { bound: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
