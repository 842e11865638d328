use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown generator kind `{0}`")]
    UnknownKind(String),
    #[error("invalid power exponent {0}: need p > 1 and p != 2")]
    InvalidPower(f64),
    #[error("{field} = {value} lies outside the domain {domain}")]
    OutOfDomain {
        field: &'static str,
        value: f64,
        domain: String,
    },
    #[error("{field} = {value} lies outside the image of h")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("adaptive quadrature did not converge on [{lower}, {upper}]")]
    QuadratureNonConvergence { lower: f64, upper: f64 },
    #[error("root solve did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("random vectors live on different spaces ({left} vs {right} outcomes)")]
    SpaceMismatch { left: usize, right: usize },
    #[error("length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("geodesic leaves the domain at t = {t}")]
    GeodesicExitsDomain { t: f64 },
    #[error("ODE integration left the domain at t = {t} (x = {value})")]
    IntegrationBlowUp { t: f64, value: f64 },
    #[error("step count {0} is too small (need at least 16)")]
    StepCountTooSmall(usize),
    #[error("point set is empty")]
    EmptySet,
    #[error("sample is empty")]
    EmptySample,
    #[error("sample of size {0} is too small (need at least 2)")]
    SampleTooSmall(usize),
    #[error("invalid probability weights: {0}")]
    InvalidWeights(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("first partition does not refine the second")]
    RefinementViolation,
    #[error("generator `{0}` has no shipped invariant group operation")]
    UnsupportedGenerator(String),
    #[error("sampler `{sampler}` does not match the domain of generator `{generator}`")]
    DomainSamplerMismatch { sampler: String, generator: String },
    #[error("invalid model parameter {field}: {reason}")]
    InvalidModel { field: &'static str, reason: String },
    #[error("invalid argument {field}: {reason}")]
    InvalidArgument { field: &'static str, reason: String },
}
