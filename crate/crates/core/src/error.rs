use thiserror::Error;

/// Errors raised by granule, state, channel and learning operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry count {found} does not match shape {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (‖M − M†‖_F = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge (dim {dim}, ‖H‖_F = {frobenius:.3e})")]
    EigenNonConvergence { dim: usize, frobenius: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace {trace} deviates from 1")]
    InvalidTrace { trace: f64 },

    #[error("vector norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("Bloch vector norm {norm} exceeds 1")]
    InvalidBlochVector { norm: f64 },

    #[error("operator is not an effect (spectrum [{min_eigenvalue:.3e}, {max_eigenvalue:.3e}] outside [0, 1])")]
    NotAnEffect {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("effects do not sum to the identity (‖Σ E − I‖_F = {deviation:.3e})")]
    Incomplete { deviation: f64 },

    #[error("effect {index} is not sharp (‖P² − P‖_F = {deviation:.3e})")]
    NotSharp { index: usize, deviation: f64 },

    #[error("projectors {i} and {j} are not orthogonal (‖PᵢPⱼ‖_F = {overlap:.3e})")]
    NotOrthogonal { i: usize, j: usize, overlap: f64 },

    #[error("empty family")]
    EmptyFamily,

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid effect parameters: alpha = {alpha}, ‖e‖ = {norm}")]
    InvalidEffectParameters { alpha: f64, norm: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("granules {i} and {j} do not commute (‖[Eᵢ, Eⱼ]‖_F = {norm:.3e})")]
    Incompatible { i: usize, j: usize, norm: f64 },

    #[error("outcome {index} has probability {probability:.3e}; branch cannot be conditioned")]
    ZeroProbabilityBranch { index: usize, probability: f64 },

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid Kraus set: {0}")]
    InvalidChannel(String),

    #[error("parameter {name} = {value} outside its valid range")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("invalid priors: pi0 = {pi0}, pi1 = {pi1}")]
    InvalidPriors { pi0: f64, pi1: f64 },

    #[error("invalid classical granule: {0}")]
    InvalidGranule(String),

    #[error("all encoding weights are zero")]
    DegenerateEncoding,

    #[error("membership {value} outside [0, 1]")]
    InvalidMembership { value: f64 },

    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),

    #[error("parameter vector has length {found}, expected {expected}")]
    ThetaLength { expected: usize, found: usize },

    #[error("dataset has {data} classes but the measurement has {outcomes} outcomes")]
    ClassCountMismatch { data: usize, outcomes: usize },

    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("input kind does not match pipeline mode: {0}")]
    ModeMismatch(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable identifier for structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite => "non_finite",
            Error::NotSquare { .. } => "not_square",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::EigenNonConvergence { .. } => "eigen_non_convergence",
            Error::NotPsd { .. } => "not_psd",
            Error::InvalidTrace { .. } => "invalid_trace",
            Error::NotNormalized { .. } => "not_normalized",
            Error::InvalidBlochVector { .. } => "invalid_bloch_vector",
            Error::NotAnEffect { .. } => "not_an_effect",
            Error::Incomplete { .. } => "incomplete",
            Error::NotSharp { .. } => "not_sharp",
            Error::NotOrthogonal { .. } => "not_orthogonal",
            Error::EmptyFamily => "empty_family",
            Error::InvalidIndexSet(_) => "invalid_index_set",
            Error::InvalidEffectParameters { .. } => "invalid_effect_parameters",
            Error::InvalidWeights(_) => "invalid_weights",
            Error::Incompatible { .. } => "incompatible",
            Error::ZeroProbabilityBranch { .. } => "zero_probability_branch",
            Error::ZeroShots => "zero_shots",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InvalidChannel(_) => "invalid_channel",
            Error::ParameterOutOfRange { .. } => "parameter_out_of_range",
            Error::InvalidPriors { .. } => "invalid_priors",
            Error::InvalidGranule(_) => "invalid_granule",
            Error::DegenerateEncoding => "degenerate_encoding",
            Error::InvalidMembership { .. } => "invalid_membership",
            Error::InvalidAnsatz(_) => "invalid_ansatz",
            Error::ThetaLength { .. } => "theta_length",
            Error::ClassCountMismatch { .. } => "class_count_mismatch",
            Error::NonFiniteLoss { .. } => "non_finite_loss",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::ModeMismatch(_) => "mode_mismatch",
            Error::EmptyDataset => "empty_dataset",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
