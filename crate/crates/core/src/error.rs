use thiserror::Error;

pub type Result<T> = std::result::Result<T, CapError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapError {
    #[error("wavenumber must be finite and positive, got {0}")]
    InvalidWavenumber(f64),

    #[error("barrier width must be finite and positive, got {0}")]
    InvalidWidth(f64),

    #[error("barrier chain has no segments")]
    EmptyChain,

    #[error("invalid sampled potential: {0}")]
    InvalidSamples(String),

    #[error("interior growth overflows at k = {k}: |Im q|·width = {growth:.1} exceeds 700")]
    Overflow { k: f64, growth: f64 },

    #[error("spectral singularity at k = {k}: |denominator| = {modulus:e}")]
    SpectralSingularity { k: f64, modulus: f64 },

    #[error("multiple-scattering denominator vanishes at k = {k}: |1 − r2·r1| = {modulus:e}")]
    ResonanceDenominator { k: f64, modulus: f64 },

    #[error("amplitudes evaluated at different wavenumbers ({0} vs {1})")]
    MismatchedWavenumber(f64, f64),

    #[error("reflection back-solve is degenerate at k = {k}: |r·r − t·t| = {modulus:e}")]
    DegenerateBacksolve { k: f64, modulus: f64 },

    #[error("wavenumber {0} requested more than once")]
    DuplicateWavenumber(f64),

    #[error("invalid truncation policy: {0}")]
    InvalidTruncation(String),

    #[error("truncation target survival {target:e} is not reachable (range {low:e} .. {high:e})")]
    UnreachableTruncation { target: f64, low: f64, high: f64 },

    #[error("invalid design parameters: {0}")]
    InvalidParameters(String),

    #[error("no restart produced a finite initial objective")]
    NoFiniteStart,

    #[error("invalid eta bracket ({0}, {1})")]
    InvalidBracket(f64, f64),

    #[error("eta minimum sits at the bracket endpoint {0}")]
    BracketTooNarrow(f64),
}

impl CapError {
    /// Short stable name, used in run summaries and CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            CapError::InvalidWavenumber(_) => "InvalidWavenumber",
            CapError::InvalidWidth(_) => "InvalidWidth",
            CapError::EmptyChain => "EmptyChain",
            CapError::InvalidSamples(_) => "InvalidSamples",
            CapError::Overflow { .. } => "Overflow",
            CapError::SpectralSingularity { .. } => "SpectralSingularity",
            CapError::ResonanceDenominator { .. } => "ResonanceDenominator",
            CapError::MismatchedWavenumber(..) => "MismatchedWavenumber",
            CapError::DegenerateBacksolve { .. } => "DegenerateBacksolve",
            CapError::DuplicateWavenumber(_) => "DuplicateWavenumber",
            CapError::InvalidTruncation(_) => "InvalidTruncation",
            CapError::UnreachableTruncation { .. } => "UnreachableTruncation",
            CapError::InvalidParameters(_) => "InvalidParameters",
            CapError::NoFiniteStart => "NoFiniteStart",
            CapError::InvalidBracket(..) => "InvalidBracket",
            CapError::BracketTooNarrow(_) => "BracketTooNarrow",
        }
    }
}
