use thiserror::Error;

/// Failures surfaced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown root-system family `{0}`")]
    UnknownFamily(String),
    #[error("reflection group exceeded the cap of {0} elements")]
    GroupCapExceeded(usize),
    #[error("multiplicity is not invariant under the reflection group")]
    NonInvariantMultiplicity,
    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureDiverged { estimate: f64, error: f64 },
    #[error("degenerate potential at {0:?}: no critical radius in [1e-8, 1e8]")]
    DegeneratePotential(Vec<f64>),
    #[error("non-coercive potential: sublevel set is unbounded")]
    NonCoercive,
    #[error("potential too singular on region: depth cap {0} reached")]
    DepthCapReached(usize),
    #[error("potential is not verifiably reverse-Holder on the tested range")]
    NotReverseHolder,
    #[error("argument out of supported range: |xy| = {0:e}")]
    KernelOutOfRange(f64),
    #[error("kernel integration failed: {0}")]
    KernelIntegration(String),
    #[error("transform is truncation-dominated (boundary/peak = {0:e})")]
    TruncationDominated(f64),
    #[error("time {0:e} is below the resolvable range")]
    ResolutionLimit(f64),
    #[error("unsupported group for the spectral module")]
    UnsupportedGroup,
    #[error("negative potential sample {value} at node {node}")]
    NegativePotential { node: usize, value: f64 },
    #[error("spectrum truncated below {0}")]
    SpectrumTruncated(f64),
    #[error("zero quadratic form for a nonzero function")]
    DegenerateForm,
    #[error("partition of unity denominator vanished at {0:?}")]
    PartitionDenominator(Vec<f64>),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
