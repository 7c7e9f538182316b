use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidSpec(String),
    #[error("resolution too small: {0}")]
    ResolutionTooSmall(String),
    #[error("size mismatch: grid has {expected} nodes, field has {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("hyperplane {0} is not a symmetry of this grid")]
    UnsupportedHyperplane(String),
    #[error("operation requires a {expected} grid")]
    WrongDomainKind { expected: &'static str },
    #[error("field has vanishing gradient")]
    ZeroGradientField,
    #[error("exponent q = {0} outside the admissible range")]
    QOutOfRange(f64),
    #[error("field is not shifted onto the constraint set (shift {0:e})")]
    UnshiftedInput(f64),
    #[error("rescaled ball is not contained in the target domain")]
    BallNotContained,
    #[error("scaling radius {0} outside (0, 1]")]
    ROutOfRange(f64),
    #[error("unsupported dimension N = {0}")]
    UnsupportedDimension(usize),
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("shooting bracket contains no single-sign-change Neumann profile")]
    NoSignChange,
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("operation requires q = 1, got q = {0}")]
    WrongQ(f64),
    #[error("exponent s = {0} must exceed -N/2")]
    SOutOfRange(f64),
    #[error("symmetry axis undefined (first angular mode vanishes); radiality deviation {radiality:e}")]
    AxisUndefined { radiality: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
