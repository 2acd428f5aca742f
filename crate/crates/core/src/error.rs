use thiserror::Error;

/// Errors raised by the geometry, integration and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension n = {0} is not supported (n >= 2 required)")]
    Dimension(usize),
    #[error("expected {expected} coordinates, got {got}")]
    Length { expected: usize, got: usize },
    #[error("frame index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("singular point: horizontal gradient norm {norm:e} <= {eps:e}")]
    SingularPoint { norm: f64, eps: f64 },
    #[error("point is off the surface: |u| = {residual:e} > {tol:e}")]
    OffSurface { residual: f64, tol: f64 },
    #[error("shape operator is not symmetric on xi' (deviation {0:e})")]
    NonSymmetric(f64),
    #[error("degenerate rotational profile: {0}")]
    DegenerateProfile(String),
    #[error("not a singular-point candidate: |grad u(0)| = {0:e}")]
    NotSingularCandidate(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepUnderflow { s: f64, h: f64 },
    #[error("orbit does not close: closure error {closure:e} > {tol:e}")]
    NotPeriodic { closure: f64, tol: f64 },
    #[error("initial point lies on the alpha-axis separatrix or a stationary point")]
    OnSeparatrix,
    #[error("no beta-axis crossing found within s = {0}")]
    NoCrossing(f64),
    #[error("Newton projection onto the surface did not converge (|u| = {0:e})")]
    ProjectionFailure(f64),
    #[error("xi' basis pivot switched between neighbouring points")]
    PivotSwitch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::Dimension(n))
    } else {
        Ok(())
    }
}
