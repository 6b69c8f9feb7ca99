use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot build a state from an empty term list")]
    EmptyState,
    #[error("all amplitudes are zero; state cannot be normalized")]
    ZeroNorm,
    #[error("amplitude is not finite")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
    #[error("atom site {site} out of range for a register of {size} atoms")]
    InvalidSite { site: usize, size: usize },
    #[error("photon is in the wrong polarization basis: {0}")]
    Basis(&'static str),
    #[error("state carries no photon")]
    PhotonAbsent,
    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("site {0} is not in a definite state and cannot be detached")]
    NotDefinite(usize),
    #[error("reflection denominator vanishes (|d| = {0:e})")]
    SingularParameters(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("coefficients are degenerate (alpha * beta = 0); nothing to concentrate")]
    DegenerateCoefficients,
    #[error("coefficients are not normalized (|alpha|^2 + |beta|^2 = {0})")]
    Unnormalized(f64),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
}
