use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("numeric failure: {msg} (last estimate {estimate:e})")]
    Numeric { msg: String, estimate: f64 },
    #[error("pair frame undefined at gamma = {0}")]
    DegenerateFrame(f64),
    #[error("near-parallel singularity at x = {0}; use the Legendre-coefficient path")]
    Singular(f64),
    #[error("isotropic at alpha = {0}: no nematic branch")]
    Isotropic(f64),
    #[error("optimization failed: {0}")]
    Optimization(String),
}

impl Error {
    /// True for errors caused by bad caller input rather than a numerical breakdown.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Domain(_))
    }
}
