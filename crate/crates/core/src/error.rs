use thiserror::Error;

/// Errors raised by the physics and quadrature layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("active medium: Im(eps) = {im_eps}, Im(mu) = {im_mu}; both must be non-negative")]
    ActiveMedium { im_eps: f64, im_mu: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("lossless medium has no unique branch for beta1; use the ideal closed forms")]
    LosslessMedium,

    #[error("unsupported lossless medium (eps = {eps}, mu = {mu}); only eps = mu = -1 has closed forms")]
    UnsupportedIdealMedium { eps: String, mu: String },

    #[error("singular interface coefficient at q = {q}")]
    SingularInterface { q: f64 },

    #[error("reflection coefficient pole hit at q = {q} (|denominator| = {denominator:e})")]
    NearPole { q: f64, denominator: f64 },

    #[error("real part of the ideal Green tensor diverges for z_A = {z_a} <= d = {d}")]
    Divergent { z_a: f64, d: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions; worst interval [{a}, {b}] error {error:e}"
    )]
    NonConvergence {
        subdivisions: usize,
        a: f64,
        b: f64,
        error: f64,
    },

    #[error("negative decay rate {rate} at z_A = {z_a}; branch or quadrature inconsistency")]
    NegativeRate { rate: f64, z_a: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),
}

impl Error {
    /// Numerical failures as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::NearPole { .. } | Error::NegativeRate { .. }
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
