use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |A - A*| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("quasi-momentum component {value} is outside [0, 2π)")]
    QuasiMomentumOutOfRange { value: f64 },

    #[error("quasi-momentum has dimension {got}, expected {expected}")]
    QuasiMomentumDimension { got: usize, expected: usize },

    #[error("flux {p}/{q} is not a reduced fraction in [0, 1)")]
    InvalidFlux { p: u64, q: u64 },

    #[error("cannot parse flux `{0}`, expected p/q")]
    FluxSyntax(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("plane-wave cutoff {cutoff} is below the potential's largest frequency {max_frequency}")]
    CutoffTooSmall { cutoff: usize, max_frequency: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("energy {energy} lies inside the band [{lo}, {hi}]")]
    EnergyInBand { energy: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error, with any context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the failure is numerical rather than a bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self.root(), Error::NoConvergence { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_keeps_the_root_cause() {
        let e = Error::NoConvergence { dim: 4 }.context("flux 1/4 at k = [0.0, 0.0]");
        assert!(e.is_numerical());
        assert!(matches!(e.root(), Error::NoConvergence { dim: 4 }));
        assert_eq!(e.to_string(), "flux 1/4 at k = [0.0, 0.0]: eigensolver did not converge for a 4x4 matrix");
        assert!(!Error::InvalidArgument("x".into()).context("y").is_numerical());
    }
}
