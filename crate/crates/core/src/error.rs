use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trap: {0}")]
    InvalidTrap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("width ratio {ratio} is below the critical ratio {critical} (final depth would exceed initial depth)")]
    BelowCriticalRatio { ratio: f64, critical: f64 },

    #[error("root bracketing failed for level {level} of trap (U = {strength}): {reason}")]
    RootBracket {
        level: usize,
        strength: f64,
        reason: String,
    },

    #[error("overlap matrix is not a projector restriction: largest singular value {0}")]
    OverlapCorrupt(f64),

    #[error("level probability {0} outside [0, 1]")]
    LevelProbability(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure at {params}: {source}")]
    AtPoint {
        params: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::RootBracket { .. } | Error::OverlapCorrupt(_) | Error::LevelProbability(_) => true,
            Error::AtPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_failures_are_distinguished_from_bad_input() {
        assert!(Error::OverlapCorrupt(1.1).is_numerical());
        assert!(Error::LevelProbability(-0.2).is_numerical());
        assert!(!Error::BelowCriticalRatio {
            ratio: 0.1,
            critical: 0.5
        }
        .is_numerical());
        assert!(!Error::InvalidArgument("x".into()).is_numerical());
        let wrapped = |source| Error::AtPoint {
            params: "U_i=1".into(),
            source: Box::new(source),
        };
        assert!(wrapped(Error::OverlapCorrupt(2.0)).is_numerical());
        assert!(!wrapped(Error::Config("bad".into())).is_numerical());
    }
}
