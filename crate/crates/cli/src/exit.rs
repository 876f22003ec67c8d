//! Exit codes and the error type that carries them.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O or internal failure |
//! | 2 | usage error or invalid input |
//! | 3 | no robust bridge set |
//! | 4 | partial reconstruction operator not invertible |
//! | 5 | audit budget exceeded (partial results written) |

use framebridge::Error;

pub const SUCCESS: u8 = 0;
pub const FAILURE: u8 = 1;
pub const USAGE: u8 = 2;
pub const NO_ROBUST_BRIDGE: u8 = 3;
pub const NOT_INVERTIBLE: u8 = 4;
pub const BUDGET_EXCEEDED: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    NoRobustBridge(String),
    #[error("{0}")]
    NotInvertible(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => USAGE,
            CliError::NoRobustBridge(_) => NO_ROBUST_BRIDGE,
            CliError::NotInvertible(_) => NOT_INVERTIBLE,
            CliError::Io(_) | CliError::Internal(_) => FAILURE,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoRobustBridge { minimal_redundancy } => {
                CliError::NoRobustBridge(if minimal_redundancy {
                    "no robust bridge set found although the surviving analysis vectors span \
                     the space (minimal redundancy holds)"
                        .into()
                } else {
                    "no robust bridge set exists: the surviving analysis vectors do not span \
                     the space (minimal redundancy fails)"
                        .into()
                })
            }
            Error::NotRobust { residual } => CliError::NoRobustBridge(format!(
                "bridge set is not robust: bridging equation residual {residual:e}"
            )),
            Error::NotInvertible { rank, size } => CliError::NotInvertible(format!(
                "partial reconstruction operator is not invertible (I - M has rank {rank} of \
                 {size}); try `framebridge bridge` instead"
            )),
            Error::NoConvergence | Error::ResampleLimit(_) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_stable() {
        assert_eq!(CliError::Usage(String::new()).code(), 2);
        assert_eq!(CliError::Input(String::new()).code(), 2);
        assert_eq!(CliError::Io(String::new()).code(), 1);
        assert_eq!(
            CliError::from(Error::NoRobustBridge {
                minimal_redundancy: false
            })
            .code(),
            3
        );
        assert_eq!(CliError::from(Error::NotRobust { residual: 1.0 }).code(), 3);
        assert_eq!(
            CliError::from(Error::NotInvertible { rank: 0, size: 1 }).code(),
            4
        );
        assert_eq!(CliError::from(Error::EmptyFrame).code(), 2);
        assert_eq!(BUDGET_EXCEEDED, 5);
    }

    #[test]
    fn diagnosis_names_minimal_redundancy() {
        let holds = CliError::from(Error::NoRobustBridge {
            minimal_redundancy: true,
        });
        assert!(holds.to_string().contains("minimal redundancy holds"));
        let fails = CliError::from(Error::NoRobustBridge {
            minimal_redundancy: false,
        });
        assert!(fails.to_string().contains("minimal redundancy fails"));
    }
}
