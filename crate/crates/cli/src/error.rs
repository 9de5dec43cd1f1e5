use bass_core::Error as CoreError;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn classify(e: &CoreError, msg: String) -> Self {
        match e {
            _ if e.is_numerical() => CliError::Numerical(msg),
            CoreError::InvalidConfig(_) | CoreError::LockedTooLarge { .. } => CliError::Spec(msg),
            _ => CliError::Data(msg),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        Self::classify(&e, msg)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Attaches what was being done to a core error, keeping its class.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for bass_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| {
            let msg = format!("{}: {e}", what());
            CliError::classify(&e, msg)
        })
    }
}

impl<T> Context<T> for std::io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::Data(format!("{}: {e}", what())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes() {
        assert_eq!(
            CliError::from(CoreError::InvalidConfig("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(CoreError::TruncatedPayload {
                expected: 8,
                found: 4
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::from(CoreError::NonFinite(3)).exit_code(), 4);
        let wrapped = CoreError::Diverged {
            iteration: 2,
            trace: vec![],
        };
        let e: CliResult<()> = Err(wrapped).context(|| "item 0".into());
        assert_eq!(e.unwrap_err().exit_code(), 4);
    }
}
