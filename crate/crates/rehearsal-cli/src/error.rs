use thiserror::Error;

use rehearsal::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 0 success, 1 i/o, 2 config, 3 runtime degeneracy, 4 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) => match e {
                CoreError::TooManyDegenerateDraws { .. } | CoreError::SingularGram { .. } | CoreError::FitTolerance { .. } => 3,
                _ => 2,
            },
            CliError::Verification(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config { field: "x".into(), message: "y".into() }.exit_code(), 2);
        assert_eq!(CliError::from(CoreError::TooManyDegenerateDraws { failed: 20, trials: 100 }).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::TooFewTrials(1)).exit_code(), 2);
        assert_eq!(CliError::Verification("lemmas".into()).exit_code(), 4);
    }
}
