use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical invariant violated: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Io(_) => 4,
        }
    }

    /// Prefix a core error with the config path it came from.
    pub fn at(path: &str, e: openbath_core::Error) -> Self {
        match HarnessError::from(e) {
            HarnessError::Config(m) => HarnessError::Config(format!("{path}: {m}")),
            other => other,
        }
    }
}

impl From<openbath_core::Error> for HarnessError {
    fn from(e: openbath_core::Error) -> Self {
        if e.is_input_error() {
            HarnessError::Config(e.to_string())
        } else {
            HarnessError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
