use std::fmt;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Parameter(String),
    Numerical(String),
    Unwritable(String),
    /// Reference tables or oracle checks did not hold.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parameter(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Unwritable(_) => 4,
            CliError::Check(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parameter(m) => write!(f, "parameter error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Unwritable(m) => write!(f, "cannot write output: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<ltd_core::Error> for CliError {
    fn from(e: ltd_core::Error) -> Self {
        if e.is_parameter_error() || matches!(e, ltd_core::Error::Size(_)) {
            CliError::Parameter(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
