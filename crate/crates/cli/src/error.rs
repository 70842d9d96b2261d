use std::fmt;

use molring::ErrorCategory;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Core(molring::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Core(e) => match e.category() {
                ErrorCategory::Validation => "validation",
                ErrorCategory::Infeasible => "infeasible",
                ErrorCategory::NumericalCap => "numerical-cap",
            },
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "parse" => 2,
            "validation" => 3,
            "infeasible" => 4,
            "numerical-cap" => 5,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Validation(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<molring::Error> for CliError {
    fn from(e: molring::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}
