//! Process exit codes and the error type that carries them.

use std::fmt;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        Self { code: EXIT_CONFIG, message }
    }

    pub fn solver(message: String) -> Self {
        Self { code: EXIT_SOLVER, message }
    }

    pub fn io(message: String) -> Self {
        Self { code: EXIT_IO, message }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<rtm_core::Error> for CliError {
    fn from(e: rtm_core::Error) -> Self {
        use rtm_core::Error;
        let code = match e {
            Error::Domain(_) | Error::Geometry(_) | Error::Coincident => EXIT_CONFIG,
            Error::Solver(_) => EXIT_SOLVER,
            Error::Format(_) | Error::Io(_) => EXIT_IO,
        };
        Self { code, message: e.to_string() }
    }
}
