use std::fmt;
use std::process::ExitCode;

use dppx_core::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Class {
    /// Some runs in a batch failed; details were reported per run.
    Partial = 1,
    Usage = 2,
    Io = 3,
    CorruptRecord = 4,
    Consistency = 5,
}

#[derive(Debug)]
pub struct Failure {
    pub class: Class,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            class: Class::Usage,
            message: message.into(),
        }
    }

    pub fn consistency(message: impl Into<String>) -> Self {
        Self {
            class: Class::Consistency,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self {
            class: Class::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.class as u8)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let class = match &err {
            e if e.is_record_error() => Class::CorruptRecord,
            Error::Io { .. } | Error::Pgm(_) => Class::Io,
            _ => Class::Usage,
        };
        Self {
            class,
            message: err.to_string(),
        }
    }
}
