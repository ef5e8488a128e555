use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a DPPX record (bad magic)")]
    NotARecord,

    #[error("unsupported record version {0}")]
    UnsupportedVersion(u16),

    #[error("record checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("corrupt record: {0}")]
    CorruptRecord(String),

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptRecord(msg.into())
    }

    /// True for every error that means "these bytes are not a usable record".
    pub fn is_record_error(&self) -> bool {
        matches!(
            self,
            Error::NotARecord
                | Error::UnsupportedVersion(_)
                | Error::Checksum { .. }
                | Error::CorruptRecord(_)
        )
    }
}
