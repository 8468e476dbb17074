use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants are grouped so a front end can map them onto exit codes:
/// schema/usage problems, numeric problems, and I/O problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at metabolite `{row}`, sample `{column}`: cannot read `{value}` as a finite number")]
    Parse {
        row: String,
        column: String,
        value: String,
    },

    #[error("alignment error: no label for sample `{0}`")]
    Alignment(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        // csv wraps I/O failures; surface them as plain I/O errors
        let path = path.into();
        if source.is_io_error() {
            if let csv::ErrorKind::Io(e) = source.into_kind() {
                return Error::Io { path, source: e };
            }
            unreachable!("is_io_error implies ErrorKind::Io");
        }
        Error::Csv { path, source }
    }

    /// True for problems with the shape or content of user input.
    pub fn is_schema(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Alignment(_)
                | Error::Schema(_)
                | Error::Config(_)
                | Error::Csv { .. }
        )
    }

    /// True for numeric failures (degenerate fits, domain violations).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Fit(_) | Error::Numeric(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
