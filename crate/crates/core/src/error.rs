use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Usage and resource errors map to exit code 1 in the command-line tool;
/// failed verifications are not errors but reports with `pass == false`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    Cap {
        what: &'static str,
        needed: String,
        cap: String,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}

pub(crate) fn cap_exceeded<T>(
    what: &'static str,
    needed: impl std::fmt::Display,
    cap: impl std::fmt::Display,
) -> Result<T> {
    Err(Error::Cap {
        what,
        needed: needed.to_string(),
        cap: cap.to_string(),
    })
}
