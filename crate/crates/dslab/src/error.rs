use std::fmt;

use serde_json::json;

/// Failure of a command-line run, carrying its exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { kind: "usage", message: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError { kind: "io", message: msg.into() }
    }

    /// 2 for usage errors, 1 for everything raised during computation.
    pub fn exit_code(&self) -> u8 {
        if self.kind == "usage" {
            2
        } else {
            1
        }
    }

    /// The single-line JSON record written to stderr.
    pub fn record(&self) -> String {
        json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit": self.exit_code(),
            }
        })
        .to_string()
    }

    pub fn context(self, what: &str) -> Self {
        CliError { kind: self.kind, message: format!("{what}: {}", self.message) }
    }
}

impl From<dslab_core::Error> for CliError {
    fn from(e: dslab_core::Error) -> Self {
        use dslab_core::Error as E;
        let kind = match &e {
            E::Domain(_) => "domain",
            E::Degenerate { .. } => "degenerate",
            E::PrecisionExhausted { .. } => "precision",
            E::Unsupported(_) => "unsupported",
        };
        CliError { kind, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_record() {
        let u = CliError::usage("empty range");
        assert_eq!(u.exit_code(), 2);
        let v: serde_json::Value = serde_json::from_str(&u.record()).unwrap();
        assert_eq!(v["error"]["kind"], "usage");
        assert_eq!(v["error"]["exit"], 2);
        let d: CliError = dslab_core::Error::Degenerate { q: 3 }.into();
        assert_eq!(d.exit_code(), 1);
        assert_eq!(d.kind, "degenerate");
    }
}
