//! Located input diagnostics.

use std::fmt;

/// One problem found while reading the inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Stable kebab-case code, e.g. `unbounded-interval`.
    pub code: &'static str,
    pub file: String,
    pub line: usize,
    /// Value path inside the document, e.g. `activities[2].predecessors[0]`.
    pub field: String,
    pub message: String,
}

pub mod codes {
    pub const IO: &str = "io-error";
    pub const MALFORMED: &str = "malformed-document";
    pub const SCHEMA: &str = "schema-violation";
    pub const NO_ACTIVITIES: &str = "no-activities";
    pub const UNBOUNDED: &str = "unbounded-interval";
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: error[{}]", self.file, self.line, self.code)?;
        if !self.field.is_empty() {
            write!(f, " at `{}`", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}
