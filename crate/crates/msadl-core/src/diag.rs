//! Uniform diagnostics produced by every stage of the toolkit.
//!
//! Diagnostics never abort a stage: parsing, resolution and validation all
//! collect and return them. Severity [`Severity::Error`] blocks downstream
//! transforms. The code registry is documented in `docs/diagnostics.md`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Source position with a column span on one line.
///
/// `line == 0` marks a location that is unknown (programmatically built
/// models). Locations order by file, then line, then column, which is the
/// order diagnostics are reported in.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub end_col: u32,
}

impl Location {
    pub fn new(file: impl Into<String>, line: u32, col: u32, end_col: u32) -> Self {
        Location { file: file.into(), line, col, end_col }
    }

    pub fn point(file: impl Into<String>, line: u32, col: u32) -> Self {
        Location { file: file.into(), line, col, end_col: col }
    }

    pub fn is_unknown(&self) -> bool {
        self.line == 0
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unknown() {
            if self.file.is_empty() {
                write!(f, "<model>")
            } else {
                write!(f, "{}", self.file)
            }
        } else if self.end_col > self.col {
            write!(f, "{}:{}:{}-{}", self.file, self.line, self.col, self.end_col)
        } else {
            write!(f, "{}:{}:{}", self.file, self.line, self.col)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
            Severity::Info => write!(f, "info"),
        }
    }
}

/// Diagnostic codes. Every code emitted anywhere in the toolkit lives here
/// and in `docs/diagnostics.md`.
pub mod codes {
    pub const PARSE_ERROR: &str = "PARSE_ERROR";
    pub const ANNOTATION_MALFORMED: &str = "ANNOTATION_MALFORMED";
    pub const ANNOTATION_UNKNOWN: &str = "ANNOTATION_UNKNOWN";
    pub const VIEW_MISMATCH: &str = "VIEW_MISMATCH";
    pub const REF_UNRESOLVED: &str = "REF_UNRESOLVED";
    pub const IMPORT_CYCLE: &str = "IMPORT_CYCLE";
    pub const DUPLICATE_NAME: &str = "DUPLICATE_NAME";
    pub const CARDINALITY_INVALID: &str = "CARDINALITY_INVALID";
    pub const REFINEMENT_INVALID: &str = "REFINEMENT_INVALID";
    pub const REFINEMENT_INCOMPATIBLE: &str = "REFINEMENT_INCOMPATIBLE";
    pub const URI_INVALID: &str = "URI_INVALID";
    pub const INTERFACE_STYLE: &str = "INTERFACE_STYLE";
    pub const ACCESS_POINT_INVALID: &str = "ACCESS_POINT_INVALID";
    pub const BEHAVIOUR_INVALID: &str = "BEHAVIOUR_INVALID";
    pub const DDD_IDENTITY_FIELD_MISSING: &str = "DDD_IDENTITY_FIELD_MISSING";
    pub const DDD_IDENTITY_NOT_SCALAR: &str = "DDD_IDENTITY_NOT_SCALAR";
    pub const DDD_NO_ANNOTATION: &str = "DDD_NO_ANNOTATION";
    pub const DDD_CONFLICT: &str = "DDD_CONFLICT";
    pub const SALT_MISMATCH: &str = "SALT_MISMATCH";
    pub const AMBIGUOUS_PARADIGM: &str = "AMBIGUOUS_PARADIGM";
    pub const STUCK_DEADLOCK: &str = "STUCK_DEADLOCK";
    pub const TYPE_ERROR: &str = "TYPE_ERROR";
    pub const MAX_STEPS_EXCEEDED: &str = "MAX_STEPS_EXCEEDED";
    pub const DEPTH_EXCEEDED: &str = "DEPTH_EXCEEDED";
    pub const SCHEDULE_INVALID: &str = "SCHEDULE_INVALID";
    pub const FORMAT_VERSION_UNSUPPORTED: &str = "FORMAT_VERSION_UNSUPPORTED";
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub location: Location,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: &str, message: impl Into<String>, location: Location) -> Self {
        Diagnostic { severity, code: code.to_string(), message: message.into(), location }
    }

    pub fn error(code: &str, message: impl Into<String>, location: Location) -> Self {
        Self::new(Severity::Error, code, message, location)
    }

    pub fn warning(code: &str, message: impl Into<String>, location: Location) -> Self {
        Self::new(Severity::Warning, code, message, location)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {}: {}", self.severity, self.code, self.location, self.message)
    }
}

/// Sort by location, then severity/code/message, and drop exact duplicates.
/// Every stage that returns a diagnostic list runs its output through this,
/// which is what makes reports deterministic.
pub fn finish(mut diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    diags.sort_by(|a, b| {
        (&a.location, a.severity, &a.code, &a.message).cmp(&(&b.location, b.severity, &b.code, &b.message))
    });
    diags.dedup();
    diags
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
