//! Textual concrete syntax for core, aspect, weaving and requirements
//! models, plus the canonical printer and the JSON and Graphviz exports.
//!
//! ```text
//! model M1 {
//!   class Student {
//!     attr IdStudent : Integer;
//!     op NewSubscription(IdSpeciality : Integer) : Boolean;
//!   }
//!   association Follows {
//!     end followers : Student 0..*;
//!     end specialities : Speciality navigable 1..2;
//!   }
//! }
//! ```
//!
//! Files are UTF-8; `//` starts a comment running to end of line.

mod diagram;
mod lexer;
mod parser;
mod printer;
mod structured;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use diagram::{export_diagram, export_woven_diagram};
pub use parser::{parse_aspect, parse_core, parse_requirements, parse_weaving, parse_woven};
pub use printer::{print_aspect, print_core, print_requirements, print_weaving, print_woven};
pub use structured::{export_structured, import_structured, Document, StructuredError, FORMAT_NAME, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: &str, start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        SourceSpan {
            file: file.to_string(),
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub(crate) fn point(file: &str, line: u32, col: u32) -> Self {
        SourceSpan::new(file, line, col, line, col)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseDiagnostic {
    pub(crate) fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
        }
    }

    pub(crate) fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            severity: Severity::Warning,
            span,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.span, self.message)
    }
}

/// Outcome of a parse: a value, or at least one error diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: Option<T>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl<T> Parsed<T> {
    pub(crate) fn ok(value: T, diagnostics: Vec<ParseDiagnostic>) -> Self {
        Parsed {
            value: Some(value),
            diagnostics,
        }
    }

    pub(crate) fn failed(diagnostics: Vec<ParseDiagnostic>) -> Self {
        debug_assert!(diagnostics.iter().any(ParseDiagnostic::is_error));
        Parsed {
            value: None,
            diagnostics,
        }
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }

    /// The value, or the first error diagnostic.
    pub fn into_result(self) -> Result<T, ParseDiagnostic> {
        match self.value {
            Some(v) => Ok(v),
            None => Err(self
                .diagnostics
                .into_iter()
                .find(ParseDiagnostic::is_error)
                .expect("failed parse carries an error")),
        }
    }
}

/// Model kind inferred from a file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Core,
    Aspect,
    Weaving,
    Requirements,
}

impl SourceKind {
    pub fn from_path(path: &Path) -> Option<SourceKind> {
        match path.extension()?.to_str()? {
            "core" => Some(SourceKind::Core),
            "aspect" => Some(SourceKind::Aspect),
            "weave" => Some(SourceKind::Weaving),
            "reqs" => Some(SourceKind::Requirements),
            _ => None,
        }
    }
}

/// Decodes raw bytes as UTF-8, dropping a leading byte-order mark and
/// normalizing CRLF and lone CR line endings to LF.
pub fn decode_source(bytes: &[u8], file: &str) -> Result<String, ParseDiagnostic> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    match std::str::from_utf8(bytes) {
        Ok(s) => Ok(normalize_newlines(s)),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let text = String::from_utf8_lossy(valid);
            let line = text.matches('\n').count() as u32 + 1;
            let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            Err(ParseDiagnostic::error(
                SourceSpan::point(file, line, col),
                "invalid UTF-8 sequence",
            ))
        }
    }
}

pub(crate) fn normalize_newlines(s: &str) -> String {
    if s.contains('\r') {
        s.replace("\r\n", "\n").replace('\r', "\n")
    } else {
        s.to_string()
    }
}

/// Model name used for an empty file: the file stem.
pub(crate) fn file_stem(file: &str) -> String {
    Path::new(file)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(file)
        .to_string()
}
