//! Validation reports shared by the model validators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::core_model::QualifiedName;

/// Returns true if `s` is a valid identifier: ASCII letters, digits and
/// underscores, not starting with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A single conformance violation, located by the qualified name of the
/// offending element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub at: QualifiedName,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.at, self.message)
    }
}

/// Sorted, deduplicated list of violations. Empty means the model conforms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Accumulates violations; `finish` sorts them so reports are deterministic.
#[derive(Debug, Default)]
pub(crate) struct ReportBuilder {
    violations: Vec<Violation>,
}

impl ReportBuilder {
    pub(crate) fn push(&mut self, at: QualifiedName, message: impl Into<String>) {
        self.violations.push(Violation {
            at,
            message: message.into(),
        });
    }

    pub(crate) fn check_identifier(&mut self, at: &QualifiedName, what: &str, name: &str) {
        if !is_identifier(name) {
            self.push(at.clone(), format!("{what} `{name}` is not a valid identifier"));
        }
    }

    pub(crate) fn finish(mut self) -> ValidationReport {
        self.violations.sort();
        self.violations.dedup();
        ValidationReport {
            violations: self.violations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("NbreOfHours"));
        assert!(is_identifier("_x1"));
        assert!(is_identifier("IdSpeciality"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("1abc"));
        assert!(!is_identifier("a-b"));
        assert!(!is_identifier("a.b"));
        assert!(!is_identifier("é"));
    }
}
