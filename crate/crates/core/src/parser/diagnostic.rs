use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

/// Stable diagnostic codes.
pub mod codes {
    pub const MISSING_DOT: &str = "missing-dot";
    pub const UNBALANCED: &str = "unbalanced-brackets";
    pub const ARITY: &str = "arity";
    pub const NON_NUMERIC: &str = "non-numeric";
    pub const OUT_OF_RANGE: &str = "out-of-range";
    pub const UNKNOWN_LINE_KIND: &str = "unknown-line-kind";
    pub const SYNTAX: &str = "syntax";
    pub const WHITESPACE: &str = "whitespace";
    pub const PTIME_UNBRACKETED: &str = "ptime-unbracketed";
    pub const EXTRA_FIELD: &str = "extra-field";
    pub const RUN_ON_FIELD: &str = "run-on-field";
    pub const SUSTAIN_SHORT: &str = "sustain-short";
    pub const EMPTY_MODIFIER: &str = "empty-modifier";
    pub const INVALID_UTF8: &str = "invalid-utf8";

    pub const RANGE: &str = "range";
    pub const TICK_ORDER: &str = "tick-order";
    pub const PITCH_MISMATCH: &str = "pitch-mismatch";
    pub const ONSET_MISMATCH: &str = "onset-mismatch";
    pub const DURATION_MISMATCH: &str = "duration-mismatch";
    pub const DUPLICATE_PERF_NOTE: &str = "duplicate-perf-note";
    pub const DUPLICATE_ANCHOR: &str = "duplicate-anchor";
    pub const AMBIGUOUS_ANCHOR: &str = "ambiguous-anchor";
    pub const TIME_MAP_NONMONOTONE: &str = "time-map-nonmonotone";
    pub const PTIME_MULTIPLE: &str = "ptime-multiple";
    pub const INFINITE_TEMPO: &str = "infinite-tempo";
    pub const SECTION_LENGTH: &str = "section-length";
    pub const SECTION_OVERLAP: &str = "section-overlap";
    pub const SECTION_GAP: &str = "section-gap";
    pub const MISSING_HEADER: &str = "missing-header";
    pub const INVALID_HEADER: &str = "invalid-header";
    pub const DUPLICATE_INFO: &str = "duplicate-info";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based.
    pub line_number: usize,
    /// 1-based.
    pub column: usize,
    pub code: &'static str,
    pub message: String,
    pub raw_line: String,
}

impl Diagnostic {
    pub fn new(
        severity: Severity,
        line_number: usize,
        column: usize,
        code: &'static str,
        message: impl Into<String>,
        raw_line: impl Into<String>,
    ) -> Self {
        Diagnostic {
            severity,
            line_number,
            column: column.max(1),
            code,
            message: message.into(),
            raw_line: raw_line.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `severity:line:col:code:message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}:{}",
            self.severity.as_str(),
            self.line_number,
            self.column,
            self.code,
            self.message
        )
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

pub fn count_errors(diagnostics: &[Diagnostic]) -> usize {
    diagnostics.iter().filter(|d| d.is_error()).count()
}
