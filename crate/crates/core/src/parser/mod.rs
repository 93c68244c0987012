//! Reading and writing match files.
//!
//! Each non-blank physical line holds one dot-terminated term such as
//! `snote(...)-note(...).`. [`ParseMode::Strict`] rejects any deviation from
//! the canonical grammar. [`ParseMode::Lenient`] repairs a fixed set of
//! known deviations, emitting one warning per repair, and keeps lines it
//! cannot read as [`Line::Opaque`] so they survive a rewrite.

pub mod diagnostic;
pub mod lexer;
mod line;
mod repair;
mod serialize;

pub use diagnostic::{codes, count_errors, has_errors, Diagnostic, Severity};
pub use lexer::{value_lexer, LexError};
pub use serialize::{serialize, serialize_line};

use crate::model::{Line, MatchDocument};
use line::LineCx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}

/// Document context used to disambiguate lenient repairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairContext {
    /// Onset tick of the closest preceding performance note.
    pub previous_onset: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLine {
    pub line: Line,
    /// Lenient repairs applied to the line.
    pub warnings: Vec<Diagnostic>,
}

/// Parses a single physical line without document context.
///
/// On failure the diagnostic is an error in strict mode and a warning in
/// lenient mode.
pub fn parse_line(text: &str, line_number: usize, mode: ParseMode) -> Result<ParsedLine, Diagnostic> {
    parse_line_with(text, line_number, mode, &RepairContext::default())
}

pub fn parse_line_with(
    text: &str,
    line_number: usize,
    mode: ParseMode,
    ctx: &RepairContext,
) -> Result<ParsedLine, Diagnostic> {
    let raw = text.strip_suffix('\r').unwrap_or(text);
    let mut cx = LineCx {
        raw,
        line_number,
        mode,
        ctx,
        warnings: Vec::new(),
    };
    let line = cx.parse()?;
    Ok(ParsedLine {
        line,
        warnings: cx.warnings,
    })
}

/// Parses a whole document.
///
/// Blank lines are skipped. In strict mode every offending line is reported
/// as an error and left out of the document; callers treat any error as a
/// failed parse. In lenient mode offending lines are kept as
/// [`Line::Opaque`] with a warning.
pub fn parse(text: &str, mode: ParseMode) -> (MatchDocument, Vec<Diagnostic>) {
    let mut lines = Vec::new();
    let mut diagnostics = Vec::new();
    let mut ctx = RepairContext::default();
    for (index, physical) in text.split('\n').enumerate() {
        let raw = physical.strip_suffix('\r').unwrap_or(physical);
        if raw.trim().is_empty() {
            continue;
        }
        match parse_line_with(raw, index + 1, mode, &ctx) {
            Ok(parsed) => {
                if let Some(perf) = parsed.line.perf_note() {
                    ctx.previous_onset = Some(perf.onset_tick);
                }
                diagnostics.extend(parsed.warnings);
                lines.push(parsed.line);
            }
            Err(diagnostic) => {
                diagnostics.push(diagnostic);
                if mode == ParseMode::Lenient {
                    // stray trailing CRs would otherwise be eaten one per round trip
                    lines.push(Line::Opaque {
                        raw: raw.trim_end_matches('\r').to_string(),
                    });
                }
            }
        }
    }
    (MatchDocument::new(lines), diagnostics)
}

/// Like [`parse`], for raw bytes; invalid UTF-8 yields a single error.
pub fn parse_bytes(bytes: &[u8], mode: ParseMode) -> (MatchDocument, Vec<Diagnostic>) {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text, mode),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line_number = valid.iter().filter(|b| **b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
            let column = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
            let line_end = bytes[line_start..]
                .iter()
                .position(|b| *b == b'\n')
                .map_or(bytes.len(), |p| line_start + p);
            let diagnostic = Diagnostic::new(
                Severity::Error,
                line_number,
                column,
                codes::INVALID_UTF8,
                "input is not valid UTF-8",
                String::from_utf8_lossy(&bytes[line_start..line_end]),
            );
            (MatchDocument::default(), vec![diagnostic])
        }
    }
}
