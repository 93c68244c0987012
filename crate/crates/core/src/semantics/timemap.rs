//! Score-beat ↔ performance-tick map sampled by `stime`/`ptime` lines.
//!
//! Between anchors the map is linear in (beats, ticks); outside the anchor
//! range the nearest segment's slope is extended.

use serde::Serialize;

use super::SemanticsError;
use crate::model::{Line, MatchDocument, MidiClock, TimeKind};
use crate::parser::{codes, serialize_line, Diagnostic, Severity};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeAnchor {
    pub score_beats: f64,
    pub perf_tick: i64,
    pub kind: TimeKind,
    /// Ticks after the first one on the same `ptime` line.
    pub alternates: Vec<i64>,
    /// Index of the source line in the document.
    pub line_index: usize,
}

/// A pair of adjacent anchors that breaks strict monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub previous_line: usize,
    pub line: usize,
    pub beats_not_increasing: bool,
    pub ticks_not_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeMap {
    anchors: Vec<TimeAnchor>,
    clock: Option<MidiClock>,
    violations: Vec<Violation>,
}

impl TimeMap {
    /// Sorts anchors by score beats (stable) and records monotonicity
    /// violations instead of rejecting them.
    pub fn new(mut anchors: Vec<TimeAnchor>, clock: Option<MidiClock>) -> Self {
        anchors.sort_by(|a, b| a.score_beats.total_cmp(&b.score_beats));
        let violations = anchors
            .windows(2)
            .filter_map(|w| {
                let beats = w[1].score_beats <= w[0].score_beats;
                let ticks = w[1].perf_tick <= w[0].perf_tick;
                (beats || ticks).then_some(Violation {
                    previous_line: w[0].line_index,
                    line: w[1].line_index,
                    beats_not_increasing: beats,
                    ticks_not_increasing: ticks,
                })
            })
            .collect();
        TimeMap {
            anchors,
            clock,
            violations,
        }
    }

    pub fn from_document(doc: &MatchDocument) -> Self {
        let anchors = doc
            .lines
            .iter()
            .enumerate()
            .filter_map(|(line_index, line)| match line {
                Line::TimeAlign(t) => {
                    let (&first, rest) = t.ticks.split_first()?;
                    Some(TimeAnchor {
                        score_beats: t.position.onset_in_beats.value(),
                        perf_tick: first,
                        kind: t.kind,
                        alternates: rest.to_vec(),
                        line_index,
                    })
                }
                _ => None,
            })
            .collect();
        TimeMap::new(anchors, doc.midi_clock())
    }

    pub fn anchors(&self) -> &[TimeAnchor] {
        &self.anchors
    }

    pub fn clock(&self) -> Option<MidiClock> {
        self.clock
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    fn beats_increasing(&self) -> bool {
        self.violations.iter().all(|v| !v.beats_not_increasing)
    }

    /// Validator findings: monotonicity errors and multi-tick warnings.
    pub fn diagnostics(&self, doc: &MatchDocument) -> Vec<Diagnostic> {
        let raw = |i: usize| doc.lines.get(i).map(serialize_line).unwrap_or_default();
        let mut out: Vec<Diagnostic> = self
            .violations
            .iter()
            .map(|v| {
                let what = match (v.beats_not_increasing, v.ticks_not_increasing) {
                    (true, true) => "score beats and ticks",
                    (true, false) => "score beats",
                    _ => "ticks",
                };
                Diagnostic::new(
                    Severity::Error,
                    v.line + 1,
                    1,
                    codes::TIME_MAP_NONMONOTONE,
                    format!(
                        "{what} do not increase after the anchor on line {}",
                        v.previous_line + 1
                    ),
                    raw(v.line),
                )
            })
            .collect();
        out.extend(self.anchors.iter().filter(|a| !a.alternates.is_empty()).map(|a| {
            Diagnostic::new(
                Severity::Warning,
                a.line_index + 1,
                1,
                codes::PTIME_MULTIPLE,
                format!(
                    "ptime lists {} ticks; using {} and keeping the rest as alternates",
                    a.alternates.len() + 1,
                    a.perf_tick
                ),
                raw(a.line_index),
            )
        }));
        out
    }
}

fn require_clock(tm: &TimeMap) -> Result<MidiClock, SemanticsError> {
    tm.clock.ok_or(SemanticsError::MissingClock)
}

/// `tick × µs-per-quarter / (ticks-per-quarter × 10⁶)`.
pub fn tick_to_seconds(tick: f64, tm: &TimeMap) -> Result<f64, SemanticsError> {
    Ok(require_clock(tm)?.tick_to_seconds(tick))
}

/// Interpolates along `(x, y)` samples with strictly increasing `x`.
fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let upper = points.partition_point(|p| p.0 < x);
    if let Some(p) = points.get(upper).filter(|p| p.0 == x) {
        return p.1;
    }
    let i = upper.clamp(1, points.len() - 1);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

pub fn score_to_perf(beats: f64, tm: &TimeMap) -> Result<f64, SemanticsError> {
    if tm.anchors.len() < 2 {
        return Err(SemanticsError::TimeMapUnderdetermined(tm.anchors.len()));
    }
    if !tm.beats_increasing() {
        return Err(SemanticsError::TimeMapNonmonotone);
    }
    let points: Vec<(f64, f64)> = tm
        .anchors
        .iter()
        .map(|a| (a.score_beats, a.perf_tick as f64))
        .collect();
    Ok(interpolate(&points, beats))
}

pub fn perf_to_score(tick: f64, tm: &TimeMap) -> Result<f64, SemanticsError> {
    if tm.anchors.len() < 2 {
        return Err(SemanticsError::TimeMapUnderdetermined(tm.anchors.len()));
    }
    if !tm.is_monotone() {
        return Err(SemanticsError::TimeMapNonmonotone);
    }
    let points: Vec<(f64, f64)> = tm
        .anchors
        .iter()
        .map(|a| (a.perf_tick as f64, a.score_beats))
        .collect();
    Ok(interpolate(&points, tick))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TempoSegment {
    pub start_beats: f64,
    pub end_beats: f64,
    pub start_tick: i64,
    pub end_tick: i64,
    pub bpm: f64,
}

/// Local tempo between adjacent anchors, `60 × Δbeats / Δseconds`.
/// Segments with no elapsed time are skipped with a diagnostic.
pub fn tempo_curve(
    tm: &TimeMap,
    doc: Option<&MatchDocument>,
) -> Result<(Vec<TempoSegment>, Vec<Diagnostic>), SemanticsError> {
    let clock = require_clock(tm)?;
    if tm.anchors.len() < 2 {
        return Err(SemanticsError::TimeMapUnderdetermined(tm.anchors.len()));
    }
    let mut segments = Vec::new();
    let mut diagnostics = Vec::new();
    for w in tm.anchors.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let seconds = clock.tick_to_seconds((b.perf_tick - a.perf_tick) as f64);
        if seconds <= 0.0 {
            let raw = doc
                .and_then(|d| d.lines.get(b.line_index))
                .map(serialize_line)
                .unwrap_or_default();
            let (code, message) = if seconds == 0.0 {
                (codes::INFINITE_TEMPO, "no time elapses between anchors; segment skipped")
            } else {
                (codes::TIME_MAP_NONMONOTONE, "time runs backwards between anchors; segment skipped")
            };
            diagnostics.push(Diagnostic::new(
                Severity::Warning,
                b.line_index + 1,
                1,
                code,
                message,
                raw,
            ));
            continue;
        }
        segments.push(TempoSegment {
            start_beats: a.score_beats,
            end_beats: b.score_beats,
            start_tick: a.perf_tick,
            end_tick: b.perf_tick,
            bpm: 60.0 * (b.score_beats - a.score_beats) / seconds,
        });
    }
    Ok((segments, diagnostics))
}

pub fn mean_tempo(segments: &[TempoSegment]) -> Option<f64> {
    if segments.is_empty() {
        return None;
    }
    Some(segments.iter().map(|s| s.bpm).sum::<f64>() / segments.len() as f64)
}
