//! Whole-document checks. The returned list is sorted by (line, code) and
//! is empty for a valid document.

use std::collections::HashMap;

use super::mapping::build_note_mapping;
use super::timemap::TimeMap;
use super::unfold::UnfoldMap;
use crate::model::{
    fraction_to_beats, Fraction, Line, MatchDocument, PerfNote, ScoreNote, ScoreTimePoint,
    TimeSignature, HEADER_KEYS, MIDI_CLOCK_RATE, MIDI_CLOCK_UNITS,
};
use crate::parser::{codes, serialize_line, Diagnostic, Severity};

/// Tolerance, in beats, of the onset and duration consistency checks.
pub const BEAT_TOLERANCE: f64 = 1e-6;

/// Time signatures in force, as `(measure, onset_in_beats, signature)`
/// sorted by measure.
pub type MeterTable = [(i64, f64, TimeSignature)];

/// Recomputes a position's onset in beats from `Measure:Beat` and the
/// offset under the time signature in force at that measure.
pub fn expected_onset_in_beats(position: &ScoreTimePoint, meters: &MeterTable) -> Option<f64> {
    let (measure, onset, ts) = active_meter(position.measure, meters)?;
    let beat_unit = ts.beat_unit()?;
    let measure_start = onset + ((position.measure - measure) * ts.numerator) as f64;
    Some(
        measure_start
            + (position.beat - 1) as f64
            + fraction_to_beats(&position.offset, &beat_unit),
    )
}

fn active_meter(measure: i64, meters: &MeterTable) -> Option<(i64, f64, TimeSignature)> {
    meters
        .iter()
        .rev()
        .find(|(m, _, _)| *m <= measure)
        .or_else(|| meters.first())
        .copied()
}

/// Duration of a score note in beats under the meter at its measure.
pub fn duration_in_beats(note: &ScoreNote, meters: &MeterTable) -> Option<f64> {
    let (_, _, ts) = active_meter(note.position.measure, meters)?;
    Some(fraction_to_beats(&note.duration, &ts.beat_unit()?))
}

struct Checker<'a> {
    doc: &'a MatchDocument,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn push(&mut self, severity: Severity, index: usize, code: &'static str, message: String) {
        let raw = self.doc.lines.get(index).map(serialize_line).unwrap_or_default();
        self.out
            .push(Diagnostic::new(severity, index + 1, 1, code, message, raw));
    }

    fn range(&mut self, index: usize, what: &str, value: i64, lo: i64, hi: Option<i64>) {
        if value < lo || hi.is_some_and(|hi| value > hi) {
            let bound = match hi {
                Some(hi) => format!("{lo}-{hi}"),
                None => format!(">= {lo}"),
            };
            self.push(
                Severity::Error,
                index,
                codes::RANGE,
                format!("{what} {value} outside {bound}"),
            );
        }
    }

    fn perf(&mut self, index: usize, n: &PerfNote) {
        self.range(index, "MIDI pitch", n.midi_pitch, 0, Some(127));
        self.range(index, "onset tick", n.onset_tick, 0, None);
        self.range(index, "offset tick", n.offset_tick, 0, None);
        self.range(index, "velocity", n.velocity, 0, Some(127));
        self.range(index, "channel", n.channel, 0, Some(15));
        self.range(index, "track", n.track, 0, None);
        if n.onset_tick > n.offset_tick {
            self.push(
                Severity::Error,
                index,
                codes::TICK_ORDER,
                format!(
                    "note {} ends (tick {}) before it starts (tick {})",
                    n.id, n.offset_tick, n.onset_tick
                ),
            );
        }
    }

    fn position(&mut self, index: usize, p: &ScoreTimePoint, meters: &MeterTable) {
        self.range(index, "measure", p.measure, 0, None);
        self.range(index, "beat", p.beat, 1, None);
        if p.offset < Fraction::integer(0) {
            self.push(Severity::Error, index, codes::RANGE, "negative beat offset".into());
        }
        if let Some(expected) = expected_onset_in_beats(p, meters) {
            let stored = p.onset_in_beats.value();
            if (expected - stored).abs() > BEAT_TOLERANCE {
                self.push(
                    Severity::Warning,
                    index,
                    codes::ONSET_MISMATCH,
                    format!(
                        "onset {} does not match {}:{} + {} (expected {expected})",
                        p.onset_in_beats, p.measure, p.beat, p.offset
                    ),
                );
            }
        }
    }

    fn score(&mut self, index: usize, n: &ScoreNote, meters: &MeterTable) {
        if let Err(e) = n.pitch.to_midi() {
            self.push(Severity::Error, index, codes::RANGE, e.to_string());
        }
        self.position(index, &n.position, meters);
        if n.duration < Fraction::integer(0) {
            self.push(Severity::Error, index, codes::RANGE, "negative duration".into());
        }
        let onset = n.position.onset_in_beats.value();
        let offset = n.offset_in_beats.value();
        if offset < onset {
            self.push(
                Severity::Error,
                index,
                codes::RANGE,
                format!("offset in beats {offset} precedes onset {onset}"),
            );
        } else if !n.is_grace() {
            if let Some(expected) = duration_in_beats(n, meters) {
                if ((offset - onset) - expected).abs() > BEAT_TOLERANCE {
                    self.push(
                        Severity::Warning,
                        index,
                        codes::DURATION_MISMATCH,
                        format!(
                            "offset - onset = {} beats but duration {} is {expected} beats",
                            offset - onset,
                            n.duration
                        ),
                    );
                }
            }
        }
        if n.anchor.base_is_ambiguous() && n.anchor.instance().is_none() {
            self.push(
                Severity::Warning,
                index,
                codes::AMBIGUOUS_ANCHOR,
                format!("anchor base `{}` reads back as a repetition instance", n.anchor),
            );
        }
    }

    fn pitch_consistency(&mut self, index: usize, score: &ScoreNote, perf: &PerfNote) {
        if let Ok(spelled) = score.pitch.to_midi() {
            if i64::from(spelled) != perf.midi_pitch {
                self.push(
                    Severity::Warning,
                    index,
                    codes::PITCH_MISMATCH,
                    format!(
                        "{} {} is MIDI {spelled} but note {} plays {}",
                        score.anchor, score.pitch, perf.id, perf.midi_pitch
                    ),
                );
            }
        }
    }

    fn header(&mut self) {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (index, line) in self.doc.lines.iter().enumerate() {
            let Line::Info(info) = line else { continue };
            if let Some(first) = seen.get(info.key.as_str()) {
                let header = HEADER_KEYS.contains(&info.key.as_str());
                self.push(
                    if header { Severity::Error } else { Severity::Warning },
                    index,
                    codes::DUPLICATE_INFO,
                    format!("info `{}` already given on line {}", info.key, first + 1),
                );
            } else {
                seen.insert(&info.key, index);
            }
            if (info.key == MIDI_CLOCK_UNITS || info.key == MIDI_CLOCK_RATE)
                && !info.value.parse::<u32>().is_ok_and(|v| v > 0)
            {
                self.push(
                    Severity::Error,
                    index,
                    codes::INVALID_HEADER,
                    format!("{} must be a positive integer, found `{}`", info.key, info.value),
                );
            }
        }
        if let Some(first) = self.doc.lines.iter().position(Line::uses_ticks) {
            for key in [MIDI_CLOCK_UNITS, MIDI_CLOCK_RATE] {
                if !seen.contains_key(key) {
                    self.push(
                        Severity::Error,
                        first,
                        codes::MISSING_HEADER,
                        format!("tick-based lines need info({key},...)"),
                    );
                }
            }
        }
    }

    fn sections(&mut self) {
        let um = UnfoldMap::from_document(self.doc);
        let sections = um.sections();
        for s in sections {
            let index = s.line_index.unwrap_or(0);
            let unfolded = s.end_unfolded - s.begin_unfolded;
            let original = s.end_original - s.begin_original;
            if unfolded <= 0.0 || original <= 0.0 {
                self.push(
                    Severity::Error,
                    index,
                    codes::SECTION_LENGTH,
                    "section interval is empty or reversed".into(),
                );
            } else if (unfolded - original).abs() > BEAT_TOLERANCE {
                self.push(
                    Severity::Error,
                    index,
                    codes::SECTION_LENGTH,
                    format!("unfolded length {unfolded} differs from original length {original}"),
                );
            }
        }
        for w in sections.windows(2) {
            let index = w[1].line_index.unwrap_or(0);
            if w[1].begin_unfolded < w[0].end_unfolded - BEAT_TOLERANCE {
                self.push(
                    Severity::Error,
                    index,
                    codes::SECTION_OVERLAP,
                    format!(
                        "section starting at {} overlaps the one ending at {}",
                        w[1].begin_unfolded, w[0].end_unfolded
                    ),
                );
            } else if w[1].begin_unfolded > w[0].end_unfolded + BEAT_TOLERANCE {
                self.push(
                    Severity::Warning,
                    index,
                    codes::SECTION_GAP,
                    format!(
                        "unfolded beats {}..{} are not covered by any section",
                        w[0].end_unfolded, w[1].begin_unfolded
                    ),
                );
            }
        }
    }
}

pub fn validate(doc: &MatchDocument) -> Vec<Diagnostic> {
    let meters = doc.time_signatures();
    let mut c = Checker {
        doc,
        out: Vec::new(),
    };
    c.header();
    for (index, line) in doc.lines.iter().enumerate() {
        match line {
            Line::NoteAlign { score, perf } => {
                c.score(index, score, &meters);
                c.perf(index, perf);
                c.pitch_consistency(index, score, perf);
            }
            Line::Deletion { score } => c.score(index, score, &meters),
            Line::Insertion { perf } | Line::OrnamentAlign { perf, .. } => c.perf(index, perf),
            Line::TimeAlign(t) => {
                c.position(index, &t.position, &meters);
                for tick in &t.ticks {
                    c.range(index, "tick", *tick, 0, None);
                }
            }
            Line::Sustain(s) => {
                c.range(index, "tick", s.tick, 0, None);
                c.range(index, "sustain value", s.value, 0, Some(127));
                c.range(index, "channel", s.channel, 0, Some(15));
                c.range(index, "track", s.track, 0, None);
            }
            Line::ScoreProp(p) => c.range(index, "measure", p.measure, 0, None),
            Line::Info(_) | Line::Section(_) | Line::Opaque { .. } => {}
        }
    }
    let (_, mapping_diagnostics) = build_note_mapping(doc);
    c.out.extend(mapping_diagnostics);
    c.out.extend(TimeMap::from_document(doc).diagnostics(doc));
    c.sections();

    let mut out = c.out;
    out.sort_by(|a, b| (a.line_number, a.code).cmp(&(b.line_number, b.code)));
    out
}
