use std::fmt::{self, Write as _};

use crate::model::{Line, MatchDocument, PerfNote, ScoreNote};

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    f.write_char('[')?;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{item}")?;
    }
    f.write_char(']')
}

struct SNote<'a>(&'a ScoreNote);

impl fmt::Display for SNote<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0;
        write!(f, "snote({},[{}", n.anchor, n.pitch.step.as_str())?;
        let modifier = n.pitch.modifier.as_str();
        if !modifier.is_empty() {
            write!(f, ",{modifier}")?;
        }
        write!(
            f,
            "],{},{}:{},{},{},{},{},",
            n.pitch.octave,
            n.position.measure,
            n.position.beat,
            n.position.offset,
            n.duration,
            n.position.onset_in_beats,
            n.offset_in_beats
        )?;
        write_list(f, &n.attributes)?;
        f.write_char(')')
    }
}

struct Note<'a>(&'a PerfNote);

impl fmt::Display for Note<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0;
        write!(
            f,
            "note({},{},{},{},{},{},{})",
            n.id, n.midi_pitch, n.onset_tick, n.offset_tick, n.velocity, n.channel, n.track
        )
    }
}

/// Canonical text of one line, including the terminal dot (opaque lines
/// are reproduced verbatim).
impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Line::Info(info) => write!(f, "info({},{}).", info.key, info.value),
            Line::ScoreProp(p) => write!(
                f,
                "scoreprop({},{},{},{}).",
                p.key, p.value, p.measure, p.onset_in_beats
            ),
            Line::NoteAlign { score, perf } => write!(f, "{}-{}.", SNote(score), Note(perf)),
            Line::Deletion { score } => write!(f, "{}-deletion.", SNote(score)),
            Line::Insertion { perf } => write!(f, "insertion-{}.", Note(perf)),
            Line::OrnamentAlign { anchor, kind, perf } => {
                write!(f, "{}({})-{}.", kind.as_str(), anchor, Note(perf))
            }
            Line::TimeAlign(t) => {
                write!(
                    f,
                    "stime({}:{},{},{},{})-ptime(",
                    t.position.measure,
                    t.position.beat,
                    t.position.offset,
                    t.position.onset_in_beats,
                    t.kind.as_str()
                )?;
                write_list(f, &t.ticks)?;
                f.write_str(").")
            }
            Line::Section(s) => {
                write!(
                    f,
                    "section({},{},{},{},",
                    s.begin_unfolded, s.end_unfolded, s.begin_original, s.end_original
                )?;
                write_list(f, &s.directives)?;
                f.write_str(").")
            }
            Line::Sustain(s) => write!(
                f,
                "sustain({},{},{},{}).",
                s.tick, s.value, s.channel, s.track
            ),
            Line::Opaque { raw } => f.write_str(raw),
        }
    }
}

pub fn serialize_line(line: &Line) -> String {
    line.to_string()
}

/// One LF-terminated line per document line; empty document, empty string.
pub fn serialize(doc: &MatchDocument) -> String {
    let mut out = String::new();
    for line in &doc.lines {
        // writing into a String cannot fail
        let _ = writeln!(out, "{line}");
    }
    out
}
