use std::collections::HashMap;

use serde::Serialize;

use super::{ExportError, Side};
use crate::model::{Anchor, Line, MatchDocument, MidiClock, PerfNote, ScoreNote};

/// One note of a note array. Score rows are in beats, performance rows in
/// seconds (or ticks when the document has no clock header).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoteArrayRow {
    pub side: &'static str,
    pub id: String,
    pub pitch: i64,
    pub onset: f64,
    pub duration: f64,
    pub velocity: Option<i64>,
    pub anchor_link: Option<String>,
}

fn score_row(n: &ScoreNote, link: Option<String>) -> NoteArrayRow {
    let onset = n.position.onset_in_beats.value();
    NoteArrayRow {
        side: "score",
        id: n.anchor.to_string(),
        pitch: n.pitch.to_midi().map(i64::from).unwrap_or(-1),
        onset,
        duration: (n.offset_in_beats.value() - onset).max(0.0),
        velocity: None,
        anchor_link: link,
    }
}

fn perf_row(n: &PerfNote, clock: Option<MidiClock>, link: Option<&Anchor>) -> NoteArrayRow {
    let time = |tick: i64| match clock {
        Some(c) => c.tick_to_seconds(tick as f64),
        None => tick as f64,
    };
    NoteArrayRow {
        side: "performance",
        id: n.id.to_string(),
        pitch: n.midi_pitch,
        onset: time(n.onset_tick),
        duration: time(n.offset_tick - n.onset_tick).max(0.0),
        velocity: Some(n.velocity),
        anchor_link: link.map(Anchor::to_string),
    }
}

/// Score rows link to the performance note they are matched with;
/// performance rows link to their anchor. Joined mode emits one row per
/// alignment line, in document order: performance rows for matches,
/// insertions and ornament notes, score rows for deletions.
pub fn to_note_array(doc: &MatchDocument, side: Side) -> Vec<NoteArrayRow> {
    let clock = doc.midi_clock();
    match side {
        Side::Score => {
            let matched: HashMap<&Anchor, i64> = doc
                .lines
                .iter()
                .filter_map(|line| match line {
                    Line::NoteAlign { score, perf } => Some((&score.anchor, perf.id)),
                    _ => None,
                })
                .collect();
            doc.score_notes()
                .map(|n| score_row(n, matched.get(&n.anchor).map(i64::to_string)))
                .collect()
        }
        Side::Performance | Side::Joined => doc
            .lines
            .iter()
            .filter_map(|line| match line {
                Line::NoteAlign { score, perf } => Some(perf_row(perf, clock, Some(&score.anchor))),
                Line::OrnamentAlign { anchor, perf, .. } => Some(perf_row(perf, clock, Some(anchor))),
                Line::Insertion { perf } => Some(perf_row(perf, clock, None)),
                Line::Deletion { score } if side == Side::Joined => Some(score_row(score, None)),
                _ => None,
            })
            .collect(),
    }
}

/// RFC 4180 CSV with header `side,id,pitch,onset,duration,velocity,anchor_link`.
pub fn note_array_csv(rows: &[NoteArrayRow]) -> Result<String, ExportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["side", "id", "pitch", "onset", "duration", "velocity", "anchor_link"])?;
    for r in rows {
        w.write_record([
            r.side.to_string(),
            r.id.clone(),
            r.pitch.to_string(),
            r.onset.to_string(),
            r.duration.to_string(),
            r.velocity.map(|v| v.to_string()).unwrap_or_default(),
            r.anchor_link.clone().unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output of utf-8 fields"))
}

pub fn note_array_json(rows: &[NoteArrayRow]) -> String {
    serde_json::to_string(rows).expect("note rows serialize")
}
