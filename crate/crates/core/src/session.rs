//! Editable documents: note-alignment edits applied as minimal line
//! rewrites, with optimistic versioning and undo.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{parse_anchor, Anchor, Line, MatchDocument, PerfNote, ScoreNote};
use crate::semantics::build_note_mapping;

/// Undo snapshots kept per session.
pub const UNDO_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    SetMatch {
        perf_id: i64,
        anchor: String,
    },
    SetInsertion {
        perf_id: i64,
    },
    SetDeletion {
        anchor: String,
    },
    /// Unlinks one performance note or one score note. Exactly one field
    /// must be given.
    Clear {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perf_id: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("base version {base} is stale (current version is {current})")]
    VersionConflict { base: u64, current: u64 },
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("op {index}: no performance note with id {perf_id}")]
    UnknownPerfNote { index: usize, perf_id: i64 },
    #[error("op {index}: no score note with anchor `{anchor}`")]
    UnknownAnchor { index: usize, anchor: String },
    #[error("op {index}: `{anchor}` is not a valid anchor")]
    InvalidAnchor { index: usize, anchor: String },
    #[error("op {index}: score note {anchor} is already matched to performance note {perf_id}")]
    AnchorTaken {
        index: usize,
        anchor: String,
        perf_id: i64,
    },
    #[error("op {index}: clear needs exactly one of perf_id and anchor")]
    BadClear { index: usize },
    #[error("edit would break the note-mapping partition")]
    Partition,
}

impl EditError {
    /// HTTP status for the service layer.
    pub fn status(&self) -> u16 {
        match self {
            EditError::VersionConflict { .. } | EditError::NothingToUndo => 409,
            _ => 422,
        }
    }
}

fn perf_line(doc: &MatchDocument, id: i64) -> Option<usize> {
    doc.lines
        .iter()
        .position(|l| l.perf_note().is_some_and(|n| n.id == id))
}

fn score_line(doc: &MatchDocument, anchor: &Anchor) -> Option<usize> {
    doc.lines
        .iter()
        .position(|l| l.score_note().is_some_and(|n| &n.anchor == anchor))
}

fn take_perf(line: &Line) -> PerfNote {
    line.perf_note().cloned().expect("line holds a performance note")
}

fn take_score(line: &Line) -> ScoreNote {
    line.score_note().cloned().expect("line holds a score note")
}

/// Replaces a match line with its deletion followed by its insertion;
/// an ornament line becomes an insertion. Other lines are left alone.
fn unlink(doc: &mut MatchDocument, index: usize) {
    match doc.lines[index].clone() {
        Line::NoteAlign { score, perf } => {
            doc.lines[index] = Line::Deletion { score };
            doc.lines.insert(index + 1, Line::Insertion { perf });
        }
        Line::OrnamentAlign { perf, .. } => doc.lines[index] = Line::Insertion { perf },
        _ => {}
    }
}

fn anchor_arg(index: usize, text: &str) -> Result<Anchor, EditError> {
    parse_anchor(text).map_err(|_| EditError::InvalidAnchor {
        index,
        anchor: text.to_string(),
    })
}

fn find_perf(doc: &MatchDocument, index: usize, perf_id: i64) -> Result<usize, EditError> {
    perf_line(doc, perf_id).ok_or(EditError::UnknownPerfNote { index, perf_id })
}

fn find_score(doc: &MatchDocument, index: usize, anchor: &Anchor) -> Result<usize, EditError> {
    score_line(doc, anchor).ok_or_else(|| EditError::UnknownAnchor {
        index,
        anchor: anchor.to_string(),
    })
}

fn set_match(
    doc: &mut MatchDocument,
    index: usize,
    perf_id: i64,
    anchor: &Anchor,
) -> Result<(), EditError> {
    let p = find_perf(doc, index, perf_id)?;
    let s = find_score(doc, index, anchor)?;
    if p == s {
        return Ok(());
    }
    if let Line::NoteAlign { perf, .. } = &doc.lines[s] {
        return Err(EditError::AnchorTaken {
            index,
            anchor: anchor.to_string(),
            perf_id: perf.id,
        });
    }
    // s is a deletion line here
    let score = take_score(&doc.lines[s]);
    let perf = take_perf(&doc.lines[p]);
    // a previously matched note leaves its old anchor as a deletion where
    // the consumed deletion line was
    let freed = match &doc.lines[p] {
        Line::NoteAlign { score, .. } => Some(score.clone()),
        _ => None,
    };
    doc.lines[p] = Line::NoteAlign { score, perf };
    match freed {
        Some(score) => doc.lines[s] = Line::Deletion { score },
        None => {
            doc.lines.remove(s);
        }
    }
    Ok(())
}

fn apply_op(doc: &mut MatchDocument, index: usize, op: &EditOp) -> Result<(), EditError> {
    match op {
        EditOp::SetMatch { perf_id, anchor } => {
            let anchor = anchor_arg(index, anchor)?;
            set_match(doc, index, *perf_id, &anchor)
        }
        EditOp::SetInsertion { perf_id } => {
            let p = find_perf(doc, index, *perf_id)?;
            unlink(doc, p);
            Ok(())
        }
        EditOp::SetDeletion { anchor } => {
            let anchor = anchor_arg(index, anchor)?;
            let s = find_score(doc, index, &anchor)?;
            unlink(doc, s);
            Ok(())
        }
        EditOp::Clear {
            perf_id: Some(perf_id),
            anchor: None,
        } => {
            let p = find_perf(doc, index, *perf_id)?;
            unlink(doc, p);
            Ok(())
        }
        EditOp::Clear {
            perf_id: None,
            anchor: Some(anchor),
        } => {
            // also drops ornament notes attached to the anchor
            let anchor = anchor_arg(index, anchor)?;
            let s = find_score(doc, index, &anchor)?;
            unlink(doc, s);
            for i in 0..doc.lines.len() {
                if matches!(&doc.lines[i], Line::OrnamentAlign { anchor: a, .. } if *a == anchor) {
                    unlink(doc, i);
                }
            }
            Ok(())
        }
        EditOp::Clear { .. } => Err(EditError::BadClear { index }),
    }
}

/// Applies `ops` in order to a copy of `doc`. Fails without touching
/// anything if any op fails or the result has a partition error the input
/// did not have.
pub fn apply_edits(doc: &MatchDocument, ops: &[EditOp]) -> Result<MatchDocument, EditError> {
    let mut next = doc.clone();
    for (index, op) in ops.iter().enumerate() {
        apply_op(&mut next, index, op)?;
    }
    let before = build_note_mapping(doc).1.len();
    if build_note_mapping(&next).1.len() > before {
        return Err(EditError::Partition);
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub id: String,
    pub document: MatchDocument,
    pub version: u64,
    pub dirty: bool,
    undo: Vec<MatchDocument>,
}

impl Session {
    pub fn new(id: impl Into<String>, document: MatchDocument) -> Self {
        Session {
            id: id.into(),
            document,
            version: 1,
            dirty: false,
            undo: Vec::new(),
        }
    }

    pub fn undo_depth(&self) -> usize {
        self.undo.len()
    }

    fn commit(&mut self, document: MatchDocument) {
        let previous = std::mem::replace(&mut self.document, document);
        if self.undo.len() == UNDO_LIMIT {
            self.undo.remove(0);
        }
        self.undo.push(previous);
        self.version += 1;
        self.dirty = true;
    }

    /// Applies one batch. The version advances by exactly one on success.
    pub fn apply(&mut self, base_version: u64, ops: &[EditOp]) -> Result<u64, EditError> {
        if base_version != self.version {
            return Err(EditError::VersionConflict {
                base: base_version,
                current: self.version,
            });
        }
        let next = apply_edits(&self.document, ops)?;
        self.commit(next);
        Ok(self.version)
    }

    /// Replaces the document without an edit op (used for reformatting);
    /// undoable like an edit.
    pub fn replace(&mut self, document: MatchDocument) -> u64 {
        self.commit(document);
        self.version
    }

    /// Restores the document before the last batch. The version still
    /// moves forward.
    pub fn undo(&mut self) -> Result<u64, EditError> {
        let previous = self.undo.pop().ok_or(EditError::NothingToUndo)?;
        self.document = previous;
        self.version += 1;
        self.dirty = true;
        Ok(self.version)
    }
}

/// Canonical line order: info lines, score properties and sections first,
/// then the body ordered by tick. Lines without a tick (deletions, opaque
/// lines) stay behind the line they followed.
pub fn canonical_order(doc: &MatchDocument) -> MatchDocument {
    let mut previous = i64::MIN;
    let mut keyed: Vec<((u8, i64), &Line)> = doc
        .lines
        .iter()
        .map(|line| {
            let group = match line {
                Line::Info(_) => 0,
                Line::ScoreProp(_) => 1,
                Line::Section(_) => 2,
                _ => 3,
            };
            if group < 3 {
                return ((group, 0), line);
            }
            let tick = match line {
                Line::NoteAlign { perf, .. }
                | Line::Insertion { perf }
                | Line::OrnamentAlign { perf, .. } => Some(perf.onset_tick),
                Line::TimeAlign(t) => t.ticks.first().copied(),
                Line::Sustain(s) => Some(s.tick),
                _ => None,
            };
            if let Some(t) = tick {
                previous = t;
            }
            ((3, previous), line)
        })
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    MatchDocument::new(keyed.into_iter().map(|(_, l)| l.clone()).collect())
}
