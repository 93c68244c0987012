use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::model::{Anchor, Line, MatchDocument, OrnamentKind};
use crate::parser::{codes, serialize_line, Diagnostic, Severity};

/// The note-level alignment of a document: a partial function from
/// performance notes to score anchors plus the unmatched notes on each side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NoteMapping {
    pub matches: BTreeMap<i64, Anchor>,
    pub insertions: BTreeSet<i64>,
    pub deletions: BTreeSet<Anchor>,
    pub ornament_notes: BTreeMap<i64, (Anchor, OrnamentKind)>,
}

impl NoteMapping {
    pub fn performance_ids(&self) -> BTreeSet<i64> {
        self.matches
            .keys()
            .chain(&self.insertions)
            .chain(self.ornament_notes.keys())
            .copied()
            .collect()
    }

    /// Anchors consumed by a match or a deletion.
    pub fn score_anchors(&self) -> BTreeSet<&Anchor> {
        self.matches.values().chain(&self.deletions).collect()
    }

    /// Pairwise disjointness of the performance-side key sets and of the
    /// matched/deleted anchors.
    pub fn is_partition(&self) -> bool {
        let perf_total = self.matches.len() + self.insertions.len() + self.ornament_notes.len();
        let score_total = self.matches.len() + self.deletions.len();
        self.performance_ids().len() == perf_total && self.score_anchors().len() == score_total
    }

    pub fn relation_count(&self) -> usize {
        self.matches.len() + self.insertions.len() + self.deletions.len() + self.ornament_notes.len()
    }
}

pub fn build_note_mapping(doc: &MatchDocument) -> (NoteMapping, Vec<Diagnostic>) {
    let mut mapping = NoteMapping::default();
    let mut diagnostics = Vec::new();
    let mut perf_seen: HashMap<i64, usize> = HashMap::new();
    let mut anchor_seen: HashMap<&Anchor, usize> = HashMap::new();

    for (index, line) in doc.lines.iter().enumerate() {
        let line_number = index + 1;
        let error = |code, message: String| {
            Diagnostic::new(
                Severity::Error,
                line_number,
                1,
                code,
                message,
                serialize_line(line),
            )
        };

        let perf_ok = match line.perf_note() {
            Some(perf) => match perf_seen.get(&perf.id) {
                Some(first) => {
                    diagnostics.push(error(
                        codes::DUPLICATE_PERF_NOTE,
                        format!("performance note {} already used on line {first}", perf.id),
                    ));
                    false
                }
                None => {
                    perf_seen.insert(perf.id, line_number);
                    true
                }
            },
            None => true,
        };
        let anchor_ok = match line.score_note() {
            Some(score) => match anchor_seen.get(&score.anchor) {
                Some(first) => {
                    diagnostics.push(error(
                        codes::DUPLICATE_ANCHOR,
                        format!("score note {} already used on line {first}", score.anchor),
                    ));
                    false
                }
                None => {
                    anchor_seen.insert(&score.anchor, line_number);
                    true
                }
            },
            None => true,
        };

        match line {
            Line::NoteAlign { score, perf } if perf_ok && anchor_ok => {
                mapping.matches.insert(perf.id, score.anchor.clone());
            }
            // keep whichever half is still fresh
            Line::NoteAlign { score, perf } => {
                if perf_ok {
                    mapping.insertions.insert(perf.id);
                }
                if anchor_ok {
                    mapping.deletions.insert(score.anchor.clone());
                }
            }
            Line::Insertion { perf } if perf_ok => {
                mapping.insertions.insert(perf.id);
            }
            Line::Deletion { score } if anchor_ok => {
                mapping.deletions.insert(score.anchor.clone());
            }
            Line::OrnamentAlign { anchor, kind, perf } if perf_ok => {
                mapping.ornament_notes.insert(perf.id, (anchor.clone(), *kind));
            }
            _ => {}
        }
    }
    (mapping, diagnostics)
}
