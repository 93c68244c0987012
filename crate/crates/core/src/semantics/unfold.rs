use serde::Serialize;

use super::SemanticsError;
use crate::model::{Line, MatchDocument};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldSection {
    pub begin_unfolded: f64,
    pub end_unfolded: f64,
    pub begin_original: f64,
    pub end_original: f64,
    pub directives: Vec<String>,
    pub line_index: Option<usize>,
}

impl UnfoldSection {
    pub fn new(begin_unfolded: f64, end_unfolded: f64, begin_original: f64, end_original: f64) -> Self {
        UnfoldSection {
            begin_unfolded,
            end_unfolded,
            begin_original,
            end_original,
            directives: Vec::new(),
            line_index: None,
        }
    }

    fn contains_unfolded(&self, beats: f64) -> bool {
        self.begin_unfolded <= beats && beats < self.end_unfolded
    }

    fn contains_original(&self, beats: f64) -> bool {
        self.begin_original <= beats && beats < self.end_original
    }
}

/// Repetition sections ordered by their start in the unfolded score.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UnfoldMap {
    sections: Vec<UnfoldSection>,
}

impl UnfoldMap {
    pub fn new(mut sections: Vec<UnfoldSection>) -> Self {
        sections.sort_by(|a, b| a.begin_unfolded.total_cmp(&b.begin_unfolded));
        UnfoldMap { sections }
    }

    pub fn from_document(doc: &MatchDocument) -> Self {
        UnfoldMap::new(
            doc.lines
                .iter()
                .enumerate()
                .filter_map(|(i, line)| match line {
                    Line::Section(s) => Some(UnfoldSection {
                        begin_unfolded: s.begin_unfolded.value(),
                        end_unfolded: s.end_unfolded.value(),
                        begin_original: s.begin_original.value(),
                        end_original: s.end_original.value(),
                        directives: s.directives.clone(),
                        line_index: Some(i),
                    }),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn sections(&self) -> &[UnfoldSection] {
        &self.sections
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }
}

/// Translates an unfolded beat into the original score. Intervals are
/// half-open, `[begin, end)`.
pub fn unfolded_to_original(beats: f64, um: &UnfoldMap) -> Result<f64, SemanticsError> {
    um.sections
        .iter()
        .find(|s| s.contains_unfolded(beats))
        .map(|s| s.begin_original + (beats - s.begin_unfolded))
        .ok_or(SemanticsError::UnfoldGap(beats))
}

/// Every unfolded position of an original beat, in unfolded order.
pub fn original_to_unfolded(beats: f64, um: &UnfoldMap) -> Vec<f64> {
    um.sections
        .iter()
        .filter(|s| s.contains_original(beats))
        .map(|s| s.begin_unfolded + (beats - s.begin_original))
        .collect()
}
