use serde::Serialize;

use super::{to_note_array, ExportError, Side};
use crate::model::MatchDocument;

pub const PITCH_ROWS: usize = 128;

// absorbs rounding in seconds/resolution so exact bin edges stay exact
const BIN_EPSILON: f64 = 1e-9;

/// `cells[pitch][column]`. Performance cells hold the velocity, score cells
/// hold 1; overlapping notes keep the maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PianorollMatrix {
    pub resolution: f64,
    pub columns: usize,
    pub cells: Vec<Vec<u8>>,
}

impl PianorollMatrix {
    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.columns)
            .map(|c| self.cells.iter().map(|row| u64::from(row[c])).sum())
            .collect()
    }
}

/// Time starts at 0. Each note fills the bins its `[onset, offset)`
/// interval touches, and at least one.
pub fn to_pianoroll(
    doc: &MatchDocument,
    side: Side,
    resolution: Option<f64>,
) -> Result<PianorollMatrix, ExportError> {
    let resolution = match (side, resolution) {
        (Side::Joined, _) => return Err(ExportError::JoinedPianoroll),
        (_, Some(r)) if !(r.is_finite() && r > 0.0) => return Err(ExportError::BadResolution(r)),
        (_, Some(r)) => r,
        (Side::Score, None) => 0.25,
        (Side::Performance, None) => 0.01,
    };
    let notes: Vec<(usize, usize, usize, u8)> = to_note_array(doc, side)
        .into_iter()
        .filter(|r| (0..PITCH_ROWS as i64).contains(&r.pitch) && r.onset >= 0.0)
        .map(|r| {
            let start = (r.onset / resolution + BIN_EPSILON).floor() as usize;
            let end = ((r.onset + r.duration) / resolution - BIN_EPSILON).ceil() as usize;
            let end = end.max(start + 1);
            let value = r.velocity.map_or(1, |v| v.clamp(0, 127) as u8);
            (r.pitch as usize, start, end, value)
        })
        .collect();
    let columns = notes.iter().map(|n| n.2).max().unwrap_or(0);
    let mut cells = vec![vec![0u8; columns]; PITCH_ROWS];
    for (pitch, start, end, value) in notes {
        for cell in &mut cells[pitch][start..end] {
            *cell = (*cell).max(value);
        }
    }
    Ok(PianorollMatrix {
        resolution,
        columns,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, ParseMode};

    const DOC: &str = "info(midiClockUnits,100).\ninfo(midiClockRate,1000000).\n\
        insertion-note(1,60,0,5,40,0,0).\n\
        insertion-note(2,60,3,12,90,0,0).\n\
        snote(a,[D],4,1:1,0,1/4,0.0,1.0,[])-note(3,62,10,10,70,0,0).\n";

    #[test]
    fn performance_roll() {
        let doc = parse(DOC, ParseMode::Strict).0;
        let roll = to_pianoroll(&doc, Side::Performance, Some(0.01)).unwrap();
        assert_eq!(roll.columns, 12);
        assert_eq!(roll.cells.len(), PITCH_ROWS);
        assert_eq!(&roll.cells[60][..], &[40, 40, 40, 90, 90, 90, 90, 90, 90, 90, 90, 90]);
        // zero-length note still occupies one bin
        assert_eq!(roll.cells[62][10], 70);
        assert_eq!(roll.cells[62].iter().filter(|v| **v > 0).count(), 1);
    }

    #[test]
    fn score_roll_defaults() {
        let doc = parse(DOC, ParseMode::Strict).0;
        let roll = to_pianoroll(&doc, Side::Score, None).unwrap();
        assert_eq!(roll.resolution, 0.25);
        assert_eq!(roll.columns, 4);
        assert_eq!(roll.cells[62], vec![1, 1, 1, 1]);
        assert!(to_pianoroll(&doc, Side::Joined, None).is_err());
        assert!(to_pianoroll(&doc, Side::Score, Some(0.0)).is_err());
    }

    #[test]
    fn empty_roll() {
        let roll = to_pianoroll(&MatchDocument::default(), Side::Performance, None).unwrap();
        assert_eq!(roll.columns, 0);
        assert!(roll.column_sums().is_empty());
    }
}
