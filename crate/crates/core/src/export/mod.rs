//! Exporters: Standard MIDI File, note arrays (CSV/JSON), pianorolls and
//! SVG alignment plots.

mod midi;
mod notearray;
mod pianoroll;
mod svg;

use thiserror::Error;

pub use midi::{to_midi, to_midi_with, MidiOptions};
pub use notearray::{note_array_csv, note_array_json, to_note_array, NoteArrayRow};
pub use pianoroll::{to_pianoroll, PianorollMatrix, PITCH_ROWS};
pub use svg::{render_alignment_svg, SvgOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Score,
    Performance,
    Joined,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Score => "score",
            Side::Performance => "performance",
            Side::Joined => "joined",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "score" => Ok(Side::Score),
            "performance" => Ok(Side::Performance),
            "joined" => Ok(Side::Joined),
            _ => Err(ExportError::UnknownSide(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("document has no usable midiClockUnits/midiClockRate header")]
    MissingClock,
    #[error("midiClockUnits {0} does not fit a MIDI division (max 32767)")]
    DivisionTooLarge(u32),
    #[error("midiClockRate {0} does not fit a set-tempo event (max 16777215)")]
    TempoTooLarge(u32),
    #[error("line {line}: {what} {value} cannot be written to MIDI")]
    OutOfRange {
        line: usize,
        what: &'static str,
        value: i64,
    },
    #[error("unknown side `{0}` (expected score, performance or joined)")]
    UnknownSide(String),
    #[error("a pianoroll needs the score or the performance side")]
    JoinedPianoroll,
    #[error("pianoroll resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
