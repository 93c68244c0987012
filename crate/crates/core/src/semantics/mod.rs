//! Interpretation of a parsed document: the note mapping, the time map and
//! its tempo curve, the repetition unfold map, and the validator.

mod mapping;
mod timemap;
mod unfold;
mod validate;

use thiserror::Error;

pub use mapping::{build_note_mapping, NoteMapping};
pub use timemap::{
    mean_tempo, perf_to_score, score_to_perf, tempo_curve, tick_to_seconds, TempoSegment,
    TimeAnchor, TimeMap, Violation,
};
pub use unfold::{original_to_unfolded, unfolded_to_original, UnfoldMap, UnfoldSection};
pub use validate::{
    duration_in_beats, expected_onset_in_beats, validate, MeterTable, BEAT_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("time map needs at least 2 anchors, found {0}")]
    TimeMapUnderdetermined(usize),
    #[error("time map anchors are not strictly increasing")]
    TimeMapNonmonotone,
    #[error("beat {0} lies outside every section")]
    UnfoldGap(f64),
    #[error("document has no usable midiClockUnits/midiClockRate header")]
    MissingClock,
}

impl SemanticsError {
    pub fn code(&self) -> &'static str {
        match self {
            SemanticsError::TimeMapUnderdetermined(_) => "time-map-underdetermined",
            SemanticsError::TimeMapNonmonotone => "time-map-nonmonotone",
            SemanticsError::UnfoldGap(_) => "unfold-gap",
            SemanticsError::MissingClock => "missing-header",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::parser::{codes, parse, ParseMode};

    const FUGUE: &str = include_str!("../../tests/data/fugue.match");

    fn lenient(text: &str) -> MatchDocument {
        parse(text, ParseMode::Lenient).0
    }

    fn codes_of(diags: &[crate::Diagnostic]) -> Vec<&'static str> {
        diags.iter().map(|d| d.code).collect()
    }

    #[test]
    fn fugue_mapping() {
        let (m, diags) = build_note_mapping(&lenient(FUGUE));
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(m.matches.len(), 9);
        assert_eq!(m.insertions.iter().copied().collect::<Vec<_>>(), vec![7, 8, 9, 10]);
        assert_eq!(
            m.deletions.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            vec!["n9"]
        );
        assert!(m.is_partition());
    }

    #[test]
    fn empty_mapping() {
        let (m, diags) = build_note_mapping(&lenient("info(a,b)."));
        assert_eq!(m, NoteMapping::default());
        assert!(diags.is_empty());
    }

    #[test]
    fn duplicate_ids_and_anchors() {
        let doc = lenient(
            "snote(a,[C],4,1:1,0,1/4,0.0,1.0,[])-note(5,60,0,10,50,0,0).\n\
             snote(b,[C],4,1:2,0,1/4,1.0,2.0,[])-note(5,60,10,20,50,0,0).\n\
             snote(a,[C],4,1:3,0,1/4,2.0,3.0,[])-deletion.\n",
        );
        let (m, diags) = build_note_mapping(&doc);
        assert_eq!(codes_of(&diags), vec![codes::DUPLICATE_PERF_NOTE, codes::DUPLICATE_ANCHOR]);
        assert_eq!(diags[0].line_number, 2);
        assert!(m.is_partition());
        assert_eq!(m.deletions.len(), 1);
    }

    #[test]
    fn fugue_validates_after_repair() {
        let diags = validate(&lenient(FUGUE));
        assert!(diags.is_empty(), "{diags:#?}");
    }

    #[test]
    fn fugue_onsets_recomputed() {
        let doc = lenient(FUGUE);
        let meters = doc.time_signatures();
        for score in doc.score_notes() {
            let expected = expected_onset_in_beats(&score.position, &meters).unwrap();
            assert!((expected - score.position.onset_in_beats.value()).abs() <= BEAT_TOLERANCE);
        }
    }

    #[test]
    fn pitch_mismatch_flagged() {
        let doc = lenient(
            "info(midiClockUnits,480).\ninfo(midiClockRate,500000).\n\
             snote(n0,[C,#],5,1:1,1/8,1/8,0.5,1.0,[])-note(0,60,1104,1647,43,0,0).\n",
        );
        let diags = validate(&doc);
        assert_eq!(codes_of(&diags), vec![codes::PITCH_MISMATCH]);
        assert_eq!(diags[0].severity, crate::Severity::Warning);
    }

    #[test]
    fn consistency_checks() {
        let doc = lenient(
            "info(midiClockUnits,480).\ninfo(midiClockRate,500000).\n\
             scoreprop(timeSignature,3/8,1,0.0).\n\
             snote(a,[C],4,2:1,0,1/8,3.0,4.0,[])-deletion.\n\
             snote(b,[C],4,2:2,0,1/8,4.5,5.5,[])-deletion.\n\
             snote(c,[C],4,2:3,0,0,5.0,5.0,[grace])-deletion.\n\
             snote(d,[C],4,2:3,0,1/4,5.0,6.0,[])-deletion.\n",
        );
        let diags = validate(&doc);
        let got: Vec<_> = diags.iter().map(|d| (d.line_number, d.code)).collect();
        assert_eq!(
            got,
            vec![(5, codes::ONSET_MISMATCH), (7, codes::DURATION_MISMATCH)]
        );
    }

    #[test]
    fn header_checks() {
        let diags = validate(&lenient("insertion-note(1,60,0,10,50,0,0).\n"));
        assert_eq!(codes_of(&diags), vec![codes::MISSING_HEADER, codes::MISSING_HEADER]);
        let diags = validate(&lenient(
            "info(midiClockUnits,0).\ninfo(midiClockRate,500000).\ninfo(midiClockRate,1).\ninfo(x,1).\ninfo(x,2).\n",
        ));
        let got: Vec<_> = diags.iter().map(|d| (d.line_number, d.code, d.severity)).collect();
        assert_eq!(
            got,
            vec![
                (1, codes::INVALID_HEADER, crate::Severity::Error),
                (3, codes::DUPLICATE_INFO, crate::Severity::Error),
                (5, codes::DUPLICATE_INFO, crate::Severity::Warning),
            ]
        );
    }

    #[test]
    fn in_memory_ranges() {
        let perf = PerfNote {
            id: 1,
            midi_pitch: 200,
            onset_tick: 50,
            offset_tick: 10,
            velocity: -1,
            channel: 16,
            track: 0,
        };
        let doc = MatchDocument::new(vec![
            Line::Info(Info { key: MIDI_CLOCK_UNITS.into(), value: "480".into() }),
            Line::Info(Info { key: MIDI_CLOCK_RATE.into(), value: "500000".into() }),
            Line::Insertion { perf },
            Line::Sustain(Sustain { tick: -1, value: 128, channel: 0, track: 0 }),
        ]);
        let got: Vec<_> = validate(&doc).iter().map(|d| (d.line_number, d.code)).collect();
        assert_eq!(
            got,
            vec![
                (3, codes::RANGE),
                (3, codes::RANGE),
                (3, codes::RANGE),
                (3, codes::TICK_ORDER),
                (4, codes::RANGE),
                (4, codes::RANGE),
            ]
        );
    }

    #[test]
    fn time_map_and_section_checks() {
        let doc = lenient(
            "info(midiClockUnits,480).\ninfo(midiClockRate,500000).\n\
             stime(1:1,0,0.0,downbeat)-ptime([100]).\n\
             stime(1:2,0,1.0,beat)-ptime([50,60]).\n\
             section(0.0,4.0,0.0,4.0,[]).\n\
             section(3.0,8.0,0.0,4.0,[]).\n\
             section(10.0,12.0,0.0,2.0,[Fine]).\n",
        );
        let got: Vec<_> = validate(&doc).iter().map(|d| (d.line_number, d.code)).collect();
        assert_eq!(
            got,
            vec![
                (4, codes::PTIME_MULTIPLE),
                (4, codes::TIME_MAP_NONMONOTONE),
                (6, codes::SECTION_LENGTH),
                (6, codes::SECTION_OVERLAP),
                (7, codes::SECTION_GAP),
            ]
        );
    }

    #[test]
    fn fugue_time_map() {
        let doc = lenient(FUGUE);
        let tm = TimeMap::from_document(&doc);
        assert_eq!(tm.anchors().len(), 4);
        assert_eq!(score_to_perf(3.0, &tm).unwrap(), 3716.0);
        let um = UnfoldMap::from_document(&doc);
        assert_eq!(unfolded_to_original(2.5, &um), Ok(2.5));
        assert_eq!(original_to_unfolded(3.0, &um), vec![3.0]);
    }

    #[test]
    fn validator_is_deterministic() {
        let doc = lenient(FUGUE);
        let mut broken = doc.clone();
        broken.lines.swap(8, 11);
        assert_eq!(validate(&broken), validate(&broken));
    }
}
