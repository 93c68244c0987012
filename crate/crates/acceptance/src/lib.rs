//! Proptest generators for syntactically valid match lines and documents.

use proptest::collection::vec;
use proptest::prelude::*;

use matchkit::*;

fn decimal_text(signed: bool) -> impl Strategy<Value = String> {
    let sign = if signed { "-?" } else { "" };
    proptest::string::string_regex(&format!("{sign}(0|[1-9][0-9]{{0,3}})(\\.[0-9]{{1,4}})?"))
        .expect("decimal pattern")
}

pub fn decimal(signed: bool) -> impl Strategy<Value = Decimal> {
    decimal_text(signed).prop_map(|t| t.parse().expect("generated decimal"))
}

pub fn fraction() -> impl Strategy<Value = Fraction> {
    prop_oneof![
        (0i64..16).prop_map(Fraction::integer),
        (0i64..64, 1i64..65).prop_map(|(n, d)| Fraction::new(n, d).unwrap()),
    ]
}

fn word() -> impl Strategy<Value = String> {
    "[A-Za-z0-9]([A-Za-z0-9 .#_-]{0,10}[A-Za-z0-9])?"
}

pub fn anchor() -> impl Strategy<Value = Anchor> {
    ("[a-zA-Z_][a-zA-Z0-9_]{0,5}", proptest::option::of(1u32..6))
        .prop_map(|(base, instance)| Anchor::new(base, instance).unwrap())
}

pub fn spelling() -> impl Strategy<Value = PitchSpelling> {
    (
        proptest::sample::select(Step::ALL.to_vec()),
        proptest::sample::select(Modifier::ALL.to_vec()),
        -1i64..10,
    )
        .prop_map(|(s, m, o)| PitchSpelling::new(s, m, o))
        .prop_filter("pitch in MIDI range", |p| p.to_midi().is_ok())
}

pub fn time_point() -> impl Strategy<Value = ScoreTimePoint> {
    (0i64..200, 1i64..13, fraction(), decimal(false)).prop_map(
        |(measure, beat, offset, onset_in_beats)| ScoreTimePoint {
            measure,
            beat,
            offset,
            onset_in_beats,
        },
    )
}

pub fn score_note() -> impl Strategy<Value = ScoreNote> {
    (
        anchor(),
        spelling(),
        time_point(),
        fraction(),
        decimal(false),
        vec(word(), 0..3),
    )
        .prop_map(
            |(anchor, pitch, position, duration, offset_in_beats, attributes)| ScoreNote {
                anchor,
                pitch,
                position,
                duration,
                offset_in_beats,
                attributes,
            },
        )
}

pub fn perf_note() -> impl Strategy<Value = PerfNote> {
    (0i64..100_000, 0i64..128, 0i64..1_000_000, 0i64..5000, 0i64..128, 0i64..16, 0i64..4).prop_map(
        |(id, midi_pitch, onset_tick, length, velocity, channel, track)| PerfNote {
            id,
            midi_pitch,
            onset_tick,
            offset_tick: onset_tick + length,
            velocity,
            channel,
            track,
        },
    )
}

pub fn line() -> impl Strategy<Value = Line> {
    prop_oneof![
        ("[a-zA-Z][a-zA-Z0-9_]{0,10}", word()).prop_map(|(key, value)| Line::Info(Info { key, value })),
        (1i64..13, 1i64..33, 0i64..50, decimal(false)).prop_map(|(n, d, measure, onset)| {
            Line::ScoreProp(ScoreProp {
                key: "timeSignature".into(),
                value: ScorePropValue::TimeSignature(TimeSignature {
                    numerator: n,
                    denominator: d,
                }),
                measure,
                onset_in_beats: onset,
            })
        }),
        ("[a-su-zA-Z][a-zA-Z]{0,8}", word(), 0i64..50, decimal(false)).prop_map(
            |(key, value, measure, onset)| {
                Line::ScoreProp(ScoreProp {
                    key,
                    value: ScorePropValue::Text(value),
                    measure,
                    onset_in_beats: onset,
                })
            }
        ),
        (score_note(), perf_note()).prop_map(|(score, perf)| Line::NoteAlign { score, perf }),
        score_note().prop_map(|score| Line::Deletion { score }),
        perf_note().prop_map(|perf| Line::Insertion { perf }),
        (anchor(), any::<bool>(), perf_note()).prop_map(|(anchor, trill, perf)| {
            Line::OrnamentAlign {
                anchor,
                kind: if trill {
                    OrnamentKind::Trill
                } else {
                    OrnamentKind::Ornament
                },
                perf,
            }
        }),
        (time_point(), any::<bool>(), vec(0i64..1_000_000, 1..4)).prop_map(|(position, down, ticks)| {
            Line::TimeAlign(TimeAlign {
                position,
                kind: if down { TimeKind::Downbeat } else { TimeKind::Beat },
                ticks,
            })
        }),
        (
            decimal(true),
            decimal(true),
            decimal(true),
            decimal(true),
            vec(word(), 0..3)
        )
            .prop_map(|(a, b, c, d, directives)| Line::Section(Section {
                begin_unfolded: a,
                end_unfolded: b,
                begin_original: c,
                end_original: d,
                directives,
            })),
        (0i64..1_000_000, 0i64..128, 0i64..16, 0i64..4).prop_map(|(tick, value, channel, track)| {
            Line::Sustain(Sustain {
                tick,
                value,
                channel,
                track,
            })
        }),
    ]
}

pub fn document() -> impl Strategy<Value = MatchDocument> {
    vec(line(), 0..40).prop_map(MatchDocument::new)
}

/// Performance notes with a fixed clock header, for exporter properties.
pub fn performance() -> impl Strategy<Value = MatchDocument> {
    (vec(perf_note(), 0..40), vec((0i64..1_000_000, 0i64..128, 0i64..16), 0..6)).prop_map(
        |(notes, pedals)| {
            let mut lines = vec![
                Line::Info(Info {
                    key: MIDI_CLOCK_UNITS.into(),
                    value: "480".into(),
                }),
                Line::Info(Info {
                    key: MIDI_CLOCK_RATE.into(),
                    value: "500000".into(),
                }),
            ];
            lines.extend(notes.into_iter().map(|perf| Line::Insertion { perf }));
            lines.extend(pedals.into_iter().map(|(tick, value, channel)| {
                Line::Sustain(Sustain {
                    tick,
                    value,
                    channel,
                    track: 0,
                })
            }));
            MatchDocument::new(lines)
        },
    )
}
