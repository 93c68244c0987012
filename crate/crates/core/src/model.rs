//! Domain types for match documents.
//!
//! Values are immutable once built. Textual fields that must round-trip
//! byte-for-byte ([`Fraction`], [`Decimal`]) remember how they were written.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("anchor must not be empty")]
    EmptyAnchor,
    #[error("invalid anchor `{0}`")]
    InvalidAnchor(String),
    #[error("invalid fraction `{0}`")]
    InvalidFraction(String),
    #[error("fraction denominator must be positive")]
    ZeroDenominator,
    #[error("invalid decimal `{0}`")]
    InvalidDecimal(String),
    #[error("invalid note name `{0}`")]
    InvalidStep(String),
    #[error("invalid pitch modifier `{0}`")]
    InvalidModifier(String),
    #[error("spelled pitch maps to MIDI {0}, outside 0-127")]
    PitchOutOfRange(i64),
}

fn serialize_display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// A rational number kept exactly as written (`1/8` never becomes `2/16`).
///
/// A bare integer such as `0` is accepted and reproduced without a
/// denominator. Equality and ordering go through cross-multiplication.
#[derive(Debug, Clone, Copy)]
pub struct Fraction {
    numerator: i64,
    denominator: i64,
    bare: bool,
}

impl Fraction {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self, ModelError> {
        if denominator <= 0 {
            return Err(ModelError::ZeroDenominator);
        }
        Ok(Fraction {
            numerator,
            denominator,
            bare: false,
        })
    }

    /// An integer written without a denominator.
    pub fn integer(value: i64) -> Self {
        Fraction {
            numerator: value,
            denominator: 1,
            bare: true,
        }
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    pub fn is_bare(&self) -> bool {
        self.bare
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Exact quotient `self / other` as an (unreduced) fraction.
    pub fn checked_div(&self, other: &Fraction) -> Option<Fraction> {
        if other.numerator == 0 {
            return None;
        }
        let mut num = (self.numerator as i128) * (other.denominator as i128);
        let mut den = (self.denominator as i128) * (other.numerator as i128);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
        let (num, den) = if g > 1 { (num / g, den / g) } else { (num, den) };
        Some(Fraction {
            numerator: i64::try_from(num).ok()?,
            denominator: i64::try_from(den).ok()?,
            bare: false,
        })
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = (self.numerator as i128) * (other.denominator as i128);
        let rhs = (other.numerator as i128) * (self.denominator as i128);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bare {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

impl FromStr for Fraction {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidFraction(s.to_string());
        match s.split_once('/') {
            None => parse_int(s).map(Fraction::integer).ok_or_else(bad),
            Some((n, d)) => {
                let n = parse_int(n).ok_or_else(bad)?;
                if d.starts_with('-') || d.starts_with('+') {
                    return Err(bad());
                }
                let d = parse_int(d).ok_or_else(bad)?;
                Fraction::new(n, d)
            }
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_display(self, s)
    }
}

/// Strict integer syntax: optional `-`, then ASCII digits.
pub(crate) fn parse_int(s: &str) -> Option<i64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// A decimal number stored as its source text plus the parsed value.
///
/// Equality compares the text, so `1` and `1.0` are distinct values even
/// though they denote the same number.
#[derive(Debug, Clone)]
pub struct Decimal {
    text: String,
    value: f64,
}

impl Decimal {
    /// Canonical rendering: shortest digits, at least one decimal place.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let value = if value == 0.0 { 0.0 } else { value };
        let mut text = format!("{value}");
        if !text.contains('.') {
            text.push_str(".0");
        }
        Some(Decimal { text, value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Decimal {}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for Decimal {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidDecimal(s.to_string());
        let body = s.strip_prefix('-').unwrap_or(s);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int) || frac.is_some_and(|f| !all_digits(f)) {
            return Err(bad());
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(Decimal {
            text: s.to_string(),
            value,
        })
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Step {
    pub fn semitone(self) -> i64 {
        match self {
            Step::C => 0,
            Step::D => 2,
            Step::E => 4,
            Step::F => 5,
            Step::G => 7,
            Step::A => 9,
            Step::B => 11,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Step::C => "C",
            Step::D => "D",
            Step::E => "E",
            Step::F => "F",
            Step::G => "G",
            Step::A => "A",
            Step::B => "B",
        }
    }

    pub const ALL: [Step; 7] = [
        Step::C,
        Step::D,
        Step::E,
        Step::F,
        Step::G,
        Step::A,
        Step::B,
    ];
}

impl FromStr for Step {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Step::ALL
            .into_iter()
            .find(|step| step.as_str() == s)
            .ok_or_else(|| ModelError::InvalidStep(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modifier {
    None,
    Natural,
    Flat,
    Sharp,
    DoubleFlat,
    DoubleSharp,
}

impl Modifier {
    pub fn shift(self) -> i64 {
        match self {
            Modifier::None | Modifier::Natural => 0,
            Modifier::Sharp => 1,
            Modifier::Flat => -1,
            Modifier::DoubleFlat => -2,
            Modifier::DoubleSharp => 2,
        }
    }

    /// Token used inside the `[NoteName,Mod]` list; empty for `None`.
    pub fn as_str(self) -> &'static str {
        match self {
            Modifier::None => "",
            Modifier::Natural => "n",
            Modifier::Flat => "b",
            Modifier::Sharp => "#",
            Modifier::DoubleFlat => "bb",
            Modifier::DoubleSharp => "x",
        }
    }

    pub const ALL: [Modifier; 6] = [
        Modifier::None,
        Modifier::Natural,
        Modifier::Flat,
        Modifier::Sharp,
        Modifier::DoubleFlat,
        Modifier::DoubleSharp,
    ];
}

impl FromStr for Modifier {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Modifier::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ModelError::InvalidModifier(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PitchSpelling {
    #[serde(serialize_with = "serialize_step")]
    pub step: Step,
    #[serde(serialize_with = "serialize_modifier")]
    pub modifier: Modifier,
    pub octave: i64,
}

fn serialize_step<S: Serializer>(v: &Step, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(v.as_str())
}

fn serialize_modifier<S: Serializer>(v: &Modifier, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(v.as_str())
}

impl PitchSpelling {
    pub fn new(step: Step, modifier: Modifier, octave: i64) -> Self {
        PitchSpelling {
            step,
            modifier,
            octave,
        }
    }

    /// MIDI note number of this spelling, C4 = 60.
    pub fn to_midi(&self) -> Result<u8, ModelError> {
        spelled_to_midi(self)
    }
}

impl fmt::Display for PitchSpelling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.step.as_str(), self.modifier.as_str(), self.octave)
    }
}

pub fn spelled_to_midi(pitch: &PitchSpelling) -> Result<u8, ModelError> {
    let value = pitch
        .octave
        .checked_add(1)
        .and_then(|o| o.checked_mul(12))
        .and_then(|v| v.checked_add(pitch.step.semitone() + pitch.modifier.shift()))
        .ok_or(ModelError::PitchOutOfRange(i64::MAX))?;
    u8::try_from(value)
        .ok()
        .filter(|v| *v <= 127)
        .ok_or(ModelError::PitchOutOfRange(value))
}

/// Score-note identifier with an optional repetition instance (`n23-2`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Anchor {
    base: String,
    instance: Option<u32>,
}

impl Anchor {
    pub fn new(base: impl Into<String>, instance: Option<u32>) -> Result<Self, ModelError> {
        let base = base.into();
        if base.is_empty() {
            return Err(ModelError::EmptyAnchor);
        }
        if base.chars().any(|c| c.is_whitespace() || ",()[]".contains(c)) {
            return Err(ModelError::InvalidAnchor(base));
        }
        if instance == Some(0) {
            return Err(ModelError::InvalidAnchor(format!("{base}-0")));
        }
        Ok(Anchor { base, instance })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn instance(&self) -> Option<u32> {
        self.instance
    }

    /// True when the base itself looks like `x-<digits>`; such an anchor
    /// written without an instance would read back with one.
    pub fn base_is_ambiguous(&self) -> bool {
        split_instance(&self.base).is_some()
    }
}

fn split_instance(text: &str) -> Option<(&str, u32)> {
    let (base, suffix) = text.rsplit_once('-')?;
    if base.is_empty()
        || suffix.is_empty()
        || suffix.starts_with('0')
        || !suffix.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let instance: u32 = suffix.parse().ok()?;
    Some((base, instance))
}

pub fn parse_anchor(text: &str) -> Result<Anchor, ModelError> {
    if text.is_empty() {
        return Err(ModelError::EmptyAnchor);
    }
    match split_instance(text) {
        Some((base, instance)) => Anchor::new(base, Some(instance)),
        None => Anchor::new(text, None),
    }
}

impl FromStr for Anchor {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_anchor(s)
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.instance {
            Some(k) => write!(f, "{}-{}", self.base, k),
            None => f.write_str(&self.base),
        }
    }
}

impl Serialize for Anchor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_display(self, s)
    }
}

/// `f / beat_unit`, where the beat unit is a fraction of a whole note
/// (1/4 under x/4 time).
pub fn fraction_to_beats(f: &Fraction, beat_unit: &Fraction) -> f64 {
    let num = (f.numerator as i128) * (beat_unit.denominator as i128);
    let den = (f.denominator as i128) * (beat_unit.numerator as i128);
    num as f64 / den as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreTimePoint {
    pub measure: i64,
    pub beat: i64,
    pub offset: Fraction,
    pub onset_in_beats: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreNote {
    pub anchor: Anchor,
    pub pitch: PitchSpelling,
    pub position: ScoreTimePoint,
    pub duration: Fraction,
    pub offset_in_beats: Decimal,
    pub attributes: Vec<String>,
}

impl ScoreNote {
    pub fn is_grace(&self) -> bool {
        self.duration.is_zero()
            || self
                .attributes
                .iter()
                .any(|a| a == "grace" || a == "appoggiatura")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PerfNote {
    pub id: i64,
    pub midi_pitch: i64,
    pub onset_tick: i64,
    pub offset_tick: i64,
    pub velocity: i64,
    pub channel: i64,
    pub track: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrnamentKind {
    Ornament,
    Trill,
}

impl OrnamentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OrnamentKind::Ornament => "ornament",
            OrnamentKind::Trill => "trill",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeKind {
    Beat,
    Downbeat,
}

impl TimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeKind::Beat => "beat",
            TimeKind::Downbeat => "downbeat",
        }
    }
}

impl FromStr for TimeKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "beat" => Ok(TimeKind::Beat),
            "downbeat" => Ok(TimeKind::Downbeat),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Info {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TimeSignature {
    pub numerator: i64,
    pub denominator: i64,
}

impl TimeSignature {
    /// Length of one beat as a fraction of a whole note.
    pub fn beat_unit(&self) -> Option<Fraction> {
        Fraction::new(1, self.denominator).ok()
    }
}

impl fmt::Display for TimeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ScorePropValue {
    TimeSignature(TimeSignature),
    Text(String),
}

impl fmt::Display for ScorePropValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScorePropValue::TimeSignature(ts) => ts.fmt(f),
            ScorePropValue::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreProp {
    pub key: String,
    pub value: ScorePropValue,
    pub measure: i64,
    pub onset_in_beats: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimeAlign {
    pub position: ScoreTimePoint,
    pub kind: TimeKind,
    pub ticks: Vec<i64>,
}

/// Maps an interval of unfolded score beats onto the original score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Section {
    pub begin_unfolded: Decimal,
    pub end_unfolded: Decimal,
    pub begin_original: Decimal,
    pub end_original: Decimal,
    pub directives: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Sustain {
    pub tick: i64,
    pub value: i64,
    pub channel: i64,
    pub track: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Line {
    Info(Info),
    ScoreProp(ScoreProp),
    NoteAlign {
        score: ScoreNote,
        perf: PerfNote,
    },
    Deletion {
        score: ScoreNote,
    },
    Insertion {
        perf: PerfNote,
    },
    OrnamentAlign {
        anchor: Anchor,
        kind: OrnamentKind,
        perf: PerfNote,
    },
    TimeAlign(TimeAlign),
    Section(Section),
    Sustain(Sustain),
    /// A line kept verbatim because it could not be parsed.
    Opaque {
        raw: String,
    },
}

impl Line {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Line::Info(_) => "info",
            Line::ScoreProp(_) => "scoreprop",
            Line::NoteAlign { .. } => "note_align",
            Line::Deletion { .. } => "deletion",
            Line::Insertion { .. } => "insertion",
            Line::OrnamentAlign { .. } => "ornament_align",
            Line::TimeAlign(_) => "time_align",
            Line::Section(_) => "section",
            Line::Sustain(_) => "sustain",
            Line::Opaque { .. } => "opaque",
        }
    }

    pub fn perf_note(&self) -> Option<&PerfNote> {
        match self {
            Line::NoteAlign { perf, .. }
            | Line::Insertion { perf }
            | Line::OrnamentAlign { perf, .. } => Some(perf),
            _ => None,
        }
    }

    pub fn score_note(&self) -> Option<&ScoreNote> {
        match self {
            Line::NoteAlign { score, .. } | Line::Deletion { score } => Some(score),
            _ => None,
        }
    }

    /// Whether interpreting the line requires the MIDI clock header.
    pub fn uses_ticks(&self) -> bool {
        matches!(
            self,
            Line::NoteAlign { .. }
                | Line::Insertion { .. }
                | Line::OrnamentAlign { .. }
                | Line::TimeAlign(_)
                | Line::Sustain(_)
        )
    }
}

pub const MATCH_FILE_VERSION: &str = "matchFileVersion";
pub const MIDI_CLOCK_UNITS: &str = "midiClockUnits";
pub const MIDI_CLOCK_RATE: &str = "midiClockRate";

/// Header keys that may appear at most once.
pub const HEADER_KEYS: [&str; 3] = [MATCH_FILE_VERSION, MIDI_CLOCK_UNITS, MIDI_CLOCK_RATE];

/// Ticks per quarter and microseconds per quarter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MidiClock {
    pub ticks_per_quarter: u32,
    pub microseconds_per_quarter: u32,
}

impl MidiClock {
    pub fn tick_to_seconds(&self, tick: f64) -> f64 {
        tick * self.microseconds_per_quarter as f64
            / (self.ticks_per_quarter as f64 * 1_000_000.0)
    }

    pub fn seconds_to_tick(&self, seconds: f64) -> f64 {
        seconds * self.ticks_per_quarter as f64 * 1_000_000.0
            / self.microseconds_per_quarter as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MatchDocument {
    pub lines: Vec<Line>,
}

impl MatchDocument {
    pub fn new(lines: Vec<Line>) -> Self {
        MatchDocument { lines }
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// First `info` value for `key`.
    pub fn info(&self, key: &str) -> Option<&str> {
        self.lines.iter().find_map(|line| match line {
            Line::Info(info) if info.key == key => Some(info.value.as_str()),
            _ => None,
        })
    }

    fn positive_info(&self, key: &str) -> Option<u32> {
        self.info(key)
            .and_then(|v| v.parse::<u32>().ok())
            .filter(|v| *v > 0)
    }

    /// The clock header, when both keys are present and positive.
    pub fn midi_clock(&self) -> Option<MidiClock> {
        Some(MidiClock {
            ticks_per_quarter: self.positive_info(MIDI_CLOCK_UNITS)?,
            microseconds_per_quarter: self.positive_info(MIDI_CLOCK_RATE)?,
        })
    }

    pub fn perf_notes(&self) -> impl Iterator<Item = &PerfNote> {
        self.lines.iter().filter_map(Line::perf_note)
    }

    pub fn score_notes(&self) -> impl Iterator<Item = &ScoreNote> {
        self.lines.iter().filter_map(Line::score_note)
    }

    pub fn time_signatures(&self) -> Vec<(i64, f64, TimeSignature)> {
        let mut out: Vec<_> = self
            .lines
            .iter()
            .filter_map(|line| match line {
                Line::ScoreProp(ScoreProp {
                    value: ScorePropValue::TimeSignature(ts),
                    measure,
                    onset_in_beats,
                    ..
                }) => Some((*measure, onset_in_beats.value(), *ts)),
                _ => None,
            })
            .collect();
        out.sort_by_key(|(m, _, _)| *m);
        out
    }
}
