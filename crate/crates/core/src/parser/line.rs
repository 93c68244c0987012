use crate::model::{
    parse_int, Anchor, Decimal, Fraction, Info, Line, Modifier, OrnamentKind, PerfNote,
    PitchSpelling, ScoreNote, ScoreProp, ScorePropValue, ScoreTimePoint, Section, Step, Sustain,
    TimeAlign, TimeKind, TimeSignature,
};

use super::diagnostic::{codes, Diagnostic, Severity};
use super::lexer::{list_items, offset_in, split_terms, value_lexer, LexError, Term};
use super::repair::repair_note_fields;
use super::{ParseMode, RepairContext};

/// Parsing state for one physical line. Every `&str` handed to the
/// helpers below is a subslice of `raw`, which is how columns are found.
pub(crate) struct LineCx<'a> {
    pub raw: &'a str,
    pub line_number: usize,
    pub mode: ParseMode,
    pub ctx: &'a RepairContext,
    pub warnings: Vec<Diagnostic>,
}

impl<'a> LineCx<'a> {
    fn column(&self, at: &str) -> usize {
        let offset = offset_in(self.raw, at).min(self.raw.len());
        self.raw
            .get(..offset)
            .map_or(offset, |prefix| prefix.chars().count())
            + 1
    }

    fn diag(&self, severity: Severity, at: &str, code: &'static str, msg: String) -> Diagnostic {
        Diagnostic::new(
            severity,
            self.line_number,
            self.column(at),
            code,
            msg,
            self.raw,
        )
    }

    /// A defect that makes the line unusable: an error in strict mode, a
    /// warning (the line is kept opaque) in lenient mode.
    pub fn fail(&self, at: &str, code: &'static str, msg: impl Into<String>) -> Diagnostic {
        let severity = match self.mode {
            ParseMode::Strict => Severity::Error,
            ParseMode::Lenient => Severity::Warning,
        };
        self.diag(severity, at, code, msg.into())
    }

    /// A known deviation: rejected in strict mode, recorded and repaired
    /// in lenient mode.
    pub fn repair(
        &mut self,
        at: &str,
        code: &'static str,
        msg: impl Into<String>,
    ) -> Result<(), Diagnostic> {
        match self.mode {
            ParseMode::Strict => Err(self.diag(Severity::Error, at, code, msg.into())),
            ParseMode::Lenient => {
                let d = self.diag(Severity::Warning, at, code, msg.into());
                self.warnings.push(d);
                Ok(())
            }
        }
    }

    fn lex_fail(&self, base: &'a str, err: LexError) -> Diagnostic {
        let at = base.get(err.offset()..).unwrap_or("");
        let code = if err.is_bracket_error() {
            codes::UNBALANCED
        } else {
            codes::SYNTAX
        };
        self.fail(at, code, err.to_string())
    }

    /// Trims a token, recording a whitespace repair when needed.
    fn clean(&mut self, token: &'a str) -> Result<&'a str, Diagnostic> {
        let trimmed = token.trim();
        if trimmed.len() != token.len() {
            self.repair(token, codes::WHITESPACE, "whitespace around value")?;
        }
        Ok(trimmed)
    }

    pub fn tokens(&mut self, args: &'a str) -> Result<Vec<&'a str>, Diagnostic> {
        let raw = value_lexer(args).map_err(|e| self.lex_fail(args, e))?;
        raw.into_iter().map(|t| self.clean(t)).collect()
    }

    fn fields(
        &mut self,
        term: &Term<'a>,
        expected: usize,
    ) -> Result<Vec<&'a str>, Diagnostic> {
        let args = self.args(term)?;
        let tokens = self.tokens(args)?;
        if tokens.len() != expected {
            return Err(self.fail(
                args,
                codes::ARITY,
                format!(
                    "`{}` takes {expected} fields, found {}",
                    term.name,
                    tokens.len()
                ),
            ));
        }
        Ok(tokens)
    }

    fn args(&self, term: &Term<'a>) -> Result<&'a str, Diagnostic> {
        term.args.ok_or_else(|| {
            self.fail(
                term.name,
                codes::SYNTAX,
                format!("expected `{}(...)`", term.name),
            )
        })
    }

    fn list(&mut self, token: &'a str) -> Result<Vec<&'a str>, Diagnostic> {
        match list_items(token) {
            None => Err(self.fail(token, codes::SYNTAX, "expected a bracketed list")),
            Some(Err(e)) => Err(self.lex_fail(token, e)),
            Some(Ok(items)) => items.into_iter().map(|t| self.clean(t)).collect(),
        }
    }

    pub fn int(&self, token: &str) -> Result<i64, Diagnostic> {
        parse_int(token).ok_or_else(|| {
            let digits = token.strip_prefix('-').unwrap_or(token);
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                self.fail(token, codes::OUT_OF_RANGE, format!("integer `{token}` overflows"))
            } else {
                self.fail(
                    token,
                    codes::NON_NUMERIC,
                    format!("expected an integer, found `{token}`"),
                )
            }
        })
    }

    fn ranged(&self, token: &str, lo: i64, hi: i64, what: &str) -> Result<i64, Diagnostic> {
        let v = self.int(token)?;
        if v < lo || v > hi {
            let hi = if hi == i64::MAX {
                String::new()
            } else {
                hi.to_string()
            };
            return Err(self.fail(
                token,
                codes::OUT_OF_RANGE,
                format!("{what} {v} outside {lo}-{hi}"),
            ));
        }
        Ok(v)
    }

    fn decimal(&self, token: &str) -> Result<Decimal, Diagnostic> {
        token.parse().map_err(|_| {
            self.fail(
                token,
                codes::NON_NUMERIC,
                format!("expected a decimal number, found `{token}`"),
            )
        })
    }

    fn fraction(&self, token: &str, what: &str) -> Result<Fraction, Diagnostic> {
        let f: Fraction = token.parse().map_err(|e| match e {
            crate::model::ModelError::ZeroDenominator => {
                self.fail(token, codes::OUT_OF_RANGE, format!("{what} has a zero denominator"))
            }
            _ => self.fail(
                token,
                codes::NON_NUMERIC,
                format!("expected a fraction for {what}, found `{token}`"),
            ),
        })?;
        if f.numerator() < 0 {
            return Err(self.fail(token, codes::OUT_OF_RANGE, format!("{what} is negative")));
        }
        Ok(f)
    }

    fn anchor(&self, token: &str) -> Result<Anchor, Diagnostic> {
        crate::model::parse_anchor(token)
            .map_err(|e| self.fail(token, codes::SYNTAX, e.to_string()))
    }

    fn time_point(&self, mb: &str, offset: &str, onset: &str) -> Result<ScoreTimePoint, Diagnostic> {
        let (m, b) = mb.split_once(':').ok_or_else(|| {
            self.fail(mb, codes::SYNTAX, format!("expected Measure:Beat, found `{mb}`"))
        })?;
        Ok(ScoreTimePoint {
            measure: self.ranged(m, 0, i64::MAX, "measure")?,
            beat: self.ranged(b, 1, i64::MAX, "beat")?,
            offset: self.fraction(offset, "offset")?,
            onset_in_beats: self.decimal(onset)?,
        })
    }

    fn pitch(&mut self, list_token: &'a str, octave: &'a str) -> Result<PitchSpelling, Diagnostic> {
        let items = self.list(list_token)?;
        let (step, modifier) = match items.as_slice() {
            [step] => (*step, None),
            [step, modifier] => (*step, Some(*modifier)),
            _ => {
                return Err(self.fail(
                    list_token,
                    codes::SYNTAX,
                    "expected [NoteName] or [NoteName,Modifier]",
                ))
            }
        };
        let step: Step = step
            .parse()
            .map_err(|e: crate::model::ModelError| self.fail(step, codes::SYNTAX, e.to_string()))?;
        let modifier = match modifier {
            None => Modifier::None,
            Some("") => {
                self.repair(list_token, codes::EMPTY_MODIFIER, "empty modifier; write [NoteName]")?;
                Modifier::None
            }
            Some(m) => m.parse().map_err(|e: crate::model::ModelError| {
                self.fail(m, codes::SYNTAX, e.to_string())
            })?,
        };
        let pitch = PitchSpelling::new(step, modifier, self.int(octave)?);
        pitch
            .to_midi()
            .map_err(|e| self.fail(list_token, codes::OUT_OF_RANGE, e.to_string()))?;
        Ok(pitch)
    }

    fn score_note(&mut self, term: &Term<'a>) -> Result<ScoreNote, Diagnostic> {
        let f = self.fields(term, 9)?;
        let anchor = self.anchor(f[0])?;
        let pitch = self.pitch(f[1], f[2])?;
        let position = self.time_point(f[3], f[4], f[6])?;
        let duration = self.fraction(f[5], "duration")?;
        let offset_in_beats = self.decimal(f[7])?;
        let attributes = self.list(f[8])?.into_iter().map(str::to_string).collect();
        Ok(ScoreNote {
            anchor,
            pitch,
            position,
            duration,
            offset_in_beats,
            attributes,
        })
    }

    fn perf_note(&mut self, term: &Term<'a>, expected_pitch: Option<i64>) -> Result<PerfNote, Diagnostic> {
        let args = self.args(term)?;
        let tokens = self.tokens(args)?;
        let values: [i64; 7] = if tokens.len() == 7 {
            let mut v = [0; 7];
            for (slot, tok) in v.iter_mut().zip(&tokens) {
                *slot = self.int(tok)?;
            }
            v
        } else {
            repair_note_fields(self, args, &tokens, expected_pitch)?
        };
        let [id, pitch, onset, offset, velocity, channel, track] = values;
        let checks: [(i64, i64, i64, &str); 6] = [
            (pitch, 0, 127, "MIDI pitch"),
            (onset, 0, i64::MAX, "onset tick"),
            (offset, 0, i64::MAX, "offset tick"),
            (velocity, 0, 127, "velocity"),
            (channel, 0, 15, "channel"),
            (track, 0, i64::MAX, "track"),
        ];
        for (i, (v, lo, hi, what)) in checks.into_iter().enumerate() {
            if v < lo || v > hi {
                return Err(self.fail(
                    tokens_at(&tokens, i + 1, args),
                    codes::OUT_OF_RANGE,
                    format!("{what} {v} out of range"),
                ));
            }
        }
        Ok(PerfNote {
            id,
            midi_pitch: pitch,
            onset_tick: onset,
            offset_tick: offset,
            velocity,
            channel,
            track,
        })
    }

    fn info(&mut self, term: &Term<'a>) -> Result<Line, Diagnostic> {
        let f = self.fields(term, 2)?;
        if f[0].is_empty() {
            return Err(self.fail(f[0], codes::SYNTAX, "empty info key"));
        }
        Ok(Line::Info(Info {
            key: f[0].to_string(),
            value: f[1].to_string(),
        }))
    }

    fn score_prop(&mut self, term: &Term<'a>) -> Result<Line, Diagnostic> {
        let f = self.fields(term, 4)?;
        if f[0].is_empty() {
            return Err(self.fail(f[0], codes::SYNTAX, "empty scoreprop key"));
        }
        let value = if f[0] == "timeSignature" {
            let ts = f[1]
                .split_once('/')
                .and_then(|(n, d)| Some((parse_int(n)?, parse_int(d)?)))
                .filter(|(n, d)| *n > 0 && *d > 0)
                .ok_or_else(|| {
                    self.fail(f[1], codes::SYNTAX, format!("invalid time signature `{}`", f[1]))
                })?;
            ScorePropValue::TimeSignature(TimeSignature {
                numerator: ts.0,
                denominator: ts.1,
            })
        } else {
            ScorePropValue::Text(f[1].to_string())
        };
        Ok(Line::ScoreProp(ScoreProp {
            key: f[0].to_string(),
            value,
            measure: self.ranged(f[2], 0, i64::MAX, "measure")?,
            onset_in_beats: self.decimal(f[3])?,
        }))
    }

    fn time_align(&mut self, stime: &Term<'a>, ptime: &Term<'a>) -> Result<Line, Diagnostic> {
        let f = self.fields(stime, 4)?;
        let position = self.time_point(f[0], f[1], f[2])?;
        let kind: TimeKind = f[3].parse().map_err(|_| {
            self.fail(f[3], codes::SYNTAX, format!("expected beat or downbeat, found `{}`", f[3]))
        })?;
        let args = self.args(ptime)?;
        let tokens = self.tokens(args)?;
        let items = match tokens.as_slice() {
            [single] if single.starts_with('[') => self.list(single)?,
            _ => {
                self.repair(args, codes::PTIME_UNBRACKETED, "ptime ticks should be a bracketed list")?;
                tokens
            }
        };
        if items.is_empty() {
            return Err(self.fail(args, codes::ARITY, "ptime needs at least one tick"));
        }
        let ticks = items
            .iter()
            .map(|t| self.ranged(t, 0, i64::MAX, "tick"))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Line::TimeAlign(TimeAlign {
            position,
            kind,
            ticks,
        }))
    }

    fn section(&mut self, term: &Term<'a>) -> Result<Line, Diagnostic> {
        let f = self.fields(term, 5)?;
        Ok(Line::Section(Section {
            begin_unfolded: self.decimal(f[0])?,
            end_unfolded: self.decimal(f[1])?,
            begin_original: self.decimal(f[2])?,
            end_original: self.decimal(f[3])?,
            directives: self.list(f[4])?.into_iter().map(str::to_string).collect(),
        }))
    }

    fn sustain(&mut self, term: &Term<'a>) -> Result<Line, Diagnostic> {
        let args = self.args(term)?;
        let f = self.tokens(args)?;
        let (channel, track) = match f.len() {
            4 => (
                self.ranged(f[2], 0, 15, "channel")?,
                self.ranged(f[3], 0, i64::MAX, "track")?,
            ),
            2 => {
                self.repair(args, codes::SUSTAIN_SHORT, "sustain without channel and track")?;
                (0, 0)
            }
            n => {
                return Err(self.fail(
                    args,
                    codes::ARITY,
                    format!("`sustain` takes 4 fields, found {n}"),
                ))
            }
        };
        Ok(Line::Sustain(Sustain {
            tick: self.ranged(f[0], 0, i64::MAX, "tick")?,
            value: self.ranged(f[1], 0, 127, "sustain value")?,
            channel,
            track,
        }))
    }

    fn ornament(&mut self, head: &Term<'a>, note: &Term<'a>, kind: OrnamentKind) -> Result<Line, Diagnostic> {
        let f = self.fields(head, 1)?;
        let anchor = self.anchor(f[0])?;
        let perf = self.perf_note(note, None)?;
        Ok(Line::OrnamentAlign { anchor, kind, perf })
    }

    pub fn parse(&mut self) -> Result<Line, Diagnostic> {
        let raw = self.raw;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(self.fail(raw, codes::SYNTAX, "empty line"));
        }
        let body = match trimmed.strip_suffix('.') {
            Some(body) => body,
            None => {
                self.repair(&trimmed[trimmed.len()..], codes::MISSING_DOT, "line does not end with `.`")?;
                trimmed
            }
        };
        let terms = split_terms(body).map_err(|e| self.lex_fail(body, e))?;
        let named = |i: usize| terms.get(i).map(|t| t.name);
        let shape_error = |cx: &Self| {
            cx.fail(
                body,
                codes::SYNTAX,
                format!("malformed `{}` line", terms[0].name),
            )
        };
        match terms[0].name {
            "info" if terms.len() == 1 => self.info(&terms[0]),
            "scoreprop" if terms.len() == 1 => self.score_prop(&terms[0]),
            "section" if terms.len() == 1 => self.section(&terms[0]),
            "sustain" if terms.len() == 1 => self.sustain(&terms[0]),
            "snote" if terms.len() == 2 && named(1) == Some("note") => {
                let score = self.score_note(&terms[0])?;
                let expected = score.pitch.to_midi().ok().map(i64::from);
                let perf = self.perf_note(&terms[1], expected)?;
                Ok(Line::NoteAlign { score, perf })
            }
            "snote" if terms.len() == 2 && named(1) == Some("deletion") && terms[1].args.is_none() => {
                let score = self.score_note(&terms[0])?;
                Ok(Line::Deletion { score })
            }
            "insertion" if terms.len() == 2 && terms[0].args.is_none() && named(1) == Some("note") => {
                let perf = self.perf_note(&terms[1], None)?;
                Ok(Line::Insertion { perf })
            }
            "ornament" if terms.len() == 2 && named(1) == Some("note") => {
                self.ornament(&terms[0], &terms[1], OrnamentKind::Ornament)
            }
            "trill" if terms.len() == 2 && named(1) == Some("note") => {
                self.ornament(&terms[0], &terms[1], OrnamentKind::Trill)
            }
            "stime" if terms.len() == 2 && named(1) == Some("ptime") => {
                self.time_align(&terms[0], &terms[1])
            }
            "info" | "scoreprop" | "section" | "sustain" | "snote" | "insertion" | "ornament"
            | "trill" | "stime" => Err(shape_error(self)),
            other => Err(self.fail(
                terms[0].name,
                codes::UNKNOWN_LINE_KIND,
                format!("unknown line kind `{other}`"),
            )),
        }
    }
}

fn tokens_at<'a>(tokens: &[&'a str], i: usize, fallback: &'a str) -> &'a str {
    // after a lenient repair the token list no longer lines up with the values
    if tokens.len() == 7 {
        tokens[i]
    } else {
        fallback
    }
}
