//! Lenient repair of `note(...)` terms with one field too many or too few.
//!
//! A repair is accepted only when exactly one candidate survives the value
//! ranges, the pitch implied by the score half of the line, and the onset
//! of the preceding performance note (lines are onset-ordered).

use std::collections::BTreeSet;

use super::diagnostic::{codes, Diagnostic};
use super::line::LineCx;
use super::ParseMode;
use crate::model::parse_int;

type Fields = [i64; 7];

fn plausible(v: &Fields, expected_pitch: Option<i64>, previous_onset: Option<i64>) -> bool {
    let [id, pitch, onset, offset, velocity, channel, track] = *v;
    id >= 0
        && (0..=127).contains(&pitch)
        && onset >= 0
        && offset >= onset
        && (0..=127).contains(&velocity)
        && (0..=15).contains(&channel)
        && track >= 0
        && expected_pitch.is_none_or(|p| p == pitch)
        && previous_onset.is_none_or(|p| onset >= p)
}

fn to_fields(values: impl IntoIterator<Item = i64>) -> Option<Fields> {
    let v: Vec<i64> = values.into_iter().collect();
    v.try_into().ok()
}

/// Candidates from dropping one of eight fields. Drops that remove one of
/// two adjacent equal values are returned separately; they win ties.
fn drop_candidates(values: &[i64]) -> (BTreeSet<Fields>, BTreeSet<Fields>) {
    let mut any = BTreeSet::new();
    let mut duplicated = BTreeSet::new();
    for skip in 0..values.len() {
        let Some(fields) = to_fields(
            values
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| *v),
        ) else {
            continue;
        };
        let is_dup = (skip > 0 && values[skip - 1] == values[skip])
            || values.get(skip + 1) == Some(&values[skip]);
        if is_dup {
            duplicated.insert(fields);
        }
        any.insert(fields);
    }
    (any, duplicated)
}

/// Candidates from splitting one run-on integer of six fields into two.
fn split_candidates(tokens: &[&str]) -> BTreeSet<Fields> {
    let mut out = BTreeSet::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.len() < 2 || !tok.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        for cut in 1..tok.len() {
            let (left, right) = tok.split_at(cut);
            let leading_zero = |s: &str| s.len() > 1 && s.starts_with('0');
            if leading_zero(left) || leading_zero(right) {
                continue;
            }
            let mut parts: Vec<&str> = tokens.to_vec();
            parts.splice(i..=i, [left, right]);
            let parsed: Option<Vec<i64>> = parts.iter().map(|p| parse_int(p)).collect();
            if let Some(fields) = parsed.and_then(to_fields) {
                out.insert(fields);
            }
        }
    }
    out
}

pub(crate) fn repair_note_fields<'a>(
    cx: &mut LineCx<'a>,
    args: &'a str,
    tokens: &[&'a str],
    expected_pitch: Option<i64>,
) -> Result<Fields, Diagnostic> {
    let arity = |cx: &LineCx<'a>, extra: &str| {
        cx.fail(
            args,
            codes::ARITY,
            format!(
                "`note` takes 7 fields, found {}{extra}",
                tokens.len()
            ),
        )
    };
    if cx.mode == ParseMode::Strict || !(tokens.len() == 6 || tokens.len() == 8) {
        return Err(arity(cx, ""));
    }
    let previous_onset = cx.ctx.previous_onset;
    let keep = |set: BTreeSet<Fields>| -> Vec<Fields> {
        set.into_iter()
            .filter(|f| plausible(f, expected_pitch, previous_onset))
            .collect()
    };

    let (chosen, code, what) = if tokens.len() == 8 {
        let values: Option<Vec<i64>> = tokens.iter().map(|t| parse_int(t)).collect();
        let Some(values) = values else {
            return Err(arity(cx, "; not all fields are integers"));
        };
        let (any, duplicated) = drop_candidates(&values);
        let mut chosen = keep(any);
        if chosen.len() > 1 {
            let preferred = keep(duplicated);
            if !preferred.is_empty() {
                chosen = preferred;
            }
        }
        (chosen, codes::EXTRA_FIELD, "dropped one extra field")
    } else {
        (
            keep(split_candidates(tokens)),
            codes::RUN_ON_FIELD,
            "split one run-on field",
        )
    };

    match chosen.as_slice() {
        [fields] => {
            let rendered: Vec<String> = fields.iter().map(i64::to_string).collect();
            cx.repair(
                args,
                code,
                format!("{what}; read as note({})", rendered.join(",")),
            )?;
            Ok(*fields)
        }
        [] => Err(arity(cx, "; no repair fits the value ranges")),
        many => Err(arity(
            cx,
            &format!("; {} repairs fit, refusing to guess", many.len()),
        )),
    }
}
