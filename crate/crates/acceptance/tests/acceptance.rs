//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p matchkit-acceptance --test acceptance`.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};
use serde_json::{json, Value};
use tower::ServiceExt;

use matchkit::export::to_midi;
use matchkit::parser::{codes, has_errors, parse};
use matchkit::semantics::{
    expected_onset_in_beats, original_to_unfolded, perf_to_score, score_to_perf, tempo_curve,
    unfolded_to_original, validate, TimeMap, UnfoldMap, UnfoldSection,
};
use matchkit::{serialize, Line, MatchDocument, ParseMode, Severity};
use matchkit_acceptance::document;

const FUGUE: &str = include_str!("../../core/tests/data/fugue.match");
const REPAIRED: &str = include_str!("../../core/tests/data/fugue_repaired.match");

type Check = Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn fugue() -> MatchDocument {
    parse(FUGUE, ParseMode::Lenient).0
}

fn ingestion() -> Check {
    let (doc, warnings) = parse(FUGUE, ParseMode::Lenient);
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for line in &doc.lines {
        *kinds.entry(line.kind_name()).or_default() += 1;
    }
    let expected: BTreeMap<&str, usize> = [
        ("info", 5),
        ("scoreprop", 2),
        ("note_align", 9),
        ("insertion", 4),
        ("deletion", 1),
        ("time_align", 4),
        ("section", 1),
        ("sustain", 2),
    ]
    .into_iter()
    .collect();
    ensure(kinds == expected, || format!("line kinds {kinds:?}"))?;
    let repairs = warnings.iter().filter(|d| d.severity == Severity::Warning).count();
    ensure(repairs >= 4 && !has_errors(&warnings), || {
        format!("{repairs} repair warnings, errors: {}", has_errors(&warnings))
    })?;
    let (_, strict) = parse(FUGUE, ParseMode::Strict);
    let errors = strict.iter().filter(|d| d.is_error()).count();
    ensure(errors >= 4, || format!("strict parse gave {errors} errors"))?;
    Ok(format!("{} lines, {repairs} repairs, strict errors {errors}", doc.lines.len()))
}

fn round_trip() -> Check {
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let passed = Cell::new(0u32);
    let lines = Cell::new(0usize);
    let result = runner.run(&document(), |doc| {
        let text = serialize(&doc);
        let (back, diagnostics) = parse(&text, ParseMode::Strict);
        prop_assert!(diagnostics.is_empty(), "{diagnostics:?}\n{text}");
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize(&back), text);
        passed.set(passed.get() + 1);
        lines.set(lines.get() + doc.lines.len());
        Ok(())
    });
    match result {
        Ok(()) if passed.get() >= cases => Ok(format!(
            "{} documents, {} lines, 100% fixpoint",
            passed.get(),
            lines.get()
        )),
        Ok(()) => Err(format!("only {} documents ran", passed.get())),
        Err(e) => Err(e.to_string()),
    }
}

/// Scientific pitch from the spelled name, computed without the library.
fn oracle_midi(step: &str, modifier: &str, octave: i64) -> i64 {
    let base = match step {
        "C" => 0,
        "D" => 2,
        "E" => 4,
        "F" => 5,
        "G" => 7,
        "A" => 9,
        "B" => 11,
        _ => unreachable!(),
    };
    let shift = match modifier {
        "" | "n" => 0,
        "#" => 1,
        "x" => 2,
        "b" => -1,
        "bb" => -2,
        _ => unreachable!(),
    };
    12 * (octave + 1) + base + shift
}

fn pitch_consistency() -> Check {
    let doc = fugue();
    let mut pairs = 0;
    for line in &doc.lines {
        if let Line::NoteAlign { score, perf } = line {
            let p = &score.pitch;
            let oracle = oracle_midi(p.step.as_str(), p.modifier.as_str(), p.octave);
            let lib = i64::from(p.to_midi().map_err(|e| e.to_string())?);
            ensure(oracle == perf.midi_pitch && lib == oracle, || {
                format!("{} {p}: oracle {oracle}, library {lib}, played {}", score.anchor, perf.midi_pitch)
            })?;
            pairs += 1;
        }
    }
    ensure(pairs == 9, || format!("{pairs} pairs"))?;
    let mismatches = |d: &MatchDocument| {
        validate(d)
            .iter()
            .filter(|x| x.code == codes::PITCH_MISMATCH)
            .count()
    };
    ensure(mismatches(&doc) == 0, || "clean fugue flagged".into())?;
    let mut mutated = doc.clone();
    for line in &mut mutated.lines {
        if let Line::NoteAlign { perf, .. } = line {
            perf.midi_pitch = 60;
            break;
        }
    }
    ensure(mismatches(&mutated) == 1, || "mutated pair not flagged".into())?;
    Ok("9/9 pairs agree with the oracle, mutation flagged".into())
}

fn time_map() -> Check {
    let tm = TimeMap::from_document(&fugue());
    let expected = [(1.0, 1620.0), (2.0, 2704.0), (3.0, 3716.0), (4.0, 4752.0), (1.5, 2162.0)];
    for (beats, tick) in expected {
        let got = score_to_perf(beats, &tm).map_err(|e| e.to_string())?;
        let exact = beats.fract() == 0.0;
        ensure(if exact { got == tick } else { (got - tick).abs() <= 1e-9 }, || {
            format!("score_to_perf({beats}) = {got}, expected {tick}")
        })?;
        let back = perf_to_score(tick, &tm).map_err(|e| e.to_string())?;
        ensure((back - beats).abs() <= 1e-9, || {
            format!("perf_to_score({tick}) = {back}, expected {beats}")
        })?;
    }
    Ok("4 anchors exact, midpoint 2162, inverse within 1e-9".into())
}

fn tempo() -> Check {
    let doc = fugue();
    let tm = TimeMap::from_document(&doc);
    let (segments, _) = tempo_curve(&tm, Some(&doc)).map_err(|e| e.to_string())?;
    ensure(segments.len() == 3, || format!("{} segments", segments.len()))?;
    // 60 * beats / seconds with 480 ticks and 500000 us per quarter
    let bpm = |ticks: f64| 60.0 / (ticks * 500_000.0 / 480.0 / 1e6);
    let oracle = [bpm(2704.0 - 1620.0), bpm(3716.0 - 2704.0), bpm(4752.0 - 3716.0)];
    for (s, o) in segments.iter().zip(oracle) {
        ensure((s.bpm - o).abs() <= 0.01, || format!("segment {}: {} vs {o}", s.start_beats, s.bpm))?;
    }
    ensure((segments[0].bpm - 53.14).abs() <= 0.01, || format!("1->2 at {}", segments[0].bpm))?;
    ensure((segments[2].bpm - 55.60).abs() <= 0.01, || format!("3->4 at {}", segments[2].bpm))?;
    Ok(format!(
        "{:.4} / {:.4} / {:.4} bpm",
        segments[0].bpm, segments[1].bpm, segments[2].bpm
    ))
}

type NoteKey = (u8, u32, u32, u8);

type Decoded = (u16, Vec<u32>, Vec<NoteKey>, Vec<(u32, u8, u8)>);

/// Decodes notes and pedal events with an independent SMF reader.
fn decode_smf(bytes: &[u8]) -> Result<Decoded, String> {
    use midly::{MetaMessage, MidiMessage, Timing, TrackEventKind};
    let smf = midly::Smf::parse(bytes).map_err(|e| e.to_string())?;
    let division = match smf.header.timing {
        Timing::Metrical(t) => t.as_int(),
        other => return Err(format!("timing {other:?}")),
    };
    let mut tempos = Vec::new();
    let mut notes = Vec::new();
    let mut pedals = Vec::new();
    for track in &smf.tracks {
        let mut now = 0u32;
        let mut open: BTreeMap<(u8, u8), Vec<(u32, u8)>> = BTreeMap::new();
        for event in track {
            now += event.delta.as_int();
            match event.kind {
                TrackEventKind::Meta(MetaMessage::Tempo(t)) => tempos.push(t.as_int()),
                TrackEventKind::Midi { channel, message } => match message {
                    MidiMessage::NoteOn { key, vel } if vel > 0 => open
                        .entry((channel.as_int(), key.as_int()))
                        .or_default()
                        .push((now, vel.as_int())),
                    MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                        let queue = open.entry((channel.as_int(), key.as_int())).or_default();
                        if queue.is_empty() {
                            return Err(format!("note-off without note-on at {now}"));
                        }
                        let (on, vel) = queue.remove(0);
                        notes.push((key.as_int(), on, now, vel));
                    }
                    MidiMessage::Controller { controller, value } if controller == 64 => {
                        pedals.push((now, value.as_int(), channel.as_int()))
                    }
                    _ => {}
                },
                _ => {}
            }
        }
    }
    notes.sort();
    pedals.sort();
    Ok((division, tempos, notes, pedals))
}

fn smf_export() -> Check {
    let doc = parse(REPAIRED, ParseMode::Strict).0;
    let bytes = to_midi(&doc).map_err(|e| e.to_string())?;
    let (division, tempos, notes, pedals) = decode_smf(&bytes)?;
    ensure(division == 480, || format!("division {division}"))?;
    ensure(tempos == [500_000], || format!("tempo events {tempos:?}"))?;
    let mut expected: Vec<NoteKey> = doc
        .perf_notes()
        .map(|n| (n.midi_pitch as u8, n.onset_tick as u32, n.offset_tick as u32, n.velocity as u8))
        .collect();
    expected.sort();
    ensure(notes == expected, || format!("notes {notes:?}\nexpected {expected:?}"))?;
    let mut expected_pedals: Vec<_> = doc
        .lines
        .iter()
        .filter_map(|l| match l {
            Line::Sustain(s) => Some((s.tick as u32, s.value as u8, s.channel as u8)),
            _ => None,
        })
        .collect();
    expected_pedals.sort();
    ensure(pedals == expected_pedals && pedals.len() == 2, || format!("pedals {pedals:?}"))?;
    Ok(format!(
        "{} notes and {} pedal events identical, division 480, tempo 500000",
        notes.len(),
        pedals.len()
    ))
}

fn onset_consistency() -> Check {
    let doc = fugue();
    let meters = doc.time_signatures();
    let mut checked = 0;
    for n in doc.score_notes() {
        let p = &n.position;
        // 4/4: quarter-note beats, four per measure
        let oracle = (p.measure - 1) as f64 * 4.0 + (p.beat - 1) as f64 + p.offset.to_f64() * 4.0;
        let lib = expected_onset_in_beats(p, &meters).ok_or("no meter")?;
        let stored = p.onset_in_beats.value();
        ensure((oracle - stored).abs() <= 1e-6 && (lib - stored).abs() <= 1e-6, || {
            format!("{}: stored {stored}, oracle {oracle}, library {lib}", n.anchor)
        })?;
        let spot = match n.anchor.to_string().as_str() {
            "n0" => Some(0.5),
            "n5" => Some(2.75),
            "n8" => Some(3.75),
            _ => None,
        };
        if let Some(v) = spot {
            ensure((lib - v).abs() <= 1e-6, || format!("{} at {lib}, expected {v}", n.anchor))?;
        }
        checked += 1;
    }
    let flagged = validate(&doc)
        .iter()
        .filter(|d| d.code == codes::ONSET_MISMATCH)
        .count();
    ensure(flagged == 0, || format!("{flagged} onset mismatches reported"))?;
    Ok(format!("{checked} snotes within 1e-6"))
}

fn unfold() -> Check {
    let um = UnfoldMap::new(vec![
        UnfoldSection::new(0.0, 8.0, 0.0, 8.0),
        UnfoldSection::new(8.0, 16.0, 0.0, 8.0),
    ]);
    ensure(unfolded_to_original(10.0, &um) == Ok(2.0), || "10 -> original".into())?;
    ensure(original_to_unfolded(2.0, &um) == vec![2.0, 10.0], || "2 -> unfolded".into())?;

    let raw = [(0.0, 8.0, 0.0, 8.0), (8.0, 16.0, 0.0, 8.0)];
    let scan_forward = |x: f64| {
        let mut found = None;
        for (bu, eu, bo, _) in raw {
            if x >= bu && x < eu {
                found = Some(bo + (x - bu));
            }
        }
        found
    };
    let scan_back = |x: f64| {
        let mut out = Vec::new();
        for (bu, _, bo, eo) in raw {
            if x >= bo && x < eo {
                out.push(bu + (x - bo));
            }
        }
        out
    };
    let mut runner = TestRunner::deterministic();
    let values = vec(-4.0f64..20.0, 1000)
        .new_tree(&mut runner)
        .map_err(|e| e.to_string())?
        .current();
    for &x in &values {
        let lib = unfolded_to_original(x, &um).ok();
        ensure(lib == scan_forward(x), || format!("unfolded {x}: {lib:?} vs {:?}", scan_forward(x)))?;
        ensure(original_to_unfolded(x, &um) == scan_back(x), || format!("original {x}"))?;
    }
    Ok(format!("{} random beats agree with the interval scan", values.len()))
}

#[derive(Debug, Clone)]
enum Attempt {
    Edit { stale: bool, ops: Vec<Value> },
    Undo,
}

fn attempt() -> impl Strategy<Value = Attempt> {
    let perf = prop_oneof![8 => 0i64..14, 1 => Just(99i64)];
    let anchor = prop_oneof![
        9 => proptest::sample::select(vec!["n0", "n1", "n2", "n3", "n4", "n5", "n7", "n8", "n9", "n17"]),
        1 => proptest::sample::select(vec!["n6", "zz", "", "a,b"]),
    ];
    let op = (0u8..5, perf, anchor).prop_map(|(kind, p, a)| match kind {
        0 | 1 => json!({"op": "set_match", "perf_id": p, "anchor": a}),
        2 => json!({"op": "set_insertion", "perf_id": p}),
        3 => json!({"op": "set_deletion", "anchor": a}),
        _ if p % 2 == 0 => json!({"op": "clear", "perf_id": p}),
        _ => json!({"op": "clear", "anchor": a}),
    });
    prop_oneof![
        9 => (proptest::bool::weighted(0.05), vec(op, 1..4)).prop_map(|(stale, ops)| Attempt::Edit { stale, ops }),
        1 => Just(Attempt::Undo),
    ]
}

async fn request(app: &axum::Router, method: &str, uri: &str, body: String) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn partition_safety() -> Check {
    let app = matchkit_service::router(Arc::new(matchkit_service::Config::default()));
    let (status, body) = request(&app, "POST", "/v1/docs", REPAIRED.to_string()).await;
    ensure(status == StatusCode::CREATED, || format!("create: {status}"))?;
    let created: Value = serde_json::from_slice(&body).unwrap();
    let id = created["id"].as_str().unwrap().to_string();
    let mut version = created["version"].as_u64().unwrap();

    let mut runner = TestRunner::deterministic();
    let attempts = vec(attempt(), 10_000)
        .new_tree(&mut runner)
        .map_err(|e| e.to_string())?
        .current();
    let mut statuses: BTreeMap<u16, usize> = BTreeMap::new();
    let (_, mut current) = request(&app, "GET", &format!("/v1/docs/{id}/file"), String::new()).await;
    for (i, a) in attempts.iter().enumerate() {
        let (status, body) = match a {
            Attempt::Edit { stale, ops } => {
                let base = if *stale { version.saturating_sub(1) } else { version };
                let payload = json!({"base_version": base, "ops": ops}).to_string();
                request(&app, "POST", &format!("/v1/docs/{id}/edits"), payload).await
            }
            Attempt::Undo => request(&app, "POST", &format!("/v1/docs/{id}/undo"), String::new()).await,
        };
        *statuses.entry(status.as_u16()).or_default() += 1;
        let (_, file) = request(&app, "GET", &format!("/v1/docs/{id}/file"), String::new()).await;
        match status {
            StatusCode::OK => {
                let v: Value = serde_json::from_slice(&body).unwrap();
                let next = v["version"].as_u64().unwrap();
                ensure(next == version + 1, || format!("attempt {i}: version {version} -> {next}"))?;
                version = next;
            }
            StatusCode::UNPROCESSABLE_ENTITY | StatusCode::CONFLICT => {
                ensure(file == current, || format!("attempt {i}: rejected {a:?} changed the file"))?;
            }
            other => return Err(format!("attempt {i}: unexpected status {other}")),
        }
        let text = String::from_utf8(file.clone()).map_err(|e| e.to_string())?;
        let (doc, mut diagnostics) = parse(&text, ParseMode::Strict);
        diagnostics.extend(validate(&doc));
        ensure(!has_errors(&diagnostics), || {
            format!("attempt {i} ({a:?}) left an invalid file: {:?}", diagnostics)
        })?;
        current = file;
    }
    Ok(format!("10000 attempts, statuses {statuses:?}, every state valid"))
}

fn main() -> ExitCode {
    let runtime = tokio::runtime::Builder::new_current_thread().build().unwrap();
    let results: Vec<(&str, Check)> = vec![
        ("sample ingestion", ingestion()),
        ("round-trip fixpoint", round_trip()),
        ("pitch consistency", pitch_consistency()),
        ("time map oracle", time_map()),
        ("tempo oracle", tempo()),
        ("SMF export oracle", smf_export()),
        ("onset consistency", onset_consistency()),
        ("unfold oracle", unfold()),
        ("service partition safety", runtime.block_on(partition_safety())),
    ];
    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
