use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use matchkit::export::{
    note_array_csv, note_array_json, render_alignment_svg, to_midi_with, to_note_array,
    to_pianoroll, MidiOptions, Side, SvgOptions,
};
use matchkit::parser::{has_errors, parse_bytes};
use matchkit::semantics::{
    build_note_mapping, mean_tempo, original_to_unfolded, tempo_curve, unfolded_to_original,
    validate, TimeMap, UnfoldMap,
};
use matchkit::{serialize, Diagnostic, Line, MatchDocument, ParseMode};

use crate::exit;
use crate::{Command, Common, Format, SideArg};

/// A command outcome that is not success.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: io::Error) -> Self {
        Failure {
            code: exit::IO,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: exit::INVALID,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> u8 {
    let outcome = match command {
        Command::Validate { paths, common } => return validate_paths(&paths, common),
        Command::Stats { path, common } => stats(&path, common),
        Command::Fmt { path, out, common } => fmt(&path, out.as_deref(), common),
        Command::ToMidi {
            path,
            out,
            multi_track,
            common,
        } => to_midi(&path, &out, multi_track, common),
        Command::Export {
            path,
            format,
            side,
            resolution,
            out,
            common,
        } => export(&path, format, side, resolution, out.as_deref(), common),
        Command::Tempo { path, common } => tempo(&path, common),
        Command::Unfold {
            path,
            beat,
            original,
            common,
        } => unfold(&path, beat, original, common),
        Command::Plot {
            path,
            out,
            width,
            common,
        } => plot(&path, out.as_deref(), width, common),
        Command::Serve {
            port,
            host,
            state_dir,
            max_body,
        } => serve(host, port, state_dir, max_body),
    };
    match outcome {
        Ok(()) => exit::OK,
        Err(f) => {
            eprintln!("matchkit: {}", f.message);
            f.code
        }
    }
}

fn mode(common: Common) -> ParseMode {
    if common.strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn print_diagnostic(path: &Path, d: &Diagnostic) {
    eprintln!("{}:{d}", path.display());
}

/// Reads and parses one file. Strict-mode parse errors fail the command;
/// repair warnings go to stderr.
fn load(path: &Path, common: Common) -> Result<MatchDocument, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    let (doc, diagnostics) = parse_bytes(&bytes, mode(common));
    for d in &diagnostics {
        print_diagnostic(path, d);
    }
    if has_errors(&diagnostics) {
        return Err(Failure::invalid(format!(
            "{}: {} parse error(s)",
            path.display(),
            diagnostics.iter().filter(|d| d.is_error()).count()
        )));
    }
    Ok(doc)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::io(path, e)),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn print_json(value: &Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("json value");
    text.push('\n');
    write_output(None, text.as_bytes())
}

fn match_files(path: &Path) -> Vec<Result<PathBuf, Failure>> {
    if !path.is_dir() {
        return vec![Ok(path.to_path_buf())];
    }
    let mut files: Vec<_> = walkdir::WalkDir::new(path)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|entry| match entry {
            Ok(e) if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "match") => {
                Some(Ok(e.into_path()))
            }
            Ok(_) => None,
            Err(e) => Some(Err(Failure {
                code: exit::IO,
                message: e.to_string(),
            })),
        })
        .collect();
    files.sort_by(|a, b| match (a, b) {
        (Ok(a), Ok(b)) => a.cmp(b),
        _ => std::cmp::Ordering::Equal,
    });
    files
}

fn validate_paths(paths: &[PathBuf], common: Common) -> u8 {
    let mut io_failed = false;
    let mut any_error = false;
    let mut report = Vec::new();
    for file in paths.iter().flat_map(|p| match_files(p)) {
        let path = match file {
            Ok(p) => p,
            Err(f) => {
                eprintln!("matchkit: {}", f.message);
                io_failed = true;
                continue;
            }
        };
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("matchkit: {}", Failure::io(&path, e).message);
                io_failed = true;
                if common.json {
                    report.push(json!({ "path": path, "error": "unreadable" }));
                }
                continue;
            }
        };
        let (doc, mut diagnostics) = parse_bytes(&bytes, mode(common));
        diagnostics.extend(validate(&doc));
        diagnostics.sort_by(|a, b| (a.line_number, a.code).cmp(&(b.line_number, b.code)));
        any_error |= has_errors(&diagnostics);
        if common.json {
            report.push(json!({ "path": path, "diagnostics": diagnostics }));
        } else {
            for d in &diagnostics {
                println!("{}:{d}", path.display());
            }
        }
    }
    if common.json && print_json(&Value::Array(report)).is_err() {
        io_failed = true;
    }
    if io_failed {
        exit::IO
    } else if any_error {
        exit::INVALID
    } else {
        exit::OK
    }
}

fn stats(path: &Path, common: Common) -> Outcome {
    let doc = load(path, common)?;
    let mut lines: BTreeMap<&str, usize> = BTreeMap::new();
    for line in &doc.lines {
        *lines.entry(line.kind_name()).or_default() += 1;
    }
    let (mapping, _) = build_note_mapping(&doc);
    let span = |values: Vec<f64>| {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            [lo, hi]
        } else {
            [0.0, 0.0]
        }
    };
    let beats = span(
        doc.score_notes()
            .flat_map(|n| [n.position.onset_in_beats.value(), n.offset_in_beats.value()])
            .collect(),
    );
    let ticks = span(
        doc.perf_notes()
            .flat_map(|n| [n.onset_tick as f64, n.offset_tick as f64])
            .collect(),
    );
    let tm = TimeMap::from_document(&doc);
    let tempo = tempo_curve(&tm, Some(&doc))
        .ok()
        .and_then(|(segments, _)| mean_tempo(&segments));
    let sections = doc.lines.iter().filter(|l| matches!(l, Line::Section(_))).count();

    let summary = json!({
        "lines": lines,
        "matches": mapping.matches.len(),
        "insertions": mapping.insertions.len(),
        "deletions": mapping.deletions.len(),
        "ornaments": mapping.ornament_notes.len(),
        "sections": sections,
        "beat_span": beats,
        "tick_span": [ticks[0] as i64, ticks[1] as i64],
        "mean_tempo": tempo,
    });
    if common.json {
        return print_json(&summary);
    }
    let mut text = String::new();
    for (kind, n) in &lines {
        text.push_str(&format!("lines.{kind}: {n}\n"));
    }
    for key in ["matches", "insertions", "deletions", "ornaments", "sections"] {
        text.push_str(&format!("{key}: {}\n", summary[key]));
    }
    text.push_str(&format!("beat_span: {} .. {}\n", beats[0], beats[1]));
    text.push_str(&format!("tick_span: {} .. {}\n", ticks[0], ticks[1]));
    match tempo {
        Some(bpm) => text.push_str(&format!("mean_tempo: {bpm:.2}\n")),
        None => text.push_str("mean_tempo: -\n"),
    }
    write_output(None, text.as_bytes())
}

fn fmt(path: &Path, out: Option<&Path>, common: Common) -> Outcome {
    let doc = load(path, common)?;
    let text = serialize(&doc);
    let target = out.unwrap_or(path);
    if fs::read(target).is_ok_and(|old| old == text.as_bytes()) {
        log::info!("{} already canonical", target.display());
        return Ok(());
    }
    fs::write(target, text).map_err(|e| Failure::io(target, e))
}

fn to_midi(path: &Path, out: &Path, multi_track: bool, common: Common) -> Outcome {
    let doc = load(path, common)?;
    let bytes = to_midi_with(&doc, MidiOptions { multi_track })
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    write_output(Some(out), &bytes)
}

fn side(arg: SideArg) -> Side {
    match arg {
        SideArg::Score => Side::Score,
        SideArg::Performance => Side::Performance,
        SideArg::Joined => Side::Joined,
    }
}

fn export(
    path: &Path,
    format: Format,
    side_arg: SideArg,
    resolution: Option<f64>,
    out: Option<&Path>,
    common: Common,
) -> Outcome {
    let doc = load(path, common)?;
    let side = side(side_arg);
    let fail = |e: matchkit::export::ExportError| Failure::invalid(format!("{}: {e}", path.display()));
    let text = match format {
        Format::Csv => note_array_csv(&to_note_array(&doc, side)).map_err(fail)?,
        Format::Json => note_array_json(&to_note_array(&doc, side)) + "\n",
        Format::Pianoroll => {
            let roll = to_pianoroll(&doc, side, resolution).map_err(fail)?;
            serde_json::to_string(&roll).expect("pianoroll json") + "\n"
        }
    };
    write_output(out, text.as_bytes())
}

fn tempo(path: &Path, common: Common) -> Outcome {
    let doc = load(path, common)?;
    let tm = TimeMap::from_document(&doc);
    let (segments, diagnostics) = tempo_curve(&tm, Some(&doc))
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    for d in diagnostics.iter().chain(&tm.diagnostics(&doc)) {
        print_diagnostic(path, d);
    }
    if common.json {
        return print_json(&json!({ "segments": segments, "mean_tempo": mean_tempo(&segments) }));
    }
    let mut text = String::from("start_beats\tend_beats\tstart_tick\tend_tick\tbpm\n");
    for s in &segments {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\n",
            s.start_beats, s.end_beats, s.start_tick, s.end_tick, s.bpm
        ));
    }
    write_output(None, text.as_bytes())
}

fn unfold(path: &Path, beat: Option<f64>, original: Option<f64>, common: Common) -> Outcome {
    let doc = load(path, common)?;
    let um = UnfoldMap::from_document(&doc);
    if let Some(b) = beat {
        let mapped = unfolded_to_original(b, &um)
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        return if common.json {
            print_json(&json!({ "unfolded": b, "original": mapped }))
        } else {
            write_output(None, format!("{mapped}\n").as_bytes())
        };
    }
    if let Some(b) = original {
        let mapped = original_to_unfolded(b, &um);
        return if common.json {
            print_json(&json!({ "original": b, "unfolded": mapped }))
        } else {
            let list: Vec<String> = mapped.iter().map(f64::to_string).collect();
            write_output(None, format!("{}\n", list.join(" ")).as_bytes())
        };
    }
    if common.json {
        return print_json(&json!({ "sections": um.sections() }));
    }
    let mut text = String::from("unfolded\toriginal\tdirectives\n");
    for s in um.sections() {
        text.push_str(&format!(
            "{}..{}\t{}..{}\t{}\n",
            s.begin_unfolded,
            s.end_unfolded,
            s.begin_original,
            s.end_original,
            s.directives.join(",")
        ));
    }
    write_output(None, text.as_bytes())
}

fn plot(path: &Path, out: Option<&Path>, width: f64, common: Common) -> Outcome {
    let doc = load(path, common)?;
    let options = SvgOptions {
        width,
        ..SvgOptions::default()
    };
    write_output(out, render_alignment_svg(&doc, &options).as_bytes())
}

fn serve(host: std::net::IpAddr, port: u16, state_dir: Option<PathBuf>, max_body: usize) -> Outcome {
    let store = match &state_dir {
        Some(dir) => matchkit_service::Store::open(dir).map_err(|e| Failure::io(dir, e))?,
        None => matchkit_service::Store::in_memory(),
    };
    let config = matchkit_service::Config { store, max_body };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(Path::new("runtime"), e))?;
    runtime
        .block_on(matchkit_service::serve((host, port).into(), config))
        .map_err(|e| Failure::io(Path::new(&format!("{host}:{port}")), e))
}
