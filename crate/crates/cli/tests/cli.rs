use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn matchkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchkit"))
        .args(args)
        .env_remove("MATCHKIT_LOG")
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_strict_fugue_fails() {
    let out = matchkit(&["validate", "--strict", path_str(&data("fugue.match"))]);
    assert_eq!(out.status.code(), Some(1));
    let errors = stdout(&out).lines().filter(|l| l.contains(":error:")).count();
    assert!(errors >= 4, "{errors}");
}

#[test]
fn validate_repaired_and_empty_pass() {
    let out = matchkit(&["validate", path_str(&data("fugue_repaired.match"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.match");
    fs::write(&empty, "").unwrap();
    let out = matchkit(&["validate", "--strict", path_str(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
}

#[test]
fn validate_directory_recurses_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("a/b");
    fs::create_dir_all(&nested).unwrap();
    fs::copy(data("fugue_repaired.match"), nested.join("ok.match")).unwrap();
    fs::write(dir.path().join("bad.match"), "insertion-note(1,60,0,10,5,0,0).\n").unwrap();
    fs::write(dir.path().join("notes.txt"), "not a match file").unwrap();
    let out = matchkit(&["validate", "--json", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let files = report.as_array().unwrap();
    assert_eq!(files.len(), 2);
    assert!(files[0]["path"].as_str().unwrap().ends_with("a/b/ok.match"));
    assert!(files[1]["path"].as_str().unwrap().ends_with("bad.match"));

    let missing = dir.path().join("missing.match");
    let out = matchkit(&["validate", path_str(&missing), path_str(&nested)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stats_fugue() {
    let out = matchkit(&["stats", "--json", path_str(&data("fugue.match"))]);
    assert_eq!(out.status.code(), Some(0));
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["matches"], 9);
    assert_eq!(s["insertions"], 4);
    assert_eq!(s["deletions"], 1);
    assert_eq!(s["sections"], 1);
    let bpms = [
        60.0 / (1084.0 * 500_000.0 / 480e6),
        60.0 / (1012.0 * 500_000.0 / 480e6),
        60.0 / (1036.0 * 500_000.0 / 480e6),
    ];
    let mean = bpms.iter().sum::<f64>() / 3.0;
    assert!((s["mean_tempo"].as_f64().unwrap() - mean).abs() < 1e-9);
}

#[test]
fn stats_empty_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("e.match");
    fs::write(&empty, "").unwrap();
    let out = matchkit(&["stats", "--json", path_str(&empty)]);
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["matches", "insertions", "deletions", "ornaments", "sections"] {
        assert_eq!(s[key], 0, "{key}");
    }
    assert_eq!(s["mean_tempo"], serde_json::Value::Null);
}

#[test]
fn fmt_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.match");
    fs::copy(data("fugue.match"), &file).unwrap();
    assert_eq!(matchkit(&["fmt", path_str(&file)]).status.code(), Some(0));
    let once = fs::read(&file).unwrap();
    assert_eq!(once, fs::read(data("fugue_repaired.match")).unwrap());
    assert_eq!(matchkit(&["fmt", path_str(&file)]).status.code(), Some(0));
    assert_eq!(fs::read(&file).unwrap(), once);

    let out_file = dir.path().join("g.match");
    let out = matchkit(&["fmt", "--strict", path_str(&data("fugue.match")), "--out", path_str(&out_file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_file.exists());
}

#[test]
fn to_midi_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mid = dir.path().join("f.mid");
    let out = matchkit(&["to-midi", path_str(&data("fugue.match")), "--out", path_str(&mid)]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = fs::read(&mid).unwrap();
    let smf = midly::Smf::parse(&bytes).unwrap();
    assert_eq!(smf.header.format, midly::Format::SingleTrack);
    assert_eq!(smf.header.timing, midly::Timing::Metrical(480.into()));
    let ons = smf.tracks[0]
        .iter()
        .filter(|e| matches!(e.kind, midly::TrackEventKind::Midi { message: midly::MidiMessage::NoteOn { .. }, .. }))
        .count();
    assert_eq!(ons, 13);

    let multi = dir.path().join("m.mid");
    let out = matchkit(&[
        "to-midi",
        "--multi-track",
        path_str(&data("fugue.match")),
        "--out",
        path_str(&multi),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = fs::read(&multi).unwrap();
    assert_eq!(midly::Smf::parse(&bytes).unwrap().header.format, midly::Format::Parallel);
}

#[test]
fn to_midi_without_clock_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("n.match");
    fs::write(&file, "insertion-note(1,60,0,10,50,0,0).\n").unwrap();
    let out = matchkit(&["to-midi", path_str(&file), "--out", path_str(&dir.path().join("x.mid"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_formats() {
    let file = data("fugue_repaired.match");
    let out = matchkit(&["export", path_str(&file)]);
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("side,id,pitch,onset,duration,velocity,anchor_link"));
    assert_eq!(lines.count(), 14);
    assert!(csv.contains("performance,0,73,1.15,0.565625,43,n0\n"));

    let out = matchkit(&["export", "--format", "json", "--side", "score", path_str(&file)]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 10);

    let out = matchkit(&["export", "--format", "pianoroll", "--side", "performance", path_str(&file)]);
    let roll: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(roll["cells"].as_array().unwrap().len(), 128);
    assert_eq!(roll["resolution"], 0.01);

    let out = matchkit(&["export", "--format", "pianoroll", path_str(&file)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tempo_table_has_three_rows() {
    let out = matchkit(&["tempo", path_str(&data("fugue_repaired.match"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().ends_with("53.1365"));
}

#[test]
fn unfold_translation() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.match");
    fs::write(
        &file,
        "section(0.0,8.0,0.0,8.0,[]).\nsection(8.0,16.0,0.0,8.0,[da Capo]).\n",
    )
    .unwrap();
    let out = matchkit(&["unfold", path_str(&file), "--beat", "10"]);
    assert_eq!(stdout(&out), "2\n");
    let out = matchkit(&["unfold", path_str(&file), "--original", "2"]);
    assert_eq!(stdout(&out), "2 10\n");
    let out = matchkit(&["unfold", path_str(&file), "--beat", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plot_counts() {
    let out = matchkit(&["plot", path_str(&data("fugue_repaired.match"))]);
    let svg = stdout(&out);
    assert_eq!(svg.matches("class=\"match\"").count(), 9);
    let unmatched = svg.matches("class=\"note score unmatched\"").count()
        + svg.matches("class=\"note performance unmatched\"").count();
    assert_eq!(unmatched, 5);
    assert_eq!(svg.matches("class=\"grid\"").count(), 8);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(matchkit(&["validate"]).status.code(), Some(2));
    assert_eq!(matchkit(&["stats", "--nope", "x"]).status.code(), Some(2));
    assert_eq!(matchkit(&["export", "--format", "xml", "x"]).status.code(), Some(2));
    assert_eq!(matchkit(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_file_exits_3() {
    let out = matchkit(&["stats", "/nonexistent/file.match"]);
    assert_eq!(out.status.code(), Some(3));
}
