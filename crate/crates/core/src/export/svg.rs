use std::collections::HashMap;
use std::fmt::Write;

use crate::model::{Anchor, Line, MatchDocument};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    /// Height of one semitone row.
    pub row_height: f64,
    /// Vertical space between the score lane and the performance lane.
    pub lane_gap: f64,
    pub margin: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 1000.0,
            row_height: 4.0,
            lane_gap: 80.0,
            margin: 20.0,
        }
    }
}

const STYLE: &str = "\
.lane{fill:#fafafa;stroke:#ccc}\
.grid{stroke:#999;stroke-width:0.5}\
.note{stroke-width:0.5}\
.score{fill:#444;stroke:#222}\
.performance{fill:#c33;stroke:#811}\
.unmatched{stroke:#2a2;stroke-width:2}\
.match{stroke:#36c;stroke-dasharray:2,2}\
.ornament{stroke:#a3c;stroke-dasharray:1,3}";

struct Scale {
    lo: f64,
    hi: f64,
    left: f64,
    width: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, left: f64, width: f64) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Scale { lo, hi, left, width }
    }

    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.lo) / (self.hi - self.lo) * self.width
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct NoteBox {
    x: f64,
    y: f64,
    w: f64,
    pitch: i64,
}

impl NoteBox {
    fn center(&self, h: f64) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + h / 2.0)
    }
}

/// Two lanes (score in beats above, performance in seconds below) with
/// dotted connectors between matched notes, green outlines on insertions
/// and deletions, and grey gridlines at time-alignment anchors.
pub fn render_alignment_svg(doc: &MatchDocument, options: &SvgOptions) -> String {
    let SvgOptions {
        width,
        row_height: h,
        lane_gap,
        margin,
    } = *options;
    let clock = doc.midi_clock();
    let seconds = |tick: i64| clock.map_or(tick as f64, |c| c.tick_to_seconds(tick as f64));

    let score_notes: Vec<_> = doc.score_notes().collect();
    let perf_notes: Vec<_> = doc.perf_notes().collect();
    let anchors: Vec<(f64, i64)> = doc
        .lines
        .iter()
        .filter_map(|line| match line {
            Line::TimeAlign(t) => Some((t.position.onset_in_beats.value(), *t.ticks.first()?)),
            _ => None,
        })
        .collect();

    let pitches = score_notes
        .iter()
        .filter_map(|n| n.pitch.to_midi().ok().map(i64::from))
        .chain(perf_notes.iter().map(|n| n.midi_pitch));
    let (low, high) = pitches.fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p), hi.max(p)));
    let (low, high) = if low <= high { (low, high) } else { (60, 72) };
    let lane_height = (high - low + 1) as f64 * h;
    let inner = width - 2.0 * margin;
    let score_top = margin;
    let perf_top = margin + lane_height + lane_gap;
    let height = perf_top + lane_height + margin;

    let beats = Scale::new(
        score_notes
            .iter()
            .flat_map(|n| [n.position.onset_in_beats.value(), n.offset_in_beats.value()])
            .chain(anchors.iter().map(|a| a.0)),
        margin,
        inner,
    );
    let time = Scale::new(
        perf_notes
            .iter()
            .flat_map(|n| [seconds(n.onset_tick), seconds(n.offset_tick)])
            .chain(anchors.iter().map(|a| seconds(a.1))),
        margin,
        inner,
    );
    let row = |top: f64, pitch: i64| top + (high - pitch) as f64 * h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\">\n<style>{STYLE}</style>\n"
    );
    for top in [score_top, perf_top] {
        let _ = writeln!(
            svg,
            "<rect class=\"lane\" x=\"{margin:.2}\" y=\"{top:.2}\" width=\"{inner:.2}\" height=\"{lane_height:.2}\"/>"
        );
    }
    for &(b, tick) in &anchors {
        let (xs, xp) = (beats.x(b), time.x(seconds(tick)));
        let _ = writeln!(
            svg,
            "<line class=\"grid\" x1=\"{xs:.2}\" y1=\"{score_top:.2}\" x2=\"{xs:.2}\" y2=\"{:.2}\"/>",
            score_top + lane_height
        );
        let _ = writeln!(
            svg,
            "<line class=\"grid\" x1=\"{xp:.2}\" y1=\"{perf_top:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\"/>",
            perf_top + lane_height
        );
    }

    let mut score_boxes: HashMap<&Anchor, NoteBox> = HashMap::new();
    let mut perf_boxes: HashMap<i64, NoteBox> = HashMap::new();
    let mut connectors = Vec::new();
    for line in &doc.lines {
        let (score, perf, unmatched) = match line {
            Line::NoteAlign { score, perf } => (Some(score), Some(perf), false),
            Line::Deletion { score } => (Some(score), None, true),
            Line::Insertion { perf } => (None, Some(perf), true),
            Line::OrnamentAlign { perf, .. } => (None, Some(perf), false),
            _ => continue,
        };
        let extra = if unmatched { " unmatched" } else { "" };
        if let Some(n) = score {
            let Ok(pitch) = n.pitch.to_midi().map(i64::from) else { continue };
            let x = beats.x(n.position.onset_in_beats.value());
            let w = (beats.x(n.offset_in_beats.value()) - x).max(1.0);
            let y = row(score_top, pitch);
            let _ = writeln!(
                svg,
                "<rect class=\"note score{extra}\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\"><title>{}</title></rect>",
                escape(&n.anchor.to_string())
            );
            score_boxes.entry(&n.anchor).or_insert(NoteBox { x, y, w, pitch });
        }
        if let Some(n) = perf {
            let x = time.x(seconds(n.onset_tick));
            let w = (time.x(seconds(n.offset_tick)) - x).max(1.0);
            let y = row(perf_top, n.midi_pitch);
            let _ = writeln!(
                svg,
                "<rect class=\"note performance{extra}\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\"><title>{}</title></rect>",
                n.id
            );
            perf_boxes.entry(n.id).or_insert(NoteBox {
                x,
                y,
                w,
                pitch: n.midi_pitch,
            });
        }
        match line {
            Line::NoteAlign { score, perf } => connectors.push(("match", &score.anchor, perf.id)),
            Line::OrnamentAlign { anchor, perf, .. } => connectors.push(("ornament", anchor, perf.id)),
            _ => {}
        }
    }
    for (class, anchor, id) in connectors {
        let (Some(s), Some(p)) = (score_boxes.get(anchor), perf_boxes.get(&id)) else {
            continue;
        };
        let (x1, y1) = s.center(h);
        let (x2, y2) = p.center(h);
        let _ = writeln!(
            svg,
            "<line class=\"{class}\" x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" data-pitch=\"{}-{}\"/>",
            s.pitch, p.pitch
        );
    }
    svg.push_str("</svg>\n");
    svg
}
