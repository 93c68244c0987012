use std::collections::BTreeSet;

use super::ExportError;
use crate::model::{Line, MatchDocument};

const MAX_TICK: i64 = 0x0FFF_FFFF;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MidiOptions {
    /// Format 1 with one track per `track` field (plus a tempo track)
    /// instead of a single format-0 track.
    pub multi_track: bool,
}

// Sort rank at equal ticks: note-offs, then pedal, then note-ons.
const OFF: u8 = 0;
const PEDAL: u8 = 1;
const ON: u8 = 2;

struct Event {
    tick: u32,
    rank: u8,
    track: i64,
    bytes: [u8; 3],
}

fn checked(line: usize, what: &'static str, value: i64, max: i64) -> Result<i64, ExportError> {
    if (0..=max).contains(&value) {
        Ok(value)
    } else {
        Err(ExportError::OutOfRange { line, what, value })
    }
}

fn collect_events(doc: &MatchDocument) -> Result<Vec<Event>, ExportError> {
    let mut events = Vec::new();
    for (index, line) in doc.lines.iter().enumerate() {
        let line_number = index + 1;
        if let Some(n) = line.perf_note() {
            let pitch = checked(line_number, "pitch", n.midi_pitch, 127)? as u8;
            let velocity = checked(line_number, "velocity", n.velocity, 127)? as u8;
            let channel = checked(line_number, "channel", n.channel, 15)? as u8;
            let on = checked(line_number, "onset tick", n.onset_tick, MAX_TICK)? as u32;
            let off = checked(line_number, "offset tick", n.offset_tick, MAX_TICK)? as u32;
            let track = checked(line_number, "track", n.track, i64::MAX)?;
            if off < on {
                return Err(ExportError::OutOfRange {
                    line: line_number,
                    what: "offset tick",
                    value: n.offset_tick,
                });
            }
            events.push(Event {
                tick: on,
                rank: ON,
                track,
                bytes: [0x90 | channel, pitch, velocity],
            });
            events.push(Event {
                tick: off,
                rank: OFF,
                track,
                bytes: [0x80 | channel, pitch, 0],
            });
        } else if let Line::Sustain(s) = line {
            let value = checked(line_number, "sustain value", s.value, 127)? as u8;
            let channel = checked(line_number, "channel", s.channel, 15)? as u8;
            let tick = checked(line_number, "tick", s.tick, MAX_TICK)? as u32;
            let track = checked(line_number, "track", s.track, i64::MAX)?;
            events.push(Event {
                tick,
                rank: PEDAL,
                track,
                bytes: [0xB0 | channel, 64, value],
            });
        }
    }
    // stable: document order breaks the remaining ties
    events.sort_by_key(|e| (e.tick, e.rank));
    Ok(events)
}

fn push_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 4];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7F) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = 0x80 | (value & 0x7F) as u8;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

fn tempo_event(out: &mut Vec<u8>, tempo: u32) {
    out.extend_from_slice(&[0x00, 0xFF, 0x51, 0x03]);
    out.extend_from_slice(&tempo.to_be_bytes()[1..]);
}

fn track_chunk(body: Vec<u8>) -> Vec<u8> {
    let mut chunk = b"MTrk".to_vec();
    chunk.extend_from_slice(&(body.len() as u32 + 4).to_be_bytes());
    chunk.extend(body);
    // end of track, delta 0
    chunk.extend_from_slice(&[0x00, 0xFF, 0x2F, 0x00]);
    chunk
}

fn event_body<'a>(events: impl Iterator<Item = &'a Event>, mut body: Vec<u8>) -> Vec<u8> {
    let mut now = 0;
    for e in events {
        push_vlq(&mut body, e.tick - now);
        body.extend_from_slice(&e.bytes);
        now = e.tick;
    }
    body
}

/// Single-track (format 0) export.
pub fn to_midi(doc: &MatchDocument) -> Result<Vec<u8>, ExportError> {
    to_midi_with(doc, MidiOptions::default())
}

pub fn to_midi_with(doc: &MatchDocument, options: MidiOptions) -> Result<Vec<u8>, ExportError> {
    let clock = doc.midi_clock().ok_or(ExportError::MissingClock)?;
    if clock.ticks_per_quarter > 0x7FFF {
        return Err(ExportError::DivisionTooLarge(clock.ticks_per_quarter));
    }
    if clock.microseconds_per_quarter > 0xFF_FFFF {
        return Err(ExportError::TempoTooLarge(clock.microseconds_per_quarter));
    }
    let events = collect_events(doc)?;

    let mut tempo = Vec::new();
    tempo_event(&mut tempo, clock.microseconds_per_quarter);
    let tracks = if options.multi_track {
        let ids: BTreeSet<i64> = events.iter().map(|e| e.track).collect();
        let mut tracks = vec![track_chunk(tempo)];
        for id in ids {
            let body = event_body(events.iter().filter(|e| e.track == id), Vec::new());
            tracks.push(track_chunk(body));
        }
        tracks
    } else {
        vec![track_chunk(event_body(events.iter(), tempo))]
    };

    let format: u16 = if options.multi_track { 1 } else { 0 };
    let mut out = b"MThd".to_vec();
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&format.to_be_bytes());
    out.extend_from_slice(&(tracks.len() as u16).to_be_bytes());
    out.extend_from_slice(&(clock.ticks_per_quarter as u16).to_be_bytes());
    for t in tracks {
        out.extend(t);
    }
    Ok(out)
}
