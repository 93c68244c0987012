#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parser::parse_bytes;
use matchkit::ParseMode;

fuzz_target!(|data: &[u8]| {
    let (doc, diagnostics) = parse_bytes(data, ParseMode::Strict);
    // strict mode never keeps a line it could not read
    assert!(doc.lines.iter().all(|l| !matches!(l, matchkit::Line::Opaque { .. })));
    let _ = diagnostics;
});
