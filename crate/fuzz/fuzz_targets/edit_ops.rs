#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parser::parse;
use matchkit::semantics::build_note_mapping;
use matchkit::session::{apply_edits, EditOp};
use matchkit::ParseMode;

const DOC: &str = include_str!("../../crates/core/tests/data/fugue_repaired.match");

fuzz_target!(|data: &[u8]| {
    let Ok(ops) = serde_json::from_slice::<Vec<EditOp>>(data) else {
        return;
    };
    let doc = parse(DOC, ParseMode::Strict).0;
    if let Ok(next) = apply_edits(&doc, &ops) {
        let (mapping, diagnostics) = build_note_mapping(&next);
        assert!(diagnostics.is_empty());
        assert!(mapping.is_partition());
    }
});
