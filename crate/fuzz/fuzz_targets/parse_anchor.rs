#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parse_anchor;

fuzz_target!(|text: &str| {
    if let Ok(anchor) = parse_anchor(text) {
        let shown = anchor.to_string();
        assert_eq!(parse_anchor(&shown).ok(), Some(anchor));
    }
});
