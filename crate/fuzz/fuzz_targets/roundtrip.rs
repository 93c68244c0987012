#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parser::{parse_bytes, serialize};
use matchkit::ParseMode;

fuzz_target!(|data: &[u8]| {
    let (doc, _) = parse_bytes(data, ParseMode::Lenient);
    let text = serialize(&doc);
    let (again, _) = parse_bytes(text.as_bytes(), ParseMode::Lenient);
    assert_eq!(serialize(&again), text);
});
