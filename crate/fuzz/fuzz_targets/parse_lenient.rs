#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parser::parse_bytes;
use matchkit::semantics::validate;
use matchkit::ParseMode;

fuzz_target!(|data: &[u8]| {
    let (doc, _) = parse_bytes(data, ParseMode::Lenient);
    let _ = validate(&doc);
});
