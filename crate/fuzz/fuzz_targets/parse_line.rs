#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parser::{parse_line, serialize_line};
use matchkit::ParseMode;

fuzz_target!(|text: &str| {
    if text.contains('\n') {
        return;
    }
    for mode in [ParseMode::Strict, ParseMode::Lenient] {
        if let Ok(parsed) = parse_line(text, 1, mode) {
            let canonical = serialize_line(&parsed.line);
            let again = parse_line(&canonical, 1, ParseMode::Strict)
                .unwrap_or_else(|d| panic!("{canonical:?}: {}", d.message));
            assert_eq!(serialize_line(&again.line), canonical);
        }
    }
});
