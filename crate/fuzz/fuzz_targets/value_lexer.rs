#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::parser::lexer::{list_items, split_terms, value_lexer};

fuzz_target!(|text: &str| {
    if let Ok(tokens) = value_lexer(text) {
        // tokens are slices of the input separated by single commas
        assert_eq!(tokens.join(",").len(), text.len());
        for t in tokens {
            let _ = list_items(t);
        }
    }
    let _ = split_terms(text);
});
