#![no_main]

use libfuzzer_sys::fuzz_target;
use matchkit::{Decimal, Fraction};

fuzz_target!(|text: &str| {
    if let Ok(f) = text.parse::<Fraction>() {
        assert_eq!(f.to_string().parse::<Fraction>().ok(), Some(f.clone()));
        let _ = f.to_f64();
        let _ = f.checked_div(&f);
    }
    if let Ok(d) = text.parse::<Decimal>() {
        assert!(d.value().is_finite());
        let canonical = Decimal::from_f64(d.value()).unwrap();
        assert_eq!(canonical.as_str().parse::<Decimal>().unwrap().value(), d.value());
    }
});
