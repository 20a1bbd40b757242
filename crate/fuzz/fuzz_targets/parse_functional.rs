#![no_main]

use libfuzzer_sys::fuzz_target;
use spme_core::Functional;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = text.parse::<Functional>() {
        assert_eq!(f.to_string().parse::<Functional>(), Ok(f));
    }
});
