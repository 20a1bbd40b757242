#![no_main]

use libfuzzer_sys::fuzz_target;
use spme_cli::parse_sample_times;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(times) = parse_sample_times(text) {
        assert!(times.iter().all(|t| t.is_finite() && *t >= 0.0));
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }
});
