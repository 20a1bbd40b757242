#![no_main]

use libfuzzer_sys::fuzz_target;
use spme_cli::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config(text) {
        let again = parse_config(&cfg.to_text()).expect("serialized config must parse");
        assert_eq!(cfg, again);
    }
});
