#![no_main]

use libfuzzer_sys::fuzz_target;
use spme_core::{InitialCondition, OperatorSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(init) = text.parse::<InitialCondition>() {
        let back: InitialCondition = init.to_string().parse().expect("display form must parse");
        assert_eq!(init, back);
        let op = OperatorSpec::dirichlet(8, 64).unwrap();
        let _ = init.to_field(&op);
    }
});
