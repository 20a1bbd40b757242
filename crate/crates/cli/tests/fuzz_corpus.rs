//! Replays the checked-in fuzz corpus through the same properties the fuzz
//! targets assert, so the seeds stay meaningful without a nightly toolchain.

use std::fs;
use std::path::PathBuf;

use spme_cli::{parse_config, parse_sample_times};
use spme_core::{Functional, InitialCondition, OperatorSpec};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds_round_trip() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_config") {
        if let Ok(cfg) = parse_config(&text) {
            assert_eq!(parse_config(&cfg.to_text()).as_ref(), Ok(&cfg), "{name}");
            accepted += 1;
        }
    }
    assert!(accepted >= 5);
}

#[test]
fn initial_condition_seeds_round_trip() {
    let op = OperatorSpec::dirichlet(8, 64).unwrap();
    for (name, text) in seeds("parse_initial_condition") {
        if let Ok(init) = text.parse::<InitialCondition>() {
            assert_eq!(init.to_string().parse::<InitialCondition>().as_ref(), Ok(&init), "{name}");
            let _ = init.to_field(&op);
        }
    }
}

#[test]
fn sample_time_seeds_are_increasing() {
    for (_, text) in seeds("parse_sample_times") {
        if let Ok(times) = parse_sample_times(&text) {
            assert!(times.iter().all(|t| t.is_finite() && *t >= 0.0));
            assert!(times.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn functional_seeds_round_trip() {
    for (name, text) in seeds("parse_functional") {
        if let Ok(f) = text.parse::<Functional>() {
            assert_eq!(f.to_string().parse::<Functional>(), Ok(f), "{name}");
        }
    }
}

mod properties {
    use proptest::prelude::*;
    use spme_cli::{parse_config, parse_sample_times};
    use spme_core::{Functional, InitialCondition};

    const KEYS: &[&str] = &[
        "model.r",
        "model.psi",
        "model.psi_alpha",
        "noise.profile",
        "noise.q",
        "noise.matrix",
        "sim.dt",
        "sim.initial",
        "sim.snapshot_times",
        "ergodic.initials",
        "ergodic.sample_times",
        "ergodic.functionals",
        "ergodic.fit_window",
        "run.experiments",
        "bogus",
    ];

    fn line() -> impl Strategy<Value = String> {
        (prop::sample::select(KEYS), "[-a-z0-9.:,;* ]{0,24}").prop_map(|(k, v)| format!("{k} = {v}"))
    }

    proptest! {
        #[test]
        fn config_parser_never_panics_and_round_trips(lines in prop::collection::vec(line(), 0..8), r in 1.01f64..9.0) {
            let text = format!("model.r = {r}\n{}", lines.join("\n"));
            if let Ok(cfg) = parse_config(&text) {
                prop_assert_eq!(parse_config(&cfg.to_text()), Ok(cfg));
            }
        }

        #[test]
        fn scalar_parsers_never_panic(s in "[-a-z0-9.:,*e ]{0,32}") {
            let _ = parse_sample_times(&s);
            if let Ok(init) = s.parse::<InitialCondition>() {
                prop_assert_eq!(init.to_string().parse::<InitialCondition>(), Ok(init));
            }
            if let Ok(f) = s.parse::<Functional>() {
                prop_assert_eq!(f.to_string().parse::<Functional>(), Ok(f));
            }
        }
    }
}
