#![no_main]

use std::collections::BTreeMap;

use libfuzzer_sys::fuzz_target;
use mera_cli::{parse_config_file, ExperimentConfig, Plan, COMMANDS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(map) = parse_config_file(text) else { return };
    for c in COMMANDS {
        // Validation only; never run the experiment.
        if let Ok(cfg) = ExperimentConfig::resolve(c.name, map.clone(), BTreeMap::new()) {
            let _ = Plan::from_config(&cfg);
        }
    }
});
