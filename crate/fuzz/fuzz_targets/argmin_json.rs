#![no_main]

use libfuzzer_sys::fuzz_target;
use mera_core::cutbounds::ReductionSequence;
use mera_core::network::MeraNetwork;
use mera_core::schedule::solve_schedule;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let net = MeraNetwork::new(solve_schedule(2, 0.15).unwrap());
    if let Ok(seq) = ReductionSequence::from_json(&net, text) {
        assert!((seq.replay(&net).unwrap() - seq.cost).abs() < 1e-9);
    }
});
