#![no_main]

use libfuzzer_sys::fuzz_target;
use mera_core::network::MeraNetwork;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = MeraNetwork::from_json(text) {
        let again = net.to_json().expect("parsed networks serialise");
        assert_eq!(MeraNetwork::from_json(&again).unwrap().levels(), net.levels());
    }
});
