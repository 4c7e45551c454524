#![no_main]

use libfuzzer_sys::fuzz_target;
use mera_cli::parse::{parse_interval, parse_list, parse_spec, parse_specs};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_interval(s);
        let _ = parse_list::<u64>(s);
        let _ = parse_list::<f64>(s);
        if let Ok((a, b, e)) = parse_spec(s) {
            assert!(parse_specs(s).is_ok_and(|v| v == [(a, b, e)]));
        }
    }
});
