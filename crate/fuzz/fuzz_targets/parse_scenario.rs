#![no_main]

use libfuzzer_sys::fuzz_target;
use macsim_core::scenario::{parse_scenario, write_scenario};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_scenario(text) {
        let again = parse_scenario(&write_scenario(&s)).expect("written scenarios parse");
        assert_eq!(again, s);
    }
});
