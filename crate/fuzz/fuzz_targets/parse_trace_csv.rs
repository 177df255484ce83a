#![no_main]

use libfuzzer_sys::fuzz_target;
use macsim_core::scenario::{parse_trace_csv, write_trace_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = parse_trace_csv(text) {
        let again = parse_trace_csv(&write_trace_csv(&trace)).expect("written traces parse");
        assert_eq!(again.counts(), trace.counts());
    }
});
