#![no_main]

use libfuzzer_sys::fuzz_target;
use macsim_core::algorithms::{coded_transfer_bits, decode_coded_transfer};
use macsim_core::bits::{decode_fixed, ControlBits};

fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let width = u32::from(head % 64) + 1;
    let bits: Vec<bool> = rest.iter().flat_map(|b| (0..8).map(move |i| b >> i & 1 == 1)).collect();
    let _ = decode_fixed(&bits[..bits.len().min(64)]);
    if let Some(values) = decode_coded_transfer(&bits, width) {
        assert_eq!(decode_coded_transfer(&coded_transfer_bits(&values, width), width), Some(values));
    }
    let control = ControlBits::from_bits(bits);
    let mut reader = control.reader();
    while reader.uint(width).is_some() {}
});
