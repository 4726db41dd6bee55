#![no_main]

use kinetic_wealth::io::{read_fit, write_fit};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(fit) = read_fit(data) {
        let mut buf = Vec::new();
        write_fit(&fit, &mut buf).unwrap();
        let _ = read_fit(buf.as_slice());
    }
});
