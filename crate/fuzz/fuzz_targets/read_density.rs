#![no_main]

use kinetic_wealth::io::{read_density, write_density};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(y) = read_density(data) {
        assert!(y.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        let mut buf = Vec::new();
        write_density(&y, &mut buf).unwrap();
        let back = read_density(buf.as_slice()).unwrap();
        assert_eq!(back.values(), y.values());
    }
});
