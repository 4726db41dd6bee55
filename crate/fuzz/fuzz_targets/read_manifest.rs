#![no_main]

use kinetic_wealth::cli::{read_manifest, write_manifest};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = read_manifest(data) {
        let mut buf = Vec::new();
        write_manifest(&m, &mut buf).unwrap();
        assert_eq!(read_manifest(buf.as_slice()).unwrap(), m);
    }
});
