#![no_main]

use kinetic_wealth::io::{read_reports, write_reports};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(reports) = read_reports(data) {
        let mut buf = Vec::new();
        write_reports(&reports, &mut buf).unwrap();
        let back = read_reports(buf.as_slice()).unwrap();
        assert_eq!(back.len(), reports.len());
    }
});
