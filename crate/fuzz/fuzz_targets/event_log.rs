#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch_service::parse_log;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_log(text) {
        assert!(records.windows(2).all(|w| w[0].seq < w[1].seq));
    }
});
