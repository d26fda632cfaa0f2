#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch::corpus::{read_triples, write_triples, TripleRecord};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = read_triples(text) {
        // Whatever parses must survive a write/read cycle unchanged.
        let again = read_triples(&write_triples(&records)).expect("written triples parse");
        assert_eq!(records, again);
    }
    if let Some(line) = text.lines().next() {
        let _ = TripleRecord::from_json_line(line);
    }
});
