#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch_service::engine::decode_snapshot;

fuzz_target!(|data: &[u8]| {
    let _ = decode_snapshot(data);
});
