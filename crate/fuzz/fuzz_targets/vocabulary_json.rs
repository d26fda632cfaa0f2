#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch::vectorizer::{Encoder, HashingVectorizer, Vocabulary};
use linematch::Description;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let desc = Description::from_text("fuzz", "TRES 739mL CD KER Smooth");
    if let Ok(v) = Vocabulary::from_json(text) {
        let x = v.encode(&desc);
        assert_eq!(x.dim(), v.dim());
    }
    if let Ok(h) = HashingVectorizer::from_json(text) {
        let _ = h.encode(&desc);
    }
});
