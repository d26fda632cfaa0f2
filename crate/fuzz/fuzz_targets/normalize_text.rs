#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch::textprep::{extract_quantities, Normalizer};
use linematch::Description;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let normalizer = Normalizer::from_corpus(["TRES 739mL CD KER Smooth", "olive oil 1 L bottle"]);
    if let Ok(desc) = normalizer.normalize_text("fuzz", text) {
        let _ = extract_quantities(desc);
    }
    let _ = extract_quantities(Description::from_text("fuzz", text));
});
