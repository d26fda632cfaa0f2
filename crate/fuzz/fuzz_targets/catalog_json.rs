#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch::taxonomy::{Catalog, Taxonomy};

const TAXONOMY: &str = r#"{"nodes": [
  {"name": "oil"},
  {"name": "olive oil", "parents": ["oil"]},
  {"name": "sunflower oil", "parents": ["oil"]}
]}"#;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let taxonomy = Taxonomy::from_json(TAXONOMY).expect("fixed taxonomy parses");
    let _ = Catalog::from_json(text, &taxonomy);
});
