#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch::taxonomy::{Catalog, Taxonomy, TaxonomyMatcher};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(taxonomy) = Taxonomy::from_json(text) else { return };
    let Ok(catalog) = Catalog::new(Vec::new(), &taxonomy) else { return };
    let matcher = TaxonomyMatcher::new(taxonomy, catalog);
    if let (Ok(a), Ok(b)) = (matcher.line_item("a", "olive oil"), matcher.line_item("b", "oil")) {
        let _ = matcher.match_invoice(&a, &[b]);
    }
});
