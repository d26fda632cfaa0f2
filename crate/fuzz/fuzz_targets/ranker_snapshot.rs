#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch::ranker::RankModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = RankModel::from_bytes(data) {
        let again = RankModel::from_bytes(&model.to_bytes()).expect("re-encoded model decodes");
        assert_eq!(again.to_bytes(), model.to_bytes());
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = RankModel::from_json(text);
    }
});
