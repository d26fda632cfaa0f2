#![no_main]

use libfuzzer_sys::fuzz_target;
use linematch_service::http::{FeedbackRequest, QueryRequest};

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<QueryRequest>(data);
    if let Ok(req) = serde_json::from_slice::<FeedbackRequest>(data) {
        let text = serde_json::to_string(&req).expect("request serializes");
        assert_eq!(serde_json::from_str::<FeedbackRequest>(&text).expect("request parses"), req);
    }
});
