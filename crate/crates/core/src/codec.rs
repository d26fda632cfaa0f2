//! Versioned binary framing for model snapshots: a 4-byte magic, then the
//! bincode (fixed-int) encoding of the snapshot struct.

use bincode::Options;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

const LIMIT: u64 = 1 << 30;

fn options() -> impl Options {
    bincode::DefaultOptions::new()
        .with_fixint_encoding()
        .with_limit(LIMIT)
}

pub fn encode<T: Serialize>(magic: &[u8; 4], value: &T) -> Vec<u8> {
    let mut out = magic.to_vec();
    options()
        .serialize_into(&mut out, value)
        .expect("snapshot serializes");
    out
}

pub fn decode<T: DeserializeOwned>(magic: &[u8; 4], bytes: &[u8]) -> Result<T> {
    let body = bytes
        .strip_prefix(magic.as_slice())
        .ok_or_else(|| Error::Snapshot("bad magic".into()))?;
    options()
        .reject_trailing_bytes()
        .deserialize(body)
        .map_err(|e| Error::Snapshot(e.to_string()))
}
