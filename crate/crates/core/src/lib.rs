//! Matching of invoice and purchase-order line-item descriptions.
//!
//! The pipeline normalizes noisy descriptions ([`textprep`]), retrieves fuzzy
//! candidates from a purchase-order pool ([`fuzzy`]) and learns from agent
//! feedback: a bilinear ranking model trained on preference triples
//! ([`ranker`]) and a pair classifier trained on match/no-match labels
//! ([`classifier`]). One-to-many matches are resolved against a product
//! taxonomy and catalog ([`taxonomy`]). [`corpus`] and [`eval`] implement the
//! dataset recipes and the evaluation protocol.

pub mod classifier;
pub mod corpus;
pub mod codec;
mod error;
pub mod eval;
pub mod fuzzy;
pub mod online;
pub mod ranker;
pub mod taxonomy;
pub mod textprep;
pub mod vectorizer;

pub use error::{Error, Result};
pub use textprep::{Description, RawDescription, Source};
pub use vectorizer::SparseVector;
