//! Theme generation and evaluation for strategic-plan vision elements.
//!
//! The library ingests a corpus of report pages, derives candidate themes
//! through two topic-modeling pipelines — nonnegative matrix factorization
//! over TF-IDF, and an embed/reduce/cluster pipeline with class-based term
//! weighting — then exports visualization data and scores human correlation
//! annotations against truth vision elements.
//!
//! Everything is deterministic: all randomness is seeded, outputs use
//! stable orderings, and re-running any stage over the same inputs produces
//! byte-identical artifacts.

pub mod cluster;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod nmf;
pub mod scrape;
pub mod topics;
pub mod vectorize;
pub mod viz;

pub use error::{Error, Result};
