//! Journal co-citation similarity and per-article mean dissimilarity.
//!
//! The pipeline reads an institution's reference lists, one row per
//! reference occurrence, and measures for each cited journal where its
//! citations come from. Journals cited by the same citing journals in the
//! same proportions are similar. An article whose references point at
//! journals unlike the one it was published in gets a high mean
//! dissimilarity, a hint of multidisciplinary work.
//!
//! ```
//! use cocite::ingest::JournalId;
//! use cocite::similarity::{normalize_profiles, pairwise_similarity, CountMatrix, SimilarityOptions};
//!
//! // citing journals 0 and 1; cited journal 2 gets counts (2, 0), journal 3 gets (1, 1)
//! let j = JournalId;
//! let counts = CountMatrix::from_cells(4, [(j(0), j(2), 2), (j(0), j(3), 1), (j(1), j(3), 1)]);
//! let out = pairwise_similarity(&normalize_profiles(&counts), &SimilarityOptions::default())?;
//! assert_eq!(out.matrix.lookup(j(2), j(3))?, 0.5);
//! # Ok::<(), cocite::Error>(())
//! ```
//!
//! Modules follow the data flow: [`ingest`] → [`similarity`] → [`dissim`] →
//! [`analytics`] and [`export`], with [`pipeline`] wiring them to files.

pub mod analytics;
pub mod config;
pub mod dissim;
pub mod error;
pub mod export;
pub mod ingest;
pub mod pipeline;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};

// Book chapters are compiled as doctests so their snippets stay runnable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ingest.md")]
    mod ingest {}
    #[doc = include_str!("../../../book/src/similarity.md")]
    mod similarity {}
    #[doc = include_str!("../../../book/src/dissimilarity.md")]
    mod dissimilarity {}
    #[doc = include_str!("../../../book/src/analytics.md")]
    mod analytics {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
