//! Sieve-and-swap curation of instructional cooking videos.
//!
//! A noisy corpus of videos with timestamped ASR transcripts is paired with a
//! text-only recipe corpus, sieved by title and transcript overlap, and then
//! each surviving transcript segment is swapped for its nearest human-written
//! recipe step while the segment timestamps are kept.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod embedindex;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod segmath;
pub mod sieve;
pub mod swap;
pub mod textnorm;

pub use corpus::{AsrSegment, IngestMode, Recipe, StepRef, VideoRecord};
pub use embedindex::{EmbeddingMatrix, NeighborHit};
pub use error::{CurateError, Result};
pub use sieve::{PairScore, SplitTag};
pub use swap::{CuratedVideo, SwapSegment};
pub use textnorm::{Stoplist, TokenSet};

/// Double-precision temporal interval.
pub type Interval = segmath::Interval<f64>;
/// Single-precision temporal interval.
pub type Interval32 = segmath::Interval<f32>;
/// Double-precision varifocal loss parameters.
pub type VflParams = segmath::VflParams<f64>;
/// Single-precision varifocal loss parameters.
pub type VflParams32 = segmath::VflParams<f32>;
