//! Cross-document coreference resolution.
//!
//! Mentions are extracted from a document collection, blocked by entity
//! type, scored pairwise with configurable similarity features, classified
//! with two thresholds and grouped into entity clusters. [`engine`] runs the
//! whole flow as a sharded five-stage pipeline over an on-disk store.
//!
//! Scoring and evaluation are generic over [`Scalar`] (`f32` or `f64`);
//! the pipeline uses [`Real`].

pub mod block;
pub mod classify;
pub mod cluster;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod extract;
pub mod scalar;
pub mod simfns;

pub use scalar::Scalar;

/// Scalar used by the pipeline.
pub type Real = f64;
pub type PairScore = classify::PairScore<Real>;
pub type PairDecision = classify::PairDecision<Real>;
pub type Scorer = classify::Scorer<Real>;
pub type MetricReport = eval::MetricReport<Real>;
pub type EvalReport = eval::EvalReport<Real>;
