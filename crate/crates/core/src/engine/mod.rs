//! Five-stage pipeline: extract, partition, match, classify, cluster.
//!
//! Each stage maps over shards on a worker pool, writes its records to the
//! [`EntityStore`] and commits them before the next stage starts. Records are
//! sorted at every stage boundary, so outputs do not depend on the worker
//! count.

mod config;
mod pipeline;
mod pool;
mod store;
mod synth;

pub use config::{ClusterConfig, PipelineConfig};
pub use pipeline::{
    pair_tasks, run_documents, run_pipeline, score_task, MentionRecord, PairTask, PartitionRecord, RunSummary,
    StageReport, TaskScores, CLUSTERS_FILE, REVIEW_FILE, STORE_DIR, SUMMARY_FILE,
};
pub use pool::{map_shards, shards, shuffle_by_key, worker_for, Group, ShardRun};
pub use store::{
    write_atomic, Access, EntityStore, Manifest, RecordKind, SegmentEntry, StageEntry, StageWriter, StoreError,
    MANIFEST, SEGMENT_BYTES,
};
pub use synth::{synth_corpus, NoiseModel, SynthCorpus, SynthEntity};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::cluster::ClusterError;
use crate::corpus::IngestError;
use crate::extract::ExtractError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Extract,
    Partition,
    Match,
    Classify,
    Cluster,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Extract, Stage::Partition, Stage::Match, Stage::Classify, Stage::Cluster];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Partition => "partition",
            Stage::Match => "match",
            Stage::Classify => "classify",
            Stage::Cluster => "cluster",
        }
    }

    /// Position in the pipeline, from 1.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    /// Record kinds the stage writes.
    pub fn writes(self) -> &'static [RecordKind] {
        match self {
            Stage::Extract => &[RecordKind::Mentions, RecordKind::Stats],
            Stage::Partition => &[RecordKind::Partitions],
            Stage::Match => &[RecordKind::Scores],
            Stage::Classify => &[RecordKind::Decisions],
            Stage::Cluster => &[RecordKind::Clusters],
        }
    }

    /// Record kinds the stage may read: its predecessor's output, plus the
    /// shared corpus statistics and, for clustering, the mention table.
    pub fn reads(self) -> &'static [RecordKind] {
        match self {
            Stage::Extract => &[],
            Stage::Partition => &[RecordKind::Mentions],
            Stage::Match => &[RecordKind::Partitions, RecordKind::Stats],
            Stage::Classify => &[RecordKind::Scores],
            Stage::Cluster => &[RecordKind::Decisions, RecordKind::Mentions, RecordKind::Stats],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("injected fault before commit")]
    Injected,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: StageError,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl EngineError {
    /// [`EXIT_CONFIG`] for configuration problems, [`EXIT_DATA`] otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Config(_)
            | EngineError::Stage { source: StageError::Classify(ClassifyError::Config(_)), .. }
            | EngineError::Stage { source: StageError::Cluster(ClusterError::Config(_)), .. } => EXIT_CONFIG,
            _ => EXIT_DATA,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            EngineError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
