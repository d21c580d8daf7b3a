use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EngineError, Stage};
use crate::block::BlockConfig;
use crate::classify::ClassifierConfig;
use crate::cluster::ClusterMode;
use crate::corpus::CorpusFormat;
use crate::extract::ExtractConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClusterConfig {
    pub mode: ClusterMode,
    /// Agglomerative stop threshold; the upper classification threshold
    /// when unset.
    pub stop_threshold: Option<f64>,
    /// Streaming cluster bound K. Required in streaming mode.
    pub max_clusters: Option<usize>,
    /// Streaming starting radius.
    pub radius_limit: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { mode: ClusterMode::Components, stop_threshold: None, max_clusters: None, radius_limit: 0.3 }
    }
}

/// Everything a pipeline run needs. Loaded from TOML; all keys optional
/// except the corpus path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub format: CorpusFormat,
    pub gazetteer: Option<PathBuf>,
    /// Classifier TOML file; overrides the inline `[classifier]` table.
    pub classifier_config: Option<PathBuf>,
    pub classifier: ClassifierConfig,
    pub extract: ExtractConfig,
    pub block: BlockConfig,
    pub cluster: ClusterConfig,
    pub workers: usize,
    /// Documents per extraction shard and records per later shard.
    pub shard_size: usize,
    /// Candidate pairs per scoring task.
    pub pair_chunk: u64,
    pub out: PathBuf,
    /// Seed for synthetic corpora.
    pub seed: u64,
    /// Last stage to run.
    pub stop_after: Option<Stage>,
    /// Fail the given stage after its records are written but before the
    /// commit, leaving orphan segments behind.
    #[serde(skip)]
    pub fault: Option<Stage>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            format: CorpusFormat::Jsonl,
            gazetteer: None,
            classifier_config: None,
            classifier: ClassifierConfig::default(),
            extract: ExtractConfig::default(),
            block: BlockConfig::default(),
            cluster: ClusterConfig::default(),
            workers: 1,
            shard_size: 64,
            pair_chunk: 4096,
            out: PathBuf::from("out"),
            seed: 0,
            stop_after: None,
            fault: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, EngineError> {
        toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))
    }

    /// Parse a config file. Relative paths inside it resolve against the
    /// file's directory, and a referenced classifier file is loaded.
    pub fn load(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.corpus);
        rebase(&mut cfg.gazetteer);
        rebase(&mut cfg.classifier_config);
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        cfg.load_classifier()?;
        Ok(cfg)
    }

    /// Replace the inline classifier with the referenced file, if any.
    pub fn load_classifier(&mut self) -> Result<(), EngineError> {
        if let Some(p) = &self.classifier_config {
            let text = std::fs::read_to_string(p).map_err(|e| EngineError::Config(format!("{}: {e}", p.display())))?;
            self.classifier = ClassifierConfig::from_toml(&text).map_err(|e| EngineError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if self.workers < 1 {
            return bad("workers must be at least 1");
        }
        if self.shard_size < 1 {
            return bad("shard-size must be at least 1");
        }
        if self.pair_chunk < 1 {
            return bad("pair-chunk must be at least 1");
        }
        self.classifier.validate().map_err(|e| EngineError::Config(e.to_string()))?;
        let c = &self.cluster;
        if c.mode == ClusterMode::Streaming && c.max_clusters.is_none() {
            return bad("streaming clustering needs cluster.max-clusters");
        }
        if c.max_clusters == Some(0) {
            return bad("cluster.max-clusters must be at least 1");
        }
        if !(0.0..=1.0).contains(&c.radius_limit) {
            return bad("cluster.radius-limit must lie in [0, 1]");
        }
        if c.stop_threshold.is_some_and(|t| !(0.0..=1.0).contains(&t)) {
            return bad("cluster.stop-threshold must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn parse_and_round_trip() {
        let cfg = PipelineConfig::from_toml(
            "corpus = \"c.jsonl\"\nworkers = 4\nshard-size = 8\n[cluster]\nmode = \"streaming\"\nmax-clusters = 50\n[classifier]\nlower = 0.4\nupper = 0.6\n[[classifier.features]]\nfeature = \"surface\"\n",
        )
        .unwrap();
        assert_eq!(cfg.workers, 4);
        assert_eq!(cfg.cluster.max_clusters, Some(50));
        assert_eq!(cfg.classifier.lower, 0.4);
        cfg.validate().unwrap();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "workers = 0",
            "shard-size = 0",
            "[cluster]\nmode = \"streaming\"",
            "[cluster]\nradius-limit = 2.0",
            "[classifier]\nlower = 0.7\nupper = 0.2",
        ] {
            let cfg = PipelineConfig::from_toml(text).unwrap();
            assert!(matches!(cfg.validate(), Err(EngineError::Config(_))), "{text}");
        }
        assert!(PipelineConfig::from_toml("wrokers = 2").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let d = tempfile::tempdir().unwrap();
        std::fs::write(d.path().join("cls.toml"), "[[features]]\nfeature = \"surface\"\n").unwrap();
        let path = d.path().join("pipeline.toml");
        std::fs::write(&path, "corpus = \"corpus.jsonl\"\nclassifier-config = \"cls.toml\"\n").unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.corpus.unwrap(), d.path().join("corpus.jsonl"));
        assert_eq!(cfg.classifier.features.len(), 1);
        assert_eq!(cfg.out, d.path().join("out"));
    }
}
