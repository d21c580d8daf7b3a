use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::pool::{map_shards, shards, shuffle_by_key};
use super::store::{write_atomic, Access, EntityStore, RecordKind, StageWriter, MANIFEST};
use super::{EngineError, PipelineConfig, Stage, StageError};
use crate::block::{dedupe_surfaces, pair_count, CandidatePair, IndexPairs, Partition, PartitionKey};
use crate::classify::{
    decide_with, featurize, review_line, FeatureStats, FeatureVector, PairDecision, PairScore, PreparedFeatures,
    Scorer, Verdict,
};
use crate::cluster::{
    agglomerative_single_link, streaming_clusters, write_clusters_jsonl, ClusterMode,
    EntityCluster, MentionTable, UnionFind,
};
use crate::corpus::{load_corpus, Document};
use crate::extract::{extract_mentions, Gazetteer, Mention, MentionId};
use crate::Real;

pub const STORE_DIR: &str = "store";
pub const CLUSTERS_FILE: &str = "clusters.jsonl";
pub const REVIEW_FILE: &str = "review.tsv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// A mention with its features, as stored by the extract stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub mention: Mention,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub key: PartitionKey,
    /// Sorted by mention id.
    pub members: Vec<MentionRecord>,
    /// `(duplicate, representative)` surfaces folded away before pairing.
    pub duplicates: Vec<(MentionId, MentionId)>,
}

impl PartitionRecord {
    /// Mentions routed to the partition, duplicates included.
    pub fn size(&self) -> usize {
        self.members.len() + self.duplicates.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub input: u64,
    pub output: u64,
    pub wall: Duration,
    /// Items handled by each worker.
    pub per_worker: Vec<u64>,
    /// Stage-specific counts.
    pub detail: BTreeMap<String, u64>,
}

impl StageReport {
    fn new(stage: Stage, input: u64, output: u64, per_worker: Vec<u64>) -> Self {
        Self { stage, input, output, wall: Duration::ZERO, per_worker, detail: BTreeMap::new() }
    }

    fn with(mut self, key: &str, value: u64) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub documents: u64,
    pub stages: Vec<StageReport>,
    pub store: PathBuf,
    pub clusters: Option<PathBuf>,
    pub review: Option<PathBuf>,
    /// Store reads made by each stage.
    pub reads: Vec<Access>,
}

impl RunSummary {
    pub fn report(&self, stage: Stage) -> Option<&StageReport> {
        self.stages.iter().find(|r| r.stage == stage)
    }

    fn output_of(&self, stage: Stage) -> u64 {
        self.report(stage).map_or(0, |r| r.output)
    }

    /// `key: value` lines: documents, mentions, partitions, pairs and
    /// clusters, then every stage's counts and timing.
    pub fn to_text(&self) -> String {
        let partitions = self.report(Stage::Partition).and_then(|r| r.detail.get("partitions").copied());
        let mut s = format!("documents: {}\n", self.documents);
        s.push_str(&format!("mentions: {}\n", self.output_of(Stage::Extract)));
        s.push_str(&format!("partitions: {}\n", partitions.unwrap_or(0)));
        s.push_str(&format!("pairs: {}\n", self.output_of(Stage::Match)));
        s.push_str(&format!("clusters: {}\n", self.output_of(Stage::Cluster)));
        for r in &self.stages {
            let p = format!("stage.{}.{}", r.stage.number(), r.stage);
            s.push_str(&format!("{p}.input: {}\n{p}.output: {}\n", r.input, r.output));
            s.push_str(&format!("{p}.wall-ms: {:.3}\n", r.wall.as_secs_f64() * 1e3));
            let workers: Vec<String> = r.per_worker.iter().map(u64::to_string).collect();
            s.push_str(&format!("{p}.per-worker: {}\n", workers.join(",")));
            for (k, v) in &r.detail {
                s.push_str(&format!("{p}.{k}: {v}\n"));
            }
        }
        s
    }
}

/// A contiguous range of one partition's pair sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairTask {
    pub partition: usize,
    pub from: u64,
    pub to: u64,
}

impl PairTask {
    pub fn len(&self) -> u64 {
        self.to - self.from
    }

    pub fn is_empty(&self) -> bool {
        self.to == self.from
    }
}

/// Cut each partition's `C(n, 2)` pairs into tasks of at most `chunk`.
pub fn pair_tasks(sizes: &[usize], chunk: u64) -> Vec<PairTask> {
    let chunk = chunk.max(1);
    let mut tasks = Vec::new();
    for (partition, &n) in sizes.iter().enumerate() {
        let total = pair_count(n);
        let mut from = 0;
        while from < total {
            let to = (from + chunk).min(total);
            tasks.push(PairTask { partition, from, to });
            from = to;
        }
    }
    tasks
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskScores {
    pub scores: Vec<PairScore<Real>>,
    /// Pairs without any feature present on both sides.
    pub dropped: u64,
}

/// Score one task's pairs.
pub fn score_task(
    scorer: &Scorer<Real>,
    ids: &[&MentionId],
    prepared: &[PreparedFeatures],
    task: &PairTask,
) -> TaskScores {
    let mut out = TaskScores { scores: Vec::with_capacity(task.len() as usize), dropped: 0 };
    for (i, j) in IndexPairs::range(ids.len(), task.from, task.to) {
        let Some(pair) = CandidatePair::new(ids[i].clone(), ids[j].clone()) else { continue };
        match scorer.score_pair(pair, &prepared[i], &prepared[j]) {
            Ok(s) => out.scores.push(s),
            Err(_) => out.dropped += 1,
        }
    }
    out
}

fn io_err(stage: Stage, path: &Path) -> impl FnOnce(std::io::Error) -> EngineError + '_ {
    move |source| EngineError::Stage {
        stage,
        source: StageError::Io { path: path.display().to_string(), source },
    }
}

/// Load the configured corpus and gazetteer, then run every stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary, EngineError> {
    config.validate()?;
    let corpus = config.corpus.as_ref().ok_or_else(|| EngineError::Config("no corpus path given".into()))?;
    let tag = |source: StageError| EngineError::Stage { stage: Stage::Extract, source };
    let gazetteer = match &config.gazetteer {
        Some(p) => Gazetteer::load(p, config.extract.case_sensitive).map_err(|e| tag(e.into()))?,
        None => Gazetteer::new(config.extract.case_sensitive),
    };
    let (docs, _) = load_corpus(corpus, config.format).map_err(|e| tag(e.into()))?;
    run_documents(&docs, &gazetteer, config)
}

/// Run the stages over documents already in memory.
///
/// Writes the store under `out/store` (replacing an earlier store there),
/// `clusters.jsonl`, `review.tsv` and `summary.txt`.
pub fn run_documents(
    docs: &[Document],
    gazetteer: &Gazetteer,
    config: &PipelineConfig,
) -> Result<RunSummary, EngineError> {
    config.validate()?;
    let out = &config.out;
    fs::create_dir_all(out).map_err(|source| EngineError::Io { path: out.display().to_string(), source })?;
    let store_dir = out.join(STORE_DIR);
    clear_store(&store_dir)?;
    let mut run = Run { cfg: config, store: EntityStore::create(&store_dir)?, stages: Vec::new() };
    let mut summary = RunSummary {
        documents: docs.len() as u64,
        stages: Vec::new(),
        store: store_dir,
        clusters: None,
        review: None,
        reads: Vec::new(),
    };
    let stop = config.stop_after.unwrap_or(Stage::Cluster);
    'stages: for stage in Stage::ALL {
        match stage {
            Stage::Extract => run.stage(stage, |s, w| extract_stage(config, docs, gazetteer, s, w))?,
            Stage::Partition => run.stage(stage, |s, w| partition_stage(config, s, w))?,
            Stage::Match => run.stage(stage, |s, w| match_stage(config, s, w))?,
            Stage::Classify => {
                let mut review = String::new();
                run.stage(stage, |s, w| classify_stage(config, s, w, &mut review))?;
                let path = out.join(REVIEW_FILE);
                write_atomic(&path, review.as_bytes()).map_err(|e| EngineError::Stage { stage, source: e.into() })?;
                summary.review = Some(path);
            }
            Stage::Cluster => {
                let mut clusters = Vec::new();
                run.stage(stage, |s, w| cluster_stage(config, s, w, &mut clusters))?;
                let path = out.join(CLUSTERS_FILE);
                let mut bytes = Vec::new();
                write_clusters_jsonl(&mut bytes, &clusters).map_err(io_err(stage, &path))?;
                write_atomic(&path, &bytes).map_err(|e| EngineError::Stage { stage, source: e.into() })?;
                summary.clusters = Some(path);
            }
        }
        if stage == stop {
            break 'stages;
        }
    }
    summary.reads = run.store.access_log().into_iter().collect();
    summary.stages = run.stages;
    let path = out.join(SUMMARY_FILE);
    fs::write(&path, summary.to_text()).map_err(|source| EngineError::Io { path: path.display().to_string(), source })?;
    Ok(summary)
}

/// Remove a store left by an earlier run. Anything else at the path is kept
/// and reported.
fn clear_store(dir: &Path) -> Result<(), EngineError> {
    if !dir.exists() {
        return Ok(());
    }
    let io = |source| EngineError::Io { path: dir.display().to_string(), source };
    let empty = fs::read_dir(dir).map_err(io)?.next().is_none();
    if !empty && !dir.join(MANIFEST).is_file() {
        return Err(EngineError::Config(format!("{} exists and is not an entity store", dir.display())));
    }
    fs::remove_dir_all(dir).map_err(|source| EngineError::Io { path: dir.display().to_string(), source })
}

struct Run<'c> {
    cfg: &'c PipelineConfig,
    store: EntityStore,
    stages: Vec<StageReport>,
}

impl Run<'_> {
    fn stage<F>(&mut self, stage: Stage, body: F) -> Result<(), EngineError>
    where
        F: FnOnce(&EntityStore, &mut StageWriter) -> Result<StageReport, StageError>,
    {
        let tag = |source: StageError| EngineError::Stage { stage, source };
        let start = Instant::now();
        let mut writer = self.store.begin_stage(stage.as_str()).map_err(|e| tag(e.into()))?;
        let mut report = body(&self.store, &mut writer).map_err(tag)?;
        if self.cfg.fault == Some(stage) {
            return Err(tag(StageError::Injected));
        }
        self.store.commit(writer).map_err(|e| tag(e.into()))?;
        report.wall = start.elapsed();
        self.stages.push(report);
        Ok(())
    }
}

fn extract_stage(
    cfg: &PipelineConfig,
    docs: &[Document],
    gazetteer: &Gazetteer,
    _store: &EntityStore,
    w: &mut StageWriter,
) -> Result<StageReport, StageError> {
    let features = cfg.classifier.enabled();
    let tfidf = cfg.classifier.tfidf_features();
    let run = map_shards(
        &shards(docs, cfg.shard_size),
        cfg.workers,
        |shard| {
            let mut stats = FeatureStats::new(tfidf.iter().copied());
            let mut records = Vec::new();
            for doc in shard.iter() {
                for mention in extract_mentions(doc, gazetteer, &cfg.extract) {
                    let fv = featurize(&mention, Some(doc), &features);
                    stats.add(&doc.id, &fv);
                    records.push(MentionRecord { mention, features: fv });
                }
            }
            (records, stats)
        },
        |shard| shard.len(),
    );
    let mut stats = FeatureStats::new(tfidf.iter().copied());
    let mut records = Vec::new();
    for (r, s) in run.outputs {
        stats.merge(&s)?;
        records.extend(r);
    }
    records.sort_by(|a, b| a.mention.id.cmp(&b.mention.id));
    for r in &records {
        w.append(RecordKind::Mentions, &r.mention.id.to_string(), r)?;
    }
    w.append(RecordKind::Stats, "stats", &stats)?;
    Ok(StageReport::new(Stage::Extract, docs.len() as u64, records.len() as u64, run.per_worker))
}

fn partition_stage(cfg: &PipelineConfig, store: &EntityStore, w: &mut StageWriter) -> Result<StageReport, StageError> {
    let records: Vec<MentionRecord> = store.values(RecordKind::Mentions)?;
    let keyed: Vec<(MentionId, usize)> = records.iter().enumerate().map(|(i, r)| (r.mention.id.clone(), i)).collect();
    let groups = shuffle_by_key(
        keyed,
        |(_, i)| PartitionKey::of(&records[*i].mention.entity_type, &cfg.block),
        cfg.workers,
    );
    let mut per_worker = vec![0u64; cfg.workers];
    let (mut placed, mut pairs) = (0u64, 0u64);
    for g in &groups {
        per_worker[g.worker] += g.records.len() as u64;
        let mut members: Vec<MentionRecord> = g.records.iter().map(|(_, i)| records[*i].clone()).collect();
        let mut duplicates = Vec::new();
        if cfg.block.dedupe_surfaces {
            let surfaces: BTreeMap<&MentionId, &str> =
                members.iter().map(|m| (&m.mention.id, m.mention.surface.as_str())).collect();
            let partition = Partition { key: g.key.clone(), members: members.iter().map(|m| m.mention.id.clone()).collect() };
            let (kept, links) = dedupe_surfaces(&partition, |id| surfaces[id]);
            let kept: std::collections::BTreeSet<MentionId> = kept.members.into_iter().collect();
            duplicates = links;
            members.retain(|m| kept.contains(&m.mention.id));
        }
        let rec = PartitionRecord { key: g.key.clone(), members, duplicates };
        placed += rec.size() as u64;
        pairs += pair_count(rec.members.len()) + rec.duplicates.len() as u64;
        w.append(RecordKind::Partitions, &rec.key.to_string(), &rec)?;
    }
    Ok(StageReport::new(Stage::Partition, records.len() as u64, placed, per_worker)
        .with("partitions", groups.len() as u64)
        .with("candidate-pairs", pairs))
}

fn match_stage(cfg: &PipelineConfig, store: &EntityStore, w: &mut StageWriter) -> Result<StageReport, StageError> {
    let parts: Vec<PartitionRecord> = store.values(RecordKind::Partitions)?;
    let input: u64 = parts.iter().map(|p| p.size() as u64).sum();
    let mut per_worker = vec![0u64; cfg.workers];
    let (mut scored, mut dropped, mut links) = (0u64, 0u64, 0u64);
    if parts.iter().any(|p| p.members.len() >= 2) {
        let stats: FeatureStats = store.get(RecordKind::Stats, "stats")?;
        let scorer = Scorer::<Real>::new(&cfg.classifier, stats)?;
        let prepared: Vec<Vec<PreparedFeatures>> = map_shards(
            &parts,
            cfg.workers,
            |p| p.members.iter().map(|m| scorer.prepare(&m.features)).collect(),
            |p| p.members.len(),
        )
        .outputs;
        let ids: Vec<Vec<&MentionId>> = parts.iter().map(|p| p.members.iter().map(|m| &m.mention.id).collect()).collect();
        let sizes: Vec<usize> = parts.iter().map(|p| p.members.len()).collect();
        let tasks = pair_tasks(&sizes, cfg.pair_chunk);
        let run = map_shards(
            &tasks,
            cfg.workers,
            |t| score_task(&scorer, &ids[t.partition], &prepared[t.partition], t),
            |t| t.len() as usize,
        );
        per_worker = run.per_worker;
        for task in run.outputs {
            dropped += task.dropped;
            for s in &task.scores {
                w.append(RecordKind::Scores, &s.pair.to_string(), s)?;
            }
            scored += task.scores.len() as u64;
        }
    }
    for p in &parts {
        for (dup, rep) in &p.duplicates {
            let Some(pair) = CandidatePair::new(dup.clone(), rep.clone()) else { continue };
            let s = PairScore::<Real> { pair, per_feature: BTreeMap::new(), combined: 1.0 };
            w.append(RecordKind::Scores, &s.pair.to_string(), &s)?;
            links += 1;
        }
    }
    Ok(StageReport::new(Stage::Match, input, scored + links, per_worker)
        .with("dropped", dropped)
        .with("surface-links", links))
}

fn classify_stage(
    cfg: &PipelineConfig,
    store: &EntityStore,
    w: &mut StageWriter,
    review: &mut String,
) -> Result<StageReport, StageError> {
    let scores: Vec<PairScore<Real>> = store.values(RecordKind::Scores)?;
    let thresholds = cfg.classifier.thresholds()?;
    let chunk = usize::try_from(cfg.pair_chunk).unwrap_or(usize::MAX);
    let run = map_shards(
        &shards(&scores, chunk),
        cfg.workers,
        |s| s.iter().map(|p| decide_with(p, thresholds)).collect::<Vec<_>>(),
        |s| s.len(),
    );
    let mut counts: BTreeMap<Verdict, u64> = BTreeMap::new();
    let mut possible = Vec::new();
    for (d, s) in run.outputs.iter().flatten().zip(&scores) {
        *counts.entry(d.verdict).or_default() += 1;
        if d.verdict == Verdict::Possible {
            possible.push((&s.pair, review_line(s, d.verdict)));
        }
        w.append(RecordKind::Decisions, &d.pair.to_string(), d)?;
    }
    possible.sort();
    for (_, line) in possible {
        review.push_str(&line);
        review.push('\n');
    }
    let mut report = StageReport::new(Stage::Classify, scores.len() as u64, scores.len() as u64, run.per_worker);
    for v in [Verdict::Coreferent, Verdict::Possible, Verdict::NonCoreferent] {
        report = report.with(v.as_str(), counts.get(&v).copied().unwrap_or(0));
    }
    Ok(report)
}

fn cluster_stage(
    cfg: &PipelineConfig,
    store: &EntityStore,
    w: &mut StageWriter,
    out: &mut Vec<EntityCluster>,
) -> Result<StageReport, StageError> {
    let decisions: Vec<PairDecision<Real>> = store.values(RecordKind::Decisions)?;
    let mentions: Vec<MentionRecord> = store.values(RecordKind::Mentions)?;
    let table = MentionTable::from_mentions(mentions.iter().map(|r| &r.mention));
    let chunk = usize::try_from(cfg.pair_chunk).unwrap_or(usize::MAX);
    let mut per_worker = vec![decisions.len() as u64];
    let clusters = match cfg.cluster.mode {
        ClusterMode::Components => {
            let run = map_shards(
                &shards(&decisions, chunk),
                cfg.workers,
                |s| {
                    let mut uf = UnionFind::new(table.len());
                    for d in s.iter().filter(|d| d.verdict == Verdict::Coreferent) {
                        uf.union(table.index_of(&d.pair.a)?, table.index_of(&d.pair.b)?);
                    }
                    Ok::<_, crate::cluster::ClusterError>(uf)
                },
                |s| s.len(),
            );
            per_worker = run.per_worker;
            let mut uf = UnionFind::new(table.len());
            for local in run.outputs {
                uf.absorb(&local?);
            }
            table.clusters(uf.groups())
        }
        ClusterMode::Agglomerative => {
            let scores: Vec<PairScore<Real>> = decisions
                .iter()
                .map(|d| PairScore { pair: d.pair.clone(), per_feature: BTreeMap::new(), combined: d.combined })
                .collect();
            let stop = cfg.cluster.stop_threshold.unwrap_or(cfg.classifier.upper);
            agglomerative_single_link(&scores, &table, stop)?.0
        }
        ClusterMode::Streaming => {
            let stats: FeatureStats = store.get(RecordKind::Stats, "stats")?;
            let scorer = Scorer::<Real>::new(&cfg.classifier, stats)?;
            let by_id: BTreeMap<&MentionId, &MentionRecord> = mentions.iter().map(|r| (&r.mention.id, r)).collect();
            let rows: Vec<(PartitionKey, PreparedFeatures)> = table
                .ids()
                .iter()
                .map(|id| {
                    let r = by_id[id];
                    (PartitionKey::of(&r.mention.entity_type, &cfg.block), scorer.prepare(&r.features))
                })
                .collect();
            let sim = |a: usize, b: usize| {
                if rows[a].0 != rows[b].0 {
                    return 0.0;
                }
                scorer.score(&rows[a].1, &rows[b].1).map_or(0.0, |(_, s)| s)
            };
            let k = cfg.cluster.max_clusters.expect("validated");
            streaming_clusters(&table, sim, k, cfg.cluster.radius_limit)?
        }
    };
    for c in &clusters {
        w.append(RecordKind::Clusters, &c.id, c)?;
    }
    let coreferent = decisions.iter().filter(|d| d.verdict == Verdict::Coreferent).count() as u64;
    let report = StageReport::new(Stage::Cluster, decisions.len() as u64, clusters.len() as u64, per_worker)
        .with("mentions", table.len() as u64)
        .with("coreferent", coreferent);
    *out = clusters;
    Ok(report)
}
