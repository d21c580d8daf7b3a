use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdcr::block::pair_count;
use cdcr::cluster::{read_clusters_jsonl, ClusterMode};
use cdcr::corpus::CorpusFormat;
use cdcr::engine::{
    run_pipeline, synth_corpus, EngineError, EntityStore, MentionRecord, NoiseModel, PartitionRecord, PipelineConfig,
    RecordKind, RunSummary, Stage, CLUSTERS_FILE, EXIT_CONFIG, EXIT_DATA, STORE_DIR,
};
use cdcr::eval::{evaluate, GoldMention, GoldStandard, MatchMode};
use cdcr::EvalReport;

#[derive(Parser)]
#[command(name = "cdcr", version, about = "Cross-document coreference over a document corpus")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Corpus layout: text, jsonl or markup.
    #[arg(long, global = true)]
    format: Option<CorpusFormat>,
    #[arg(long, global = true)]
    gazetteer: Option<PathBuf>,
    /// Classifier config file (TOML).
    #[arg(long, global = true)]
    classifier: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract mentions and corpus statistics.
    Extract,
    /// Partition mentions and score candidate pairs.
    Pairs {
        /// Print per-partition mention and pair counts.
        #[arg(long)]
        stats: bool,
        /// Pair one mention per distinct surface.
        #[arg(long)]
        dedupe_surfaces: bool,
        /// Block on major type only.
        #[arg(long)]
        merge_empty_subtype: bool,
    },
    /// Run through classification.
    Classify(Thresholds),
    /// Run through clustering.
    Cluster(ClusterArgs),
    /// Score clusters against a gold standard.
    Evaluate {
        /// Gold labels: mentionId<TAB>entityId.
        #[arg(long)]
        gold: PathBuf,
        /// Gold mention spans, for identification scores.
        #[arg(long)]
        gold_mentions: Option<PathBuf>,
        /// Cluster file; `<out>/clusters.jsonl` by default.
        #[arg(long)]
        clusters: Option<PathBuf>,
        /// Span matching: exact or overlap.
        #[arg(long = "match", default_value = "exact")]
        match_mode: MatchMode,
    },
    /// Run the full pipeline.
    Run {
        #[command(flatten)]
        thresholds: Thresholds,
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Write a synthetic corpus with gold labels.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        docs: usize,
        #[arg(long, default_value_t = 25)]
        entities: usize,
        #[arg(long, default_value_t = 0.0)]
        typo: f64,
        #[arg(long, default_value_t = 0.0)]
        abbreviation: f64,
        #[arg(long, default_value_t = 0.0)]
        initials: f64,
        #[arg(long, default_value_t = 0.0)]
        reorder: f64,
    },
}

#[derive(Args)]
struct Thresholds {
    #[arg(long)]
    lower: Option<f64>,
    #[arg(long)]
    upper: Option<f64>,
    /// Set both thresholds.
    #[arg(long, conflicts_with_all = ["lower", "upper"])]
    threshold: Option<f64>,
}

#[derive(Args)]
struct ClusterArgs {
    /// components, agglomerative or streaming.
    #[arg(long)]
    mode: Option<ClusterMode>,
    #[arg(long)]
    stop_threshold: Option<f64>,
    #[arg(long)]
    max_clusters: Option<usize>,
}

const MAX_SYNTH_ENTITIES: usize = 1000;

struct Failure {
    code: i32,
    message: String,
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure { code: e.exit_code(), message: e.to_string() }
    }
}

fn data(message: impl ToString) -> Failure {
    Failure { code: EXIT_DATA, message: message.to_string() }
}

fn config(g: &Global) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    if let Some(c) = &g.corpus {
        cfg.corpus = Some(c.clone());
    }
    if let Some(f) = g.format {
        cfg.format = f;
    }
    if let Some(z) = &g.gazetteer {
        cfg.gazetteer = Some(z.clone());
    }
    if let Some(c) = &g.classifier {
        cfg.classifier_config = Some(c.clone());
        cfg.load_classifier()?;
    }
    Ok(cfg)
}

impl Thresholds {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(t) = self.threshold {
            cfg.classifier.lower = t;
            cfg.classifier.upper = t;
        }
        if let Some(l) = self.lower {
            cfg.classifier.lower = l;
        }
        if let Some(u) = self.upper {
            cfg.classifier.upper = u;
        }
    }
}

impl ClusterArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(m) = self.mode {
            cfg.cluster.mode = m;
        }
        if self.stop_threshold.is_some() {
            cfg.cluster.stop_threshold = self.stop_threshold;
        }
        if self.max_clusters.is_some() {
            cfg.cluster.max_clusters = self.max_clusters;
        }
    }
}

fn run_to(mut cfg: PipelineConfig, stage: Stage) -> Result<RunSummary, Failure> {
    cfg.stop_after = Some(stage);
    let summary = run_pipeline(&cfg)?;
    print!("{}", summary.to_text());
    Ok(summary)
}

fn pair_stats(store: &Path) -> Result<(), Failure> {
    let store = EntityStore::open(store).map_err(data)?;
    let parts: Vec<PartitionRecord> = store.values(RecordKind::Partitions).map_err(data)?;
    println!("partition\tmentions\tdistinct\tpairs");
    for p in &parts {
        let pairs = pair_count(p.members.len()) + p.duplicates.len() as u64;
        println!("{}\t{}\t{}\t{}", p.key, p.size(), p.members.len(), pairs);
    }
    Ok(())
}

fn run_evaluate(
    cfg: &PipelineConfig,
    gold: &Path,
    gold_mentions: Option<&Path>,
    clusters: Option<&Path>,
    mode: MatchMode,
) -> Result<(), Failure> {
    let gold = GoldStandard::load(gold, gold_mentions).map_err(data)?;
    let path = clusters.map_or_else(|| cfg.out.join(CLUSTERS_FILE), Path::to_path_buf);
    let file = std::fs::File::open(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let clusters = read_clusters_jsonl(std::io::BufReader::new(file)).map_err(data)?;
    let mut system = Vec::new();
    if !gold.mentions.is_empty() {
        let store = EntityStore::open(&cfg.out.join(STORE_DIR)).map_err(data)?;
        let mentions: Vec<MentionRecord> = store.values(RecordKind::Mentions).map_err(data)?;
        system = mentions.iter().map(|r| GoldMention::from(&r.mention)).collect();
    }
    let report: EvalReport = evaluate(&clusters, &system, &gold, mode).map_err(data)?;
    print!("{}", report.to_text());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Extract => run_to(config(g)?, Stage::Extract).map(drop),
        Command::Pairs { stats, dedupe_surfaces, merge_empty_subtype } => {
            let mut cfg = config(g)?;
            cfg.block.dedupe_surfaces |= dedupe_surfaces;
            cfg.block.merge_empty_subtype |= merge_empty_subtype;
            let summary = run_to(cfg, Stage::Match)?;
            if stats {
                pair_stats(&summary.store)?;
            }
            Ok(())
        }
        Command::Classify(t) => {
            let mut cfg = config(g)?;
            t.apply(&mut cfg);
            run_to(cfg, Stage::Classify).map(drop)
        }
        Command::Cluster(c) => {
            let mut cfg = config(g)?;
            c.apply(&mut cfg);
            run_to(cfg, Stage::Cluster).map(drop)
        }
        Command::Run { thresholds, cluster } => {
            let mut cfg = config(g)?;
            thresholds.apply(&mut cfg);
            cluster.apply(&mut cfg);
            run_to(cfg, Stage::Cluster).map(drop)
        }
        Command::Evaluate { gold, gold_mentions, clusters, match_mode } => {
            let cfg = config(g)?;
            run_evaluate(&cfg, &gold, gold_mentions.as_deref(), clusters.as_deref(), match_mode)
        }
        Command::Synth { seed, docs, entities, typo, abbreviation, initials, reorder } => {
            let noise = NoiseModel { abbreviation, initials, reorder, typo };
            for (name, p) in [("typo", typo), ("abbreviation", abbreviation), ("initials", initials), ("reorder", reorder)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Failure { code: EXIT_CONFIG, message: format!("--{name} must lie in [0, 1]") });
                }
            }
            if !(1..=MAX_SYNTH_ENTITIES).contains(&entities) {
                let message = format!("--entities must lie in 1..={MAX_SYNTH_ENTITIES}");
                return Err(Failure { code: EXIT_CONFIG, message });
            }
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
            let corpus = synth_corpus(seed, docs, entities, &noise);
            corpus.write(&out).map_err(|e| data(format!("{}: {e}", out.display())))?;
            println!("documents: {}\nmentions: {}\nentities: {}\ndir: {}", docs, corpus.mention_count(), entities, out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
