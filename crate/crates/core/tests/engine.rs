use std::fs;

use cdcr::cluster::{read_clusters_jsonl, ClusterMode};
use cdcr::engine::{
    run_pipeline, synth_corpus, EngineError, EntityStore, MentionRecord, NoiseModel, PipelineConfig, RecordKind, Stage,
    StoreError, EXIT_CONFIG, EXIT_DATA, STORE_DIR,
};
use cdcr::eval::{evaluate, GoldMention, GoldStandard, MatchMode};
use cdcr::EvalReport;

fn write_synth(dir: &std::path::Path, seed: u64, noise: NoiseModel) -> PipelineConfig {
    synth_corpus(seed, 60, 15, &noise).write(dir).unwrap();
    PipelineConfig::load(&dir.join("pipeline.toml")).unwrap()
}

#[test]
fn files_on_disk_round_trip_through_evaluation() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_synth(d.path(), 21, NoiseModel::none());
    let summary = run_pipeline(&cfg).unwrap();
    let clusters = read_clusters_jsonl(&fs::read(summary.clusters.unwrap()).unwrap()[..]).unwrap();
    let gold = GoldStandard::load(&d.path().join("gold.tsv"), Some(&d.path().join("gold-mentions.tsv"))).unwrap();
    let store = EntityStore::open(&summary.store).unwrap();
    let mentions: Vec<MentionRecord> = store.values(RecordKind::Mentions).unwrap();
    let system: Vec<GoldMention> = mentions.iter().map(|r| GoldMention::from(&r.mention)).collect();
    let r: EvalReport = evaluate(&clusters, &system, &gold, MatchMode::ExactSpan).unwrap();
    assert_eq!(r.bcubed.f_measure, 1.0);
    assert_eq!(r.link.f_measure, 1.0);
    assert_eq!(r.identification.unwrap().f_measure, 1.0);
}

#[test]
fn corrupted_segment_is_named_on_reopen() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_synth(d.path(), 22, NoiseModel::none());
    let summary = run_pipeline(&cfg).unwrap();
    let store = EntityStore::open(&summary.store).unwrap();
    let file = store.manifest().stages[0].segments[0].file.clone();
    drop(store);
    let path = summary.store.join(&file);
    let mut bytes = fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    fs::write(&path, bytes).unwrap();
    match EntityStore::open(&summary.store) {
        Err(StoreError::Corrupt { segment, .. }) => assert_eq!(segment, file),
        other => panic!("expected corruption error, got {other:?}"),
    }
}

#[test]
fn injected_fault_keeps_earlier_stages() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = write_synth(d.path(), 23, NoiseModel { typo: 0.2, ..NoiseModel::none() });
    cfg.fault = Some(Stage::Classify);
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Classify));
    assert_eq!(err.exit_code(), EXIT_DATA);
    let store = EntityStore::open(&cfg.out.join(STORE_DIR)).unwrap();
    assert_eq!(store.stages(), vec!["extract", "partition", "match"]);
    assert!(!store.orphans().unwrap().is_empty());
    assert!(store.count(RecordKind::Scores) > 0);
    assert_eq!(store.count(RecordKind::Decisions), 0);
}

#[test]
fn missing_corpus_is_a_data_error_and_bad_config_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        corpus: Some(d.path().join("absent.jsonl")),
        out: d.path().join("out"),
        ..PipelineConfig::default()
    };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!((err.stage(), err.exit_code()), (Some(Stage::Extract), EXIT_DATA));
    let mut cfg = cfg;
    cfg.cluster.mode = ClusterMode::Streaming;
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, EngineError::Config(_)));
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn foreign_directory_is_not_cleared() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_synth(d.path(), 24, NoiseModel::none());
    let store = cfg.out.join(STORE_DIR);
    fs::create_dir_all(&store).unwrap();
    fs::write(store.join("keep.txt"), "mine").unwrap();
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert_eq!(fs::read_to_string(store.join("keep.txt")).unwrap(), "mine");
}

#[test]
fn streaming_mode_caps_cluster_count() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = write_synth(d.path(), 25, NoiseModel { typo: 0.1, abbreviation: 0.2, ..NoiseModel::none() });
    cfg.cluster.mode = ClusterMode::Streaming;
    cfg.cluster.max_clusters = Some(8);
    let summary = run_pipeline(&cfg).unwrap();
    let clusters = read_clusters_jsonl(&fs::read(summary.clusters.unwrap()).unwrap()[..]).unwrap();
    assert!(clusters.len() <= 8);
    let members: usize = clusters.iter().map(|c| c.members.len()).sum();
    assert_eq!(members as u64, summary.stages[0].output);
}
