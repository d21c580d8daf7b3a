//! Append-only record store with a checksummed manifest.
//!
//! Records are appended to segment files while a stage runs. Committing the
//! stage syncs its segments and atomically replaces `manifest.json`, so
//! segments left behind by an aborted stage are never referenced.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;
/// Segments roll over past this size.
pub const SEGMENT_BYTES: u64 = 64 << 20;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("segment {segment} is corrupt: {reason}")]
    Corrupt { segment: String, reason: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("no {kind} record with key `{key}`")]
    NotFound { kind: RecordKind, key: String },
    #[error("stage `{0}` already committed")]
    StageExists(String),
    #[error("record encoding: {0}")]
    Encode(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Mentions,
    Stats,
    Partitions,
    Scores,
    Decisions,
    Clusters,
}

impl RecordKind {
    pub const ALL: [RecordKind; 6] = [
        RecordKind::Mentions,
        RecordKind::Stats,
        RecordKind::Partitions,
        RecordKind::Scores,
        RecordKind::Decisions,
        RecordKind::Clusters,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Mentions => "mentions",
            RecordKind::Stats => "stats",
            RecordKind::Partitions => "partitions",
            RecordKind::Scores => "scores",
            RecordKind::Decisions => "decisions",
            RecordKind::Clusters => "clusters",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown record kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub file: String,
    pub kind: RecordKind,
    pub records: u64,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageEntry {
    pub name: String,
    pub segments: Vec<SegmentEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub stages: Vec<StageEntry>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self { version: MANIFEST_VERSION, stages: Vec::new() }
    }
}

/// A read of `kind` made while `stage` was the active stage.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Access {
    pub stage: String,
    pub kind: RecordKind,
}

/// Record offsets of one kind, built on first keyed read.
#[derive(Debug, Default)]
struct KindIndex {
    /// Key to (segment position in `segments_of`, byte offset of the value).
    by_key: HashMap<String, (usize, u64, u32)>,
}

#[derive(Debug)]
pub struct EntityStore {
    dir: PathBuf,
    manifest: Manifest,
    indexes: Mutex<HashMap<RecordKind, Arc<KindIndex>>>,
    active: Mutex<Option<String>>,
    trace: Mutex<BTreeSet<Access>>,
}

impl EntityStore {
    /// Start an empty store in `dir`, which must be absent or empty.
    pub fn create(dir: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        if fs::read_dir(dir).map_err(io_err(dir))?.next().is_some() {
            return Err(StoreError::Manifest(format!("{} is not empty", dir.display())));
        }
        let store = Self::with_manifest(dir, Manifest::default());
        store.write_manifest()?;
        Ok(store)
    }

    /// Open an existing store, verifying every committed segment.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| StoreError::Manifest(e.to_string()))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(StoreError::Manifest(format!("unsupported version {}", manifest.version)));
        }
        let store = Self::with_manifest(dir, manifest);
        store.verify()?;
        Ok(store)
    }

    fn with_manifest(dir: &Path, manifest: Manifest) -> Self {
        Self {
            dir: dir.to_path_buf(),
            manifest,
            indexes: Mutex::new(HashMap::new()),
            active: Mutex::new(None),
            trace: Mutex::new(BTreeSet::new()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Names of committed stages, in commit order.
    pub fn stages(&self) -> Vec<&str> {
        self.manifest.stages.iter().map(|s| s.name.as_str()).collect()
    }

    /// Stage that wrote `kind`, if any.
    pub fn writer_of(&self, kind: RecordKind) -> Option<&str> {
        self.manifest.stages.iter().find(|s| s.segments.iter().any(|g| g.kind == kind)).map(|s| s.name.as_str())
    }

    /// Segment files present on disk but absent from the manifest.
    pub fn orphans(&self) -> Result<Vec<String>, StoreError> {
        let known: BTreeSet<&str> =
            self.manifest.stages.iter().flat_map(|s| s.segments.iter().map(|g| g.file.as_str())).collect();
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let name = entry.map_err(io_err(&self.dir))?.file_name().to_string_lossy().into_owned();
            if name.ends_with(".seg") && !known.contains(name.as_str()) {
                out.push(name);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Recompute the checksum of every committed segment.
    pub fn verify(&self) -> Result<(), StoreError> {
        for seg in self.manifest.stages.iter().flat_map(|s| &s.segments) {
            let path = self.dir.join(&seg.file);
            let corrupt = |reason: String| StoreError::Corrupt { segment: seg.file.clone(), reason };
            let bytes = fs::read(&path).map_err(|e| corrupt(e.to_string()))?;
            if bytes.len() as u64 != seg.bytes {
                return Err(corrupt(format!("expected {} bytes, found {}", seg.bytes, bytes.len())));
            }
            if hex::encode(Sha256::digest(&bytes)) != seg.sha256 {
                return Err(corrupt("checksum mismatch".into()));
            }
        }
        Ok(())
    }

    /// Begin writing a stage. Reads made until the next commit are traced
    /// under `name`.
    pub fn begin_stage(&mut self, name: &str) -> Result<StageWriter, StoreError> {
        if self.manifest.stages.iter().any(|s| s.name == name) {
            return Err(StoreError::StageExists(name.to_string()));
        }
        *self.active.lock().expect("active lock") = Some(name.to_string());
        Ok(StageWriter {
            dir: self.dir.clone(),
            prefix: format!("{:02}-{name}", self.manifest.stages.len() + 1),
            name: name.to_string(),
            open: BTreeMap::new(),
            done: Vec::new(),
        })
    }

    /// Seal the stage's segments and publish them in the manifest.
    pub fn commit(&mut self, writer: StageWriter) -> Result<&StageEntry, StoreError> {
        let entry = writer.finish()?;
        self.manifest.stages.push(entry);
        self.write_manifest()?;
        *self.active.lock().expect("active lock") = None;
        Ok(self.manifest.stages.last().expect("just pushed"))
    }

    fn write_manifest(&self) -> Result<(), StoreError> {
        let path = self.dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| StoreError::Manifest(e.to_string()))?;
        write_atomic(&path, text.as_bytes())
    }

    fn segments_of(&self, kind: RecordKind) -> Vec<&SegmentEntry> {
        self.manifest.stages.iter().flat_map(|s| &s.segments).filter(|g| g.kind == kind).collect()
    }

    fn note_read(&self, kind: RecordKind) {
        if let Some(stage) = self.active.lock().expect("active lock").clone() {
            self.trace.lock().expect("trace lock").insert(Access { stage, kind });
        }
    }

    /// Reads so far, by active stage.
    pub fn access_log(&self) -> BTreeSet<Access> {
        self.trace.lock().expect("trace lock").clone()
    }

    fn read_segment(&self, seg: &SegmentEntry) -> Result<Vec<u8>, StoreError> {
        let path = self.dir.join(&seg.file);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        if bytes.len() as u64 != seg.bytes || hex::encode(Sha256::digest(&bytes)) != seg.sha256 {
            return Err(StoreError::Corrupt { segment: seg.file.clone(), reason: "checksum mismatch".into() });
        }
        Ok(bytes)
    }

    /// Every record of `kind` as raw `(key, value bytes)`, in write order.
    pub fn scan_raw(&self, kind: RecordKind) -> Result<Vec<(String, Vec<u8>)>, StoreError> {
        self.note_read(kind);
        let mut out = Vec::new();
        for seg in self.segments_of(kind) {
            let bytes = self.read_segment(seg)?;
            for rec in frames(&bytes, &seg.file) {
                let (key, _, value) = rec?;
                out.push((key.to_string(), value.to_vec()));
            }
        }
        Ok(out)
    }

    pub fn scan<V: DeserializeOwned>(&self, kind: RecordKind) -> Result<Vec<(String, V)>, StoreError> {
        self.scan_raw(kind)?.into_iter().map(|(k, v)| Ok((k, decode(&v)?))).collect()
    }

    pub fn values<V: DeserializeOwned>(&self, kind: RecordKind) -> Result<Vec<V>, StoreError> {
        Ok(self.scan(kind)?.into_iter().map(|(_, v)| v).collect())
    }

    pub fn count(&self, kind: RecordKind) -> u64 {
        self.segments_of(kind).iter().map(|g| g.records).sum()
    }

    fn index(&self, kind: RecordKind) -> Result<Arc<KindIndex>, StoreError> {
        if let Some(ix) = self.indexes.lock().expect("index lock").get(&kind) {
            return Ok(ix.clone());
        }
        let mut ix = KindIndex::default();
        for (n, seg) in self.segments_of(kind).into_iter().enumerate() {
            let bytes = self.read_segment(seg)?;
            for rec in frames(&bytes, &seg.file) {
                let (key, offset, value) = rec?;
                ix.by_key.insert(key.to_string(), (n, offset, value.len() as u32));
            }
        }
        let ix = Arc::new(ix);
        self.indexes.lock().expect("index lock").insert(kind, ix.clone());
        Ok(ix)
    }

    /// The latest record of `kind` under `key`.
    pub fn get_raw(&self, kind: RecordKind, key: &str) -> Result<Vec<u8>, StoreError> {
        self.note_read(kind);
        let ix = self.index(kind)?;
        let &(n, offset, len) =
            ix.by_key.get(key).ok_or_else(|| StoreError::NotFound { kind, key: key.to_string() })?;
        let seg = self.segments_of(kind)[n];
        let path = self.dir.join(&seg.file);
        let mut f = File::open(&path).map_err(io_err(&path))?;
        use std::io::Seek;
        f.seek(std::io::SeekFrom::Start(offset)).map_err(io_err(&path))?;
        let mut buf = vec![0; len as usize];
        f.read_exact(&mut buf).map_err(io_err(&path))?;
        Ok(buf)
    }

    pub fn get<V: DeserializeOwned>(&self, kind: RecordKind, key: &str) -> Result<V, StoreError> {
        decode(&self.get_raw(kind, key)?)
    }
}

fn decode<V: DeserializeOwned>(bytes: &[u8]) -> Result<V, StoreError> {
    bincode::deserialize(bytes).map_err(|e| StoreError::Encode(e.to_string()))
}

/// `(key, value offset, value)` frames: `u32` key length, key, `u32` value
/// length, value; lengths little-endian.
fn frames<'a>(bytes: &'a [u8], segment: &str) -> Vec<Result<(&'a str, u64, &'a [u8]), StoreError>> {
    let corrupt = |reason: &str| StoreError::Corrupt { segment: segment.to_string(), reason: reason.to_string() };
    let take = |pos: &mut usize, n: usize| -> Result<&'a [u8], StoreError> {
        let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| corrupt("truncated record"))?;
        let out = &bytes[*pos..end];
        *pos = end;
        Ok(out)
    };
    let len = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
    let mut out = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let frame = (|| {
            let klen = len(take(&mut pos, 4)?);
            let key = std::str::from_utf8(take(&mut pos, klen)?).map_err(|_| corrupt("key is not UTF-8"))?;
            let vlen = len(take(&mut pos, 4)?);
            let offset = pos as u64;
            Ok((key, offset, take(&mut pos, vlen)?))
        })();
        let failed = frame.is_err();
        out.push(frame);
        if failed {
            break;
        }
    }
    out
}

struct OpenSegment {
    file: String,
    out: BufWriter<File>,
    hasher: Sha256,
    records: u64,
    bytes: u64,
}

/// Appends for one stage. Dropping it without a commit leaves orphan
/// segments that readers ignore.
pub struct StageWriter {
    dir: PathBuf,
    prefix: String,
    name: String,
    open: BTreeMap<RecordKind, OpenSegment>,
    done: Vec<SegmentEntry>,
}

impl StageWriter {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn append<V: Serialize>(&mut self, kind: RecordKind, key: &str, value: &V) -> Result<(), StoreError> {
        let bytes = bincode::serialize(value).map_err(|e| StoreError::Encode(e.to_string()))?;
        self.append_raw(kind, key, &bytes)
    }

    pub fn append_raw(&mut self, kind: RecordKind, key: &str, value: &[u8]) -> Result<(), StoreError> {
        let too_big = |what: &str| StoreError::Encode(format!("{what} longer than 4 GiB"));
        let klen = u32::try_from(key.len()).map_err(|_| too_big("key"))?;
        let vlen = u32::try_from(value.len()).map_err(|_| too_big("value"))?;
        let full = self.open.get(&kind).is_some_and(|s| s.bytes >= SEGMENT_BYTES);
        if full {
            let seg = self.open.remove(&kind).expect("checked");
            self.done.push(seal(&self.dir, seg, kind)?);
        }
        if !self.open.contains_key(&kind) {
            let n = self.done.iter().filter(|g| g.kind == kind).count();
            let file = format!("{}-{kind}-{n:04}.seg", self.prefix);
            let path = self.dir.join(&file);
            let f = File::create(&path).map_err(io_err(&path))?;
            self.open.insert(kind, OpenSegment { file, out: BufWriter::new(f), hasher: Sha256::new(), records: 0, bytes: 0 });
        }
        let seg = self.open.get_mut(&kind).expect("opened above");
        let path = self.dir.join(&seg.file);
        for part in [&klen.to_le_bytes()[..], key.as_bytes(), &vlen.to_le_bytes()[..], value] {
            seg.out.write_all(part).map_err(io_err(&path))?;
            seg.hasher.update(part);
            seg.bytes += part.len() as u64;
        }
        seg.records += 1;
        Ok(())
    }

    fn finish(mut self) -> Result<StageEntry, StoreError> {
        for (kind, seg) in std::mem::take(&mut self.open) {
            let entry = seal(&self.dir, seg, kind)?;
            self.done.push(entry);
        }
        self.done.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(StageEntry { name: self.name, segments: self.done })
    }
}

fn seal(dir: &Path, seg: OpenSegment, kind: RecordKind) -> Result<SegmentEntry, StoreError> {
    let path = dir.join(&seg.file);
    let f = seg.out.into_inner().map_err(|e| StoreError::Io { path: path.display().to_string(), source: e.into_error() })?;
    f.sync_all().map_err(io_err(&path))?;
    Ok(SegmentEntry {
        file: seg.file,
        kind,
        records: seg.records,
        bytes: seg.bytes,
        sha256: hex::encode(seg.hasher.finalize()),
    })
}

/// Write through a temporary file and rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))?;
    if let Some(parent) = path.parent() {
        if let Ok(d) = File::open(parent) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}
