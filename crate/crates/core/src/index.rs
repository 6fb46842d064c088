//! Persistent store of per-video bag-of-attributes vectors.
//!
//! `BOAS` layout, all integers little-endian:
//!
//! ```text
//! "BOAS" | version u32 = 1 | dim u32
//!        | coding u8 | pooling u8 | norm u8 | reserved u8 = 0
//!        | tool_version (u32 len + UTF-8) | created_unix u64
//!        | entry_count u32
//!        | entry_count * (id (u32 len + UTF-8) | dim f32)   sorted by id
//! ```
//!
//! Vectors are kept as `f32`, both on disk and in memory, and widened to
//! `f64` on access. Given the same inputs a build produces the same bytes.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::codec::{put_string, ByteReader};
use crate::error::{Error, Result};
use crate::ingest::{read_frame_scores, DatasetManifest, FrameScoreFile, ScoreEncoding};
use crate::kernel::{encode_video, BoaVector, CodingMode, FrameAttributeMatrix, NormMode, PoolingMode, Provenance};

pub const BOAS_MAGIC: &[u8; 4] = b"BOAS";
pub const BOAS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreMetadata {
    pub tool_version: String,
    /// Seconds since the Unix epoch. Callers supply it so builds stay
    /// reproducible.
    pub created_unix: u64,
}

impl Default for StoreMetadata {
    fn default() -> Self {
        StoreMetadata {
            tool_version: concat!("boa-core ", env!("CARGO_PKG_VERSION")).to_owned(),
            created_unix: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoaStore {
    dim: usize,
    provenance: Provenance,
    metadata: StoreMetadata,
    entries: BTreeMap<String, Vec<f32>>,
}

impl BoaStore {
    pub fn new(dim: usize, provenance: Provenance, metadata: StoreMetadata) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("store dim must be >= 1"));
        }
        Ok(BoaStore {
            dim,
            provenance,
            metadata,
            entries: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn metadata(&self) -> &StoreMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, video_id: &str) -> bool {
        self.entries.contains_key(video_id)
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Raw stored entry.
    pub fn raw(&self, video_id: &str) -> Option<&[f32]> {
        self.entries.get(video_id).map(Vec::as_slice)
    }

    pub fn get(&self, video_id: &str) -> Result<BoaVector> {
        self.raw(video_id)
            .map(|v| BoaVector::from_stored(v, self.provenance))
            .ok_or_else(|| Error::NotFound(format!("video `{video_id}` is not in the store")))
    }

    /// Adds a vector, narrowing it to `f32`. Used while building; a store
    /// handed out by [`build_store`] or [`load_store`] is not mutated.
    pub fn insert(&mut self, video_id: impl Into<String>, vector: &BoaVector) -> Result<()> {
        let video_id = video_id.into();
        if vector.provenance() != self.provenance {
            return Err(Error::ProvenanceMismatch {
                expected: self.provenance,
                found: vector.provenance(),
            });
        }
        if vector.dim() != self.dim {
            return Err(Error::Build {
                video_id,
                message: format!("vector has dim {}, store has {}", vector.dim(), self.dim),
            });
        }
        if self.entries.contains_key(&video_id) {
            return Err(Error::invalid(format!("duplicate video id `{video_id}`")));
        }
        let narrowed = vector.values().iter().map(|&v| v as f32).collect();
        self.entries.insert(video_id, narrowed);
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.entries.len() * (16 + 4 * self.dim));
        out.extend_from_slice(BOAS_MAGIC);
        out.extend_from_slice(&BOAS_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&[
            self.provenance.coding.code(),
            self.provenance.pooling.code(),
            self.provenance.norm.code(),
            0,
        ]);
        put_string(&mut out, &self.metadata.tool_version);
        out.extend_from_slice(&self.metadata.created_unix.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (id, values) in &self.entries {
            put_string(&mut out, id);
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], source: &str) -> Result<Self> {
        let mut r = ByteReader::new(bytes, source);
        let magic = r.take(4, "magic")?;
        if magic != BOAS_MAGIC {
            return Err(Error::format(
                source,
                "byte 0",
                format!("bad magic {:?}: expected \"BOAS\"", String::from_utf8_lossy(magic)),
            ));
        }
        let version = r.u32("version")?;
        if version != BOAS_VERSION {
            return Err(Error::format(source, "byte 4", format!("unsupported BOAS version {version}")));
        }
        let dim = r.u32("dim")? as usize;
        if dim == 0 {
            return Err(Error::format(source, "byte 8", "dim must be positive"));
        }
        let bad_code = |at: usize, what: &str, code: u8| {
            Error::format(source, format!("byte {at}"), format!("unknown {what} code {code}"))
        };
        let coding = r.u8("coding")?;
        let coding = CodingMode::from_code(coding).ok_or_else(|| bad_code(12, "coding", coding))?;
        let pooling = r.u8("pooling")?;
        let pooling = PoolingMode::from_code(pooling).ok_or_else(|| bad_code(13, "pooling", pooling))?;
        let norm = r.u8("norm")?;
        let norm = NormMode::from_code(norm).ok_or_else(|| bad_code(14, "norm", norm))?;
        let reserved = r.u8("reserved")?;
        if reserved != 0 {
            return Err(bad_code(15, "reserved", reserved));
        }
        let tool_version = r.string("tool version")?.to_owned();
        let created_unix = r.u64("creation time")?;
        let count = r.u32("entry count")? as usize;

        let mut store = BoaStore::new(
            dim,
            Provenance::new(coding, pooling, norm),
            StoreMetadata {
                tool_version,
                created_unix,
            },
        )?;
        let mut previous: Option<&str> = None;
        for _ in 0..count {
            let id_at = r.pos();
            let id = r.string("video id")?;
            if previous.is_some_and(|p| p >= id) {
                return Err(Error::format(
                    source,
                    format!("byte {id_at}"),
                    format!("entry `{id}` is out of order or duplicated"),
                ));
            }
            previous = Some(id);
            let payload_at = r.pos();
            let raw = r.take(4 * dim, "vector")?;
            let mut values = Vec::with_capacity(dim);
            for (j, chunk) in raw.chunks_exact(4).enumerate() {
                let v = f32::from_le_bytes(chunk.try_into().unwrap());
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::format(
                        source,
                        format!("byte {}", payload_at + 4 * j),
                        format!("entry `{id}` attribute {j} holds invalid value {v}"),
                    ));
                }
                values.push(v);
            }
            store.entries.insert(id.to_owned(), values);
        }
        if r.remaining() != 0 {
            return Err(Error::format(
                source,
                format!("byte {}", r.pos()),
                format!("{} trailing bytes after {count} entries", r.remaining()),
            ));
        }
        Ok(store)
    }
}

pub fn save_store(store: &BoaStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, store.encode()).map_err(|e| Error::io(path, e))
}

pub fn load_store(path: impl AsRef<Path>) -> Result<BoaStore> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    BoaStore::decode(&bytes, &path.display().to_string())
}

/// Loads a store and rejects it unless it was built with `expected`.
pub fn load_store_expecting(path: impl AsRef<Path>, expected: Provenance) -> Result<BoaStore> {
    let store = load_store(path)?;
    if store.provenance != expected {
        return Err(Error::ProvenanceMismatch {
            expected,
            found: store.provenance,
        });
    }
    Ok(store)
}

/// Where per-video frame scores come from during a build.
pub trait ScoreSource: Sync {
    /// `Ok(None)` when the source has nothing for this id.
    fn frames(&self, video_id: &str) -> Result<Option<FrameAttributeMatrix>>;
}

/// A directory of `<video_id>.boaf` or `<video_id>.csv` files.
#[derive(Debug, Clone)]
pub struct ScoreDir {
    root: PathBuf,
}

impl ScoreDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ScoreDir { root: root.into() }
    }

    pub fn path_for(&self, video_id: &str, encoding: ScoreEncoding) -> PathBuf {
        self.root.join(format!("{video_id}.{}", encoding.extension()))
    }
}

impl ScoreSource for ScoreDir {
    fn frames(&self, video_id: &str) -> Result<Option<FrameAttributeMatrix>> {
        for encoding in [ScoreEncoding::Binary, ScoreEncoding::Csv] {
            let path = self.path_for(video_id, encoding);
            if !path.is_file() {
                continue;
            }
            let file = read_frame_scores(&path)?;
            if file.video_id() != video_id {
                return Err(Error::Build {
                    video_id: video_id.to_owned(),
                    message: format!("{} declares video id `{}`", path.display(), file.video_id()),
                });
            }
            return Ok(Some(file.to_matrix()));
        }
        Ok(None)
    }
}

impl ScoreSource for HashMap<String, FrameAttributeMatrix> {
    fn frames(&self, video_id: &str) -> Result<Option<FrameAttributeMatrix>> {
        Ok(self.get(video_id).cloned())
    }
}

impl ScoreSource for BTreeMap<String, FrameScoreFile> {
    fn frames(&self, video_id: &str) -> Result<Option<FrameAttributeMatrix>> {
        Ok(self.get(video_id).map(FrameScoreFile::to_matrix))
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildConfig {
    pub provenance: Provenance,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    pub metadata: StoreMetadata,
}

pub(crate) fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Codes, pools and normalizes every video in the manifest.
pub fn build_store(
    manifest: &DatasetManifest,
    source: &dyn ScoreSource,
    config: &BuildConfig,
) -> Result<BoaStore> {
    let ids = manifest.video_ids();
    let provenance = config.provenance;
    let encoded: Vec<Result<BoaVector>> = with_workers(config.workers, || {
        ids.par_iter()
            .map(|&id| {
                let frames = source.frames(id)?.ok_or_else(|| Error::Build {
                    video_id: id.to_owned(),
                    message: "no frame scores found".into(),
                })?;
                encode_video(&frames, provenance).map_err(|e| Error::Build {
                    video_id: id.to_owned(),
                    message: e.to_string(),
                })
            })
            .collect()
    })?;

    let dim = match manifest.dim {
        Some(dim) => dim,
        None => match encoded.iter().find_map(|r| r.as_ref().ok()) {
            Some(v) => v.dim(),
            None => {
                return match encoded.into_iter().next() {
                    Some(Err(e)) => Err(e),
                    _ => Err(Error::invalid("manifest lists no videos")),
                }
            }
        },
    };
    let mut store = BoaStore::new(dim, provenance, config.metadata.clone())?;
    for (id, vector) in ids.iter().zip(encoded) {
        let vector = vector?;
        if vector.dim() != dim {
            return Err(Error::Build {
                video_id: (*id).to_owned(),
                message: format!("scores have dim {}, expected {dim}", vector.dim()),
            });
        }
        store.insert(*id, &vector)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::pool;

    fn manifest(text: &str) -> DatasetManifest {
        DatasetManifest::parse(text).unwrap()
    }

    fn scores() -> HashMap<String, FrameAttributeMatrix> {
        let mut m = HashMap::new();
        m.insert(
            "q".to_owned(),
            FrameAttributeMatrix::from_rows(&[[0.2, 0.8, 0.0], [0.6, 0.4, 0.1]]).unwrap(),
        );
        m.insert(
            "d".to_owned(),
            FrameAttributeMatrix::from_rows(&[[0.2, 0.8, 0.3]]).unwrap(),
        );
        m
    }

    #[test]
    fn build_matches_pooling() {
        let m = manifest("event e\nquery q\ndb+ d\n");
        let src = scores();
        let store = build_store(&m, &src, &BuildConfig::default()).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.dim(), 3);
        for id in ["q", "d"] {
            let expected = pool(&src[id], PoolingMode::Max).unwrap();
            let got = store.get(id).unwrap();
            let narrowed: Vec<f64> = expected.values().iter().map(|&v| v as f32 as f64).collect();
            assert_eq!(got.values(), narrowed.as_slice());
            assert_eq!(got.provenance(), Provenance::default());
        }
    }

    #[test]
    fn missing_scores_name_video() {
        let m = manifest("event e\nquery q\ndb+ d\ndb- v9\n");
        match build_store(&m, &scores(), &BuildConfig::default()) {
            Err(Error::Build { video_id, .. }) => assert_eq!(video_id, "v9"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dim_mismatch_rejected() {
        let mut src = scores();
        src.insert("x".into(), FrameAttributeMatrix::from_rows(&[[0.5, 0.5]]).unwrap());
        let m = manifest("event e\nquery q\ndb+ d\ndb- x\n");
        match build_store(&m, &src, &BuildConfig::default()) {
            Err(Error::Build { video_id, .. }) => assert_eq!(video_id, "x"),
            other => panic!("{other:?}"),
        }
        let declared = manifest("dim 4\nevent e\nquery q\ndb+ d\n");
        assert!(build_store(&declared, &scores(), &BuildConfig::default()).is_err());
    }

    #[test]
    fn get_missing_is_not_found() {
        let store = BoaStore::new(2, Provenance::default(), StoreMetadata::default()).unwrap();
        assert!(matches!(store.get("missing"), Err(Error::NotFound(_))));
    }

    #[test]
    fn bad_magic_and_corruption() {
        let m = manifest("event e\nquery q\ndb+ d\n");
        let store = build_store(&m, &scores(), &BuildConfig::default()).unwrap();
        let mut bytes = store.encode();
        assert_eq!(BoaStore::decode(&bytes, "mem").unwrap(), store);

        bytes[3] = b'X';
        let err = BoaStore::decode(&bytes, "mem").unwrap_err().to_string();
        assert!(err.contains("bad magic"), "{err}");

        let mut bytes = store.encode();
        bytes[14] = 9;
        assert!(BoaStore::decode(&bytes, "mem").is_err());

        let bytes = store.encode();
        assert!(BoaStore::decode(&bytes[..bytes.len() - 1], "mem").is_err());
        let mut long = store.encode();
        long.push(0);
        assert!(BoaStore::decode(&long, "mem").is_err());
    }

    #[test]
    fn insert_checks_provenance() {
        let mut store = BoaStore::new(2, Provenance::default(), StoreMetadata::default()).unwrap();
        let l2 = BoaVector::new(
            vec![0.6, 0.8],
            Provenance::new(CodingMode::Soft, PoolingMode::Max, NormMode::L2),
        )
        .unwrap();
        assert!(matches!(store.insert("a", &l2), Err(Error::ProvenanceMismatch { .. })));
    }
}
