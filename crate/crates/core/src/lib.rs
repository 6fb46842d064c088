//! Bag-of-attributes video event retrieval.
//!
//! Per-frame attribute scores (one classifier probability per semantic
//! class) are coded and pooled into one vector per video, stored in an
//! index, ranked by Euclidean distance within each event, and scored with
//! per-event mAP and paired t-tests.
//!
//! ```
//! use boa_core::{encode_video, FrameAttributeMatrix, Provenance};
//!
//! let frames = FrameAttributeMatrix::from_rows(&[[0.2, 0.8], [0.6, 0.4]]).unwrap();
//! let boa = encode_video(&frames, Provenance::default()).unwrap();
//! assert_eq!(boa.values(), &[0.6, 0.8]);
//! ```

mod codec;
pub mod error;
pub mod eval;
pub mod index;
pub mod ingest;
pub mod kernel;
pub mod retrieval;
pub mod synth;

pub use error::{Error, Result};
pub use index::{build_store, load_store, load_store_expecting, save_store, BoaStore, BuildConfig, ScoreDir, ScoreSource, StoreMetadata};
pub use ingest::{parse_manifest, read_frame_scores, write_frame_scores, DatasetManifest, EventSpec, FrameScoreFile};
pub use kernel::{
    code_frame, code_frames, encode_video, l2_distance, normalize, pool, AttributeSpace,
    AttributeVector, BoaVector, CodingMode, FrameAttributeMatrix, NormMode, PoolingMode,
    Provenance,
};
pub use retrieval::{query_event, query_manifest, rank, RankedEntry, RankedList};
