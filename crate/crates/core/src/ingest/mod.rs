//! Getting scores and dataset structure into the pipeline.

mod frame_file;
mod manifest;
mod sampling;
mod scorer;

pub use frame_file::{
    read_frame_scores, write_frame_scores, FrameScoreFile, ScoreEncoding, BOAF_MAGIC,
    BOAF_VERSION, NEGATIVE_TOLERANCE,
};
pub use manifest::{
    parse_manifest, CountReport, DatasetManifest, EventCounts, EventSpec, Relevance,
    EVVE_EVENT_COUNTS,
};
pub use sampling::{sample_plan, SamplePlan, DEFAULT_RATE_HZ};
pub use scorer::{parse_score_line, run_scorer, ScorerCommand};
