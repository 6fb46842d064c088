//! Seeded synthetic event datasets.
//!
//! Each event owns a signature: a run of attributes its videos score high
//! on. Queries and positives of an event are built around its own
//! signature, negatives around another event's. Every score is a base level
//! (high on the signature, low elsewhere) plus Gaussian noise, clipped to
//! [0, 1].
//!
//! Randomness comes from ChaCha8 seeded with the config seed, one stream
//! per event, so events can be generated in parallel and the output depends
//! only on the config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{DatasetManifest, EventCounts, EventSpec, FrameScoreFile, Relevance, ScoreEncoding, EVVE_EVENT_COUNTS};

pub const DEFAULT_HIGH: f64 = 0.9;
pub const DEFAULT_LOW: f64 = 0.05;
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SCORES_DIR: &str = "scores";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub dim: usize,
    /// Attributes per event signature.
    pub signature_size: usize,
    /// One entry per event.
    pub counts: Vec<EventCounts>,
    /// Inclusive range of frames per video.
    pub frames_per_video: (usize, usize),
    pub noise_sigma: f64,
    /// Fraction of a signature shared with the next event's.
    pub overlap: f64,
    pub seed: u64,
    pub high: f64,
    pub low: f64,
}

impl SynthConfig {
    /// `events` events with identical counts.
    pub fn uniform(events: usize, queries: usize, positives: usize, negatives: usize) -> Self {
        SynthConfig {
            counts: vec![EventCounts::new(queries, positives, negatives); events],
            ..SynthConfig::evve_shaped()
        }
    }

    /// Thirteen events with the EVVE per-event counts.
    pub fn evve_shaped() -> Self {
        SynthConfig {
            dim: 256,
            signature_size: 16,
            counts: EVVE_EVENT_COUNTS.to_vec(),
            frames_per_video: (4, 12),
            noise_sigma: 0.0,
            overlap: 0.0,
            seed: 0,
            high: DEFAULT_HIGH,
            low: DEFAULT_LOW,
        }
    }

    /// Distance between the first attributes of consecutive signatures.
    fn stride(&self) -> usize {
        let shared = (self.overlap * self.signature_size as f64).round() as usize;
        self.signature_size - shared.min(self.signature_size)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 {
            return bad("dim must be >= 1".into());
        }
        if self.signature_size == 0 || self.signature_size > self.dim {
            return bad(format!(
                "signature size {} must be in 1..={}",
                self.signature_size, self.dim
            ));
        }
        if self.counts.is_empty() {
            return bad("at least one event is required".into());
        }
        for (i, c) in self.counts.iter().enumerate() {
            if c.queries == 0 || c.positives == 0 || c.negatives == 0 {
                return bad(format!("event {} has a zero count: {c:?}", i + 1));
            }
        }
        let (lo, hi) = self.frames_per_video;
        if lo == 0 || lo > hi {
            return bad(format!("frames per video range {lo}..={hi} is empty or starts at 0"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise sigma must be >= 0, got {}", self.noise_sigma));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return bad(format!("overlap must be in [0, 1], got {}", self.overlap));
        }
        for (name, v) in [("high", self.high), ("low", self.low)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} base level must be in [0, 1], got {v}"));
            }
        }
        let span = (self.counts.len() - 1) * self.stride() + self.signature_size;
        if span > self.dim {
            return bad(format!(
                "{} events with signature size {} and overlap {} need {span} attributes, dim is {}",
                self.counts.len(),
                self.signature_size,
                self.overlap,
                self.dim
            ));
        }
        Ok(())
    }

    /// Attribute indices of each event's signature.
    pub fn signatures(&self) -> Vec<std::ops::Range<usize>> {
        let stride = self.stride();
        (0..self.counts.len())
            .map(|e| e * stride..e * stride + self.signature_size)
            .collect()
    }
}

pub fn event_id(event: usize) -> String {
    (event + 1).to_string()
}

fn video_id(event: usize, kind: char, index: usize) -> String {
    format!("e{:02}{kind}{index:04}", event + 1)
}

/// Frame reference understood by the synthetic scorer: `<video_id>#<frame>`.
pub fn frame_reference(video_id: &str, frame: usize) -> String {
    format!("{video_id}#{frame}")
}

pub fn parse_frame_reference(reference: &str) -> Option<(&str, usize)> {
    let (id, frame) = reference.rsplit_once('#')?;
    Some((id, frame.parse().ok()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub manifest: DatasetManifest,
    /// Keyed by video id.
    pub files: BTreeMap<String, FrameScoreFile>,
}

impl SynthDataset {
    /// Scores of one frame, addressed by a [`frame_reference`].
    pub fn lookup(&self, reference: &str) -> Option<&[f32]> {
        let (id, frame) = parse_frame_reference(reference)?;
        self.files.get(id)?.row(frame)
    }

    pub fn frame_references(&self, video_id: &str) -> Option<Vec<String>> {
        let file = self.files.get(video_id)?;
        Some((0..file.frame_count()).map(|i| frame_reference(video_id, i)).collect())
    }

    /// Writes `manifest.txt` and `scores/<video_id>.<ext>` under `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>, encoding: ScoreEncoding) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let scores = dir.join(SCORES_DIR);
        fs::create_dir_all(&scores).map_err(|e| Error::io(&scores, e))?;
        let manifest = dir.join(MANIFEST_FILE);
        fs::write(&manifest, self.manifest.to_text()).map_err(|e| Error::io(&manifest, e))?;
        for (id, file) in &self.files {
            let path = scores.join(format!("{id}.{}", encoding.extension()));
            fs::write(&path, file.encode(encoding)).map_err(|e| Error::io(&path, e))?;
        }
        Ok(manifest)
    }
}

struct EventOutput {
    spec: EventSpec,
    files: Vec<FrameScoreFile>,
}

fn generate_event(config: &SynthConfig, event: usize) -> Result<EventOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(event as u64);
    let signatures = config.signatures();
    let counts = config.counts[event];
    let mut spec = EventSpec::new(event_id(event));
    let mut files = Vec::with_capacity(counts.videos());

    let video = |rng: &mut ChaCha8Rng, id: String, signature: Option<&std::ops::Range<usize>>| {
        let (lo, hi) = config.frames_per_video;
        let frames = rng.random_range(lo..=hi);
        let mut values = Vec::with_capacity(frames * config.dim);
        for _ in 0..frames {
            for j in 0..config.dim {
                let base = match signature {
                    Some(s) if s.contains(&j) => config.high,
                    _ => config.low,
                };
                let z: f64 = rng.sample(StandardNormal);
                values.push((base + config.noise_sigma * z).clamp(0.0, 1.0) as f32);
            }
        }
        FrameScoreFile::new(id, config.dim, values)
    };

    let own = &signatures[event];
    for i in 0..counts.queries {
        let id = video_id(event, 'q', i);
        spec.queries.push(id.clone());
        files.push(video(&mut rng, id, Some(own))?);
    }
    for i in 0..counts.positives {
        let id = video_id(event, 'p', i);
        spec.database.push((id.clone(), Relevance::Positive));
        files.push(video(&mut rng, id, Some(own))?);
    }
    let others = signatures.len() - 1;
    for i in 0..counts.negatives {
        let id = video_id(event, 'n', i);
        spec.database.push((id.clone(), Relevance::Negative));
        let signature = if others == 0 {
            None
        } else {
            let pick = rng.random_range(0..others);
            Some(&signatures[if pick >= event { pick + 1 } else { pick }])
        };
        files.push(video(&mut rng, id, signature)?);
    }
    Ok(EventOutput { spec, files })
}

/// Builds the manifest and frame scores for `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthDataset> {
    config.validate()?;
    let events: Vec<Result<EventOutput>> = (0..config.counts.len())
        .into_par_iter()
        .map(|e| generate_event(config, e))
        .collect();
    let mut manifest = DatasetManifest {
        dim: Some(config.dim),
        events: Vec::with_capacity(events.len()),
    };
    let mut files = BTreeMap::new();
    for event in events {
        let event = event?;
        manifest.events.push(event.spec);
        for f in event.files {
            files.insert(f.video_id().to_owned(), f);
        }
    }
    manifest.validate()?;
    Ok(SynthDataset { manifest, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            dim: 12,
            signature_size: 3,
            frames_per_video: (1, 3),
            noise_sigma: 0.3,
            seed: 42,
            ..SynthConfig::uniform(3, 2, 3, 4)
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthConfig { seed: 43, ..small() }).unwrap();
        assert_ne!(a.files, c.files);
    }

    #[test]
    fn counts_and_scores() {
        let d = generate(&small()).unwrap();
        assert_eq!(d.manifest.events.len(), 3);
        assert_eq!(d.files.len(), 3 * 9);
        for e in &d.manifest.events {
            assert_eq!(e.counts(), EventCounts::new(2, 3, 4));
        }
        for f in d.files.values() {
            assert!((1..=3).contains(&f.frame_count()));
            assert!(f.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn noiseless_scores_are_base_levels() {
        let d = generate(&SynthConfig { noise_sigma: 0.0, ..small() }).unwrap();
        let q = &d.files["e02q0000"];
        let row = q.row(0).unwrap();
        // event 2 signature is attributes 3..6
        assert_eq!(&row[3..6], &[0.9f32; 3]);
        assert!(row[..3].iter().chain(&row[6..]).all(|&v| v == 0.05f32));
    }

    #[test]
    fn signatures_with_overlap() {
        let c = SynthConfig { overlap: 1.0 / 3.0, ..small() };
        assert_eq!(c.signatures(), vec![0..3, 2..5, 4..7]);
        assert_eq!(SynthConfig { overlap: 0.0, ..small() }.signatures(), vec![0..3, 3..6, 6..9]);
    }

    #[test]
    fn infeasible_allocation() {
        let c = SynthConfig {
            dim: 8,
            ..small()
        };
        assert!(matches!(generate(&c), Err(Error::Config(_))));
        // overlap makes the same layout fit
        assert!(generate(&SynthConfig { overlap: 0.5, ..c }).is_ok());
    }

    #[test]
    fn invalid_configs() {
        for c in [
            SynthConfig { signature_size: 0, ..small() },
            SynthConfig { noise_sigma: -1.0, ..small() },
            SynthConfig { frames_per_video: (0, 2), ..small() },
            SynthConfig { frames_per_video: (3, 2), ..small() },
            SynthConfig { overlap: 1.5, ..small() },
            SynthConfig { counts: vec![], ..small() },
            SynthConfig::uniform(2, 0, 1, 1),
        ] {
            assert!(generate(&c).is_err(), "{c:?}");
        }
    }

    #[test]
    fn references() {
        let d = generate(&small()).unwrap();
        let refs = d.frame_references("e01p0002").unwrap();
        assert_eq!(refs[0], "e01p0002#0");
        assert_eq!(d.lookup(&refs[0]), d.files["e01p0002"].row(0));
        assert!(d.lookup("e01p0002#99").is_none());
        assert!(d.lookup("nope").is_none());
        assert_eq!(parse_frame_reference("a#b#3"), Some(("a#b", 3)));
    }
}
