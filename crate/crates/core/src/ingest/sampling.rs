//! Fixed-rate frame sampling. Only timestamps are produced; extracting the
//! frames is left to an external tool such as ffmpeg.

use crate::error::{Error, Result};

pub const DEFAULT_RATE_HZ: f64 = 1.0;

// absorbs products like 0.29 * 100 = 28.999999999999996
const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub duration: f64,
    pub rate: f64,
    pub native_fps: Option<f64>,
    pub timestamps: Vec<f64>,
}

impl SamplePlan {
    pub fn with_native_fps(mut self, fps: f64) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::invalid(format!("native fps must be positive, got {fps}")));
        }
        self.native_fps = Some(fps);
        Ok(self)
    }

    /// Source frame index nearest at-or-before each timestamp, when the
    /// native frame rate is known.
    pub fn frame_indices(&self) -> Option<Vec<u64>> {
        let fps = self.native_fps?;
        Some(
            self.timestamps
                .iter()
                .map(|t| (t * fps + COUNT_SLACK).floor() as u64)
                .collect(),
        )
    }
}

/// Timestamps `k / rate` for every full sampling interval of the video,
/// with at least one frame for any positive duration.
pub fn sample_plan(duration: f64, rate: f64) -> Result<SamplePlan> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {duration}")));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid(format!("rate must be positive, got {rate}")));
    }
    let count = ((duration * rate + COUNT_SLACK).floor() as usize).max(1);
    let timestamps = (0..count).map(|k| k as f64 / rate).collect();
    Ok(SamplePlan {
        duration,
        rate,
        native_fps: None,
        timestamps,
    })
}
