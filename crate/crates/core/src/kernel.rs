//! Coding, pooling, normalization and distance over attribute score vectors.
//!
//! A video is a stack of per-frame classifier score vectors. Each frame is
//! coded (soft keeps the full probability vector, hard keeps only the
//! winning attribute), the coded frames are pooled into one vector with one
//! dimension per attribute, and the result is optionally normalized.
//! Everything here is pure and works in `f64`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The set of attributes a classifier scores. `dim` is the number of
/// classes, e.g. 1000 for an ImageNet classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSpace {
    dim: usize,
    labels: Option<Vec<String>>,
}

impl AttributeSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("attribute space must have dim >= 1"));
        }
        Ok(AttributeSpace { dim, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("attribute space must have dim >= 1"));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::invalid(format!("duplicate attribute label `{label}`")));
            }
        }
        Ok(AttributeSpace {
            dim: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.as_ref()?.get(index).map(String::as_str)
    }
}

fn check_scores(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("score vector is empty"));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid(format!("score {i} is not finite ({v})")));
        }
        if v < 0.0 {
            return Err(Error::invalid(format!("score {i} is negative ({v})")));
        }
    }
    Ok(())
}

/// One frame's scores over every attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeVector(Vec<f64>);

impl AttributeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_scores(&values)?;
        Ok(AttributeVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for AttributeVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CodingMode {
    /// Keep the whole probability vector.
    #[default]
    Soft,
    /// One-hot at the highest-scoring attribute.
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PoolingMode {
    #[default]
    Max,
    Avg,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormMode {
    #[default]
    None,
    L1,
    L2,
}

macro_rules! mode_enum {
    ($ty:ident { $($variant:ident => $name:literal = $code:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }

            pub(crate) fn code(self) -> u8 {
                match self {
                    $($ty::$variant => $code),+
                }
            }

            pub(crate) fn from_code(code: u8) -> Option<Self> {
                match code {
                    $($code => Some($ty::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"),
                        other
                    ))),
                }
            }
        }
    };
}

mode_enum!(CodingMode { Soft => "soft" = 0, Hard => "hard" = 1 });
mode_enum!(PoolingMode { Max => "max" = 0, Avg => "avg" = 1, Sum => "sum" = 2 });
mode_enum!(NormMode { None => "none" = 0, L1 => "l1" = 1, L2 => "l2" = 2 });

/// The configuration a [`BoaVector`] was produced under. Vectors with
/// different provenance are never compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Provenance {
    pub coding: CodingMode,
    pub pooling: PoolingMode,
    pub norm: NormMode,
}

impl Provenance {
    pub fn new(coding: CodingMode, pooling: PoolingMode, norm: NormMode) -> Self {
        Provenance {
            coding,
            pooling,
            norm,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "coding={} pooling={} norm={}",
            self.coding, self.pooling, self.norm
        )
    }
}

/// Per-video stack of frame score vectors, in temporal order, stored
/// row-major. Raw classifier output counts as soft-coded.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAttributeMatrix {
    dim: usize,
    values: Vec<f64>,
    coding: CodingMode,
}

impl FrameAttributeMatrix {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("frame matrix must have dim >= 1"));
        }
        Ok(FrameAttributeMatrix {
            dim,
            values: Vec::new(),
            coding: CodingMode::Soft,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("cannot infer dim from zero frames"))?;
        let mut matrix = FrameAttributeMatrix::new(first.as_ref().len())?;
        for row in rows {
            matrix.push(row.as_ref())?;
        }
        Ok(matrix)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::invalid(format!(
                "frame {} has {} scores, expected {}",
                self.len(),
                row.len(),
                self.dim
            )));
        }
        check_scores(row).map_err(|e| Error::invalid(format!("frame {}: {e}", self.len())))?;
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coding(&self) -> CodingMode {
        self.coding
    }

    pub fn frame(&self, index: usize) -> Option<&[f64]> {
        let start = index.checked_mul(self.dim)?;
        self.values.get(start..start + self.dim)
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }
}

/// Bag-of-attributes vector: one non-negative entry per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct BoaVector {
    values: Vec<f64>,
    provenance: Provenance,
}

impl BoaVector {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_scores(&values)?;
        Ok(BoaVector { values, provenance })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Widens stored `f32` entries without re-validating.
    pub(crate) fn from_stored(values: &[f32], provenance: Provenance) -> Self {
        BoaVector {
            values: values.iter().map(|&v| f64::from(v)).collect(),
            provenance,
        }
    }
}

fn argmax(values: &[f64]) -> usize {
    // strict `>` keeps the lowest index on ties
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn code_slice(scores: &[f64], mode: CodingMode, out: &mut Vec<f64>) {
    match mode {
        CodingMode::Soft => out.extend_from_slice(scores),
        CodingMode::Hard => {
            let hot = argmax(scores);
            out.extend((0..scores.len()).map(|i| if i == hot { 1.0 } else { 0.0 }));
        }
    }
}

/// Codes one frame. Soft coding is the identity; hard coding puts a single
/// 1 at the highest score, lowest index winning ties.
pub fn code_frame(scores: &AttributeVector, mode: CodingMode) -> Result<AttributeVector> {
    check_scores(&scores.0)?;
    let mut out = Vec::with_capacity(scores.dim());
    code_slice(&scores.0, mode, &mut out);
    Ok(AttributeVector(out))
}

/// Codes every frame of a video.
pub fn code_frames(frames: &FrameAttributeMatrix, mode: CodingMode) -> FrameAttributeMatrix {
    let mut values = Vec::with_capacity(frames.values.len());
    for row in frames.frames() {
        code_slice(row, mode, &mut values);
    }
    FrameAttributeMatrix {
        dim: frames.dim,
        values,
        coding: mode,
    }
}

/// Pools frames coordinatewise. The resulting vector carries the frames'
/// coding mode and no normalization.
pub fn pool(frames: &FrameAttributeMatrix, mode: PoolingMode) -> Result<BoaVector> {
    if frames.is_empty() {
        return Err(Error::EmptyVideo);
    }
    let mut rows = frames.frames();
    let mut acc = rows.next().expect("non-empty").to_vec();
    match mode {
        PoolingMode::Max => {
            for row in rows {
                for (a, &v) in acc.iter_mut().zip(row) {
                    if v > *a {
                        *a = v;
                    }
                }
            }
        }
        PoolingMode::Sum | PoolingMode::Avg => {
            for row in rows {
                for (a, &v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            if mode == PoolingMode::Avg {
                let n = frames.len() as f64;
                acc.iter_mut().for_each(|a| *a /= n);
            }
        }
    }
    Ok(BoaVector {
        values: acc,
        provenance: Provenance::new(frames.coding, mode, NormMode::None),
    })
}

/// Rescales a vector to unit L1 or L2 norm. The zero vector passes through
/// unchanged.
pub fn normalize(v: &BoaVector, mode: NormMode) -> BoaVector {
    let scale = match mode {
        NormMode::None => 0.0,
        NormMode::L1 => v.values.iter().sum::<f64>(),
        NormMode::L2 => v.values.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    let values = if scale > 0.0 {
        v.values.iter().map(|x| x / scale).collect()
    } else {
        v.values.clone()
    };
    BoaVector {
        values,
        provenance: Provenance {
            norm: mode,
            ..v.provenance
        },
    }
}

/// Squared Euclidean distance over raw slices of equal length.
#[inline]
pub fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub fn l2_distance(a: &BoaVector, b: &BoaVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(squared_l2(&a.values, &b.values).sqrt())
}

/// Full per-video pipeline: code every frame, pool, normalize.
pub fn encode_video(frames: &FrameAttributeMatrix, provenance: Provenance) -> Result<BoaVector> {
    let pooled = if provenance.coding == frames.coding() {
        pool(frames, provenance.pooling)?
    } else {
        pool(&code_frames(frames, provenance.coding), provenance.pooling)?
    };
    Ok(normalize(&pooled, provenance.norm))
}
