//! Frame-score files in two encodings.
//!
//! Binary (`BOAF`), all integers little-endian:
//!
//! ```text
//! "BOAF" | version u32 = 1 | dim u32 | frame_count u32
//!        | id_len u32 | id bytes (UTF-8)
//!        | frame_count * dim f32, row-major
//! ```
//!
//! CSV: `video_id,<id>` then `dim,<n>`, then one comma-separated row of
//! `n` decimals per frame.
//!
//! Readers sniff the first four bytes, so either encoding can be handed to
//! [`read_frame_scores`].

use std::fs;
use std::path::Path;

use crate::codec::{put_string, ByteReader};
use crate::error::{Error, Result};
use crate::kernel::FrameAttributeMatrix;

pub const BOAF_MAGIC: &[u8; 4] = b"BOAF";
pub const BOAF_VERSION: u32 = 1;

/// Negative scores down to this value are treated as numeric noise and
/// clamped to zero; anything lower is rejected.
pub const NEGATIVE_TOLERANCE: f32 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreEncoding {
    Binary,
    Csv,
}

impl ScoreEncoding {
    /// `.csv` selects CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ScoreEncoding::Csv,
            _ => ScoreEncoding::Binary,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ScoreEncoding::Binary => "boaf",
            ScoreEncoding::Csv => "csv",
        }
    }
}

/// Classifier scores for every sampled frame of one video.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScoreFile {
    video_id: String,
    dim: usize,
    values: Vec<f32>,
}

/// Checks one score and applies the small-negative clamp. `Err` carries a
/// description of what is wrong.
fn admit(v: f32) -> std::result::Result<f32, String> {
    if !v.is_finite() {
        Err(format!("non-finite score {v}"))
    } else if v < NEGATIVE_TOLERANCE {
        Err(format!("negative score {v}"))
    } else if v < 0.0 {
        Ok(0.0)
    } else {
        Ok(v)
    }
}

impl FrameScoreFile {
    /// `values` is row-major, `frame_count * dim` long.
    pub fn new(video_id: impl Into<String>, dim: usize, mut values: Vec<f32>) -> Result<Self> {
        let video_id = video_id.into();
        if dim == 0 {
            return Err(Error::invalid(format!("video `{video_id}`: dim must be >= 1")));
        }
        if values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "video `{video_id}`: {} scores is not a positive multiple of dim {dim}",
                values.len()
            )));
        }
        for (i, v) in values.iter_mut().enumerate() {
            *v = admit(*v).map_err(|msg| {
                Error::invalid(format!(
                    "video `{video_id}` frame {} attribute {}: {msg}",
                    i / dim,
                    i % dim
                ))
            })?;
        }
        Ok(FrameScoreFile {
            video_id,
            dim,
            values,
        })
    }

    /// Narrows a matrix to `f32` storage.
    pub fn from_matrix(video_id: impl Into<String>, frames: &FrameAttributeMatrix) -> Result<Self> {
        let values = frames.as_flat().iter().map(|&v| v as f32).collect();
        FrameScoreFile::new(video_id, frames.dim(), values)
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame_count(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, frame: usize) -> Option<&[f32]> {
        let start = frame.checked_mul(self.dim)?;
        self.values.get(start..start + self.dim)
    }

    pub fn to_matrix(&self) -> FrameAttributeMatrix {
        let mut m = FrameAttributeMatrix::new(self.dim).expect("dim >= 1");
        let mut row = vec![0.0; self.dim];
        for chunk in self.values.chunks_exact(self.dim) {
            for (dst, &src) in row.iter_mut().zip(chunk) {
                *dst = f64::from(src);
            }
            m.push(&row).expect("validated on construction");
        }
        m
    }

    pub fn encode(&self, encoding: ScoreEncoding) -> Vec<u8> {
        match encoding {
            ScoreEncoding::Binary => self.encode_binary(),
            ScoreEncoding::Csv => self.encode_csv().into_bytes(),
        }
    }

    fn encode_binary(&self) -> Vec<u8> {
        let id = self.video_id.as_bytes();
        let mut out = Vec::with_capacity(20 + id.len() + 4 * self.values.len());
        out.extend_from_slice(BOAF_MAGIC);
        out.extend_from_slice(&BOAF_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.frame_count() as u32).to_le_bytes());
        put_string(&mut out, &self.video_id);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    fn encode_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("video_id,{}\ndim,{}\n", self.video_id, self.dim);
        for row in self.values.chunks_exact(self.dim) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                // shortest representation that parses back to the same f32
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Decodes either encoding. `source` only labels error messages.
    pub fn decode(bytes: &[u8], source: &str) -> Result<Self> {
        if bytes.starts_with(BOAF_MAGIC) {
            decode_binary(bytes, source)
        } else if bytes.starts_with(b"video_id,") {
            let text = std::str::from_utf8(bytes)
                .map_err(|e| Error::format(source, format!("byte {}", e.valid_up_to()), "CSV is not UTF-8"))?;
            decode_csv(text, source)
        } else {
            let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned();
            Err(Error::format(
                source,
                "byte 0",
                format!("bad magic {shown:?}: expected \"BOAF\" or a `video_id,` CSV header"),
            ))
        }
    }
}

fn decode_binary(bytes: &[u8], source: &str) -> Result<FrameScoreFile> {
    let mut cur = ByteReader::new(bytes, source);
    cur.take(4, "magic")?;
    let version = cur.u32("version")?;
    if version != BOAF_VERSION {
        return Err(Error::format(source, "byte 4", format!("unsupported BOAF version {version}")));
    }
    let dim = cur.u32("dim")? as usize;
    let frame_count = cur.u32("frame_count")? as usize;
    if dim == 0 || frame_count == 0 {
        return Err(Error::format(
            source,
            "byte 8",
            format!("dim ({dim}) and frame_count ({frame_count}) must be positive"),
        ));
    }
    let id = cur.string("video id")?.to_owned();

    let payload_at = cur.pos();
    let expected = dim
        .checked_mul(frame_count)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(source, "byte 8", "dim * frame_count overflows"))?;
    let available = bytes.len() - payload_at;
    if available < expected {
        return Err(Error::format(
            source,
            format!("byte {}", bytes.len()),
            format!(
                "truncated payload: header declares {frame_count} frames of dim {dim} \
                 ({expected} bytes) but only {available} bytes ({} full rows) follow",
                available / (4 * dim)
            ),
        ));
    }
    if available > expected {
        return Err(Error::format(
            source,
            format!("byte {}", payload_at + expected),
            format!(
                "payload longer than declared {frame_count} x {dim}: {} trailing bytes",
                available - expected
            ),
        ));
    }

    let mut values = Vec::with_capacity(dim * frame_count);
    for (i, chunk) in bytes[payload_at..].chunks_exact(4).enumerate() {
        let raw = f32::from_le_bytes(chunk.try_into().unwrap());
        let v = admit(raw).map_err(|msg| {
            Error::format(
                source,
                format!("byte {} (row {}, column {})", payload_at + 4 * i, i / dim, i % dim),
                msg,
            )
        })?;
        values.push(v);
    }
    Ok(FrameScoreFile {
        video_id: id,
        dim,
        values,
    })
}

fn decode_csv(text: &str, source: &str) -> Result<FrameScoreFile> {
    let mut lines = text.lines().enumerate();
    let header = |line: Option<(usize, &str)>, key: &str| -> Result<String> {
        let (n, line) = line.ok_or_else(|| {
            Error::format(source, "end of file", format!("missing `{key},` header line"))
        })?;
        line.trim_end_matches('\r')
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(','))
            .map(str::to_owned)
            .ok_or_else(|| {
                Error::format(source, format!("line {}", n + 1), format!("expected `{key},<value>`"))
            })
    };
    let video_id = header(lines.next(), "video_id")?;
    let dim_text = header(lines.next(), "dim")?;
    let dim: usize = dim_text
        .trim()
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::format(source, "line 2", format!("invalid dim `{dim_text}`")))?;

    let mut values = Vec::new();
    for (n, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row = values.len() / dim;
        let mut fields = 0;
        for (col, field) in line.split(',').enumerate() {
            fields += 1;
            if col >= dim {
                continue;
            }
            let at = || format!("line {}, row {row}, column {col}", n + 1);
            let raw: f32 = field
                .trim()
                .parse()
                .map_err(|_| Error::format(source, at(), format!("not a number: `{field}`")))?;
            values.push(admit(raw).map_err(|msg| Error::format(source, at(), msg))?);
        }
        if fields != dim {
            return Err(Error::format(
                source,
                format!("line {}, row {row}", n + 1),
                format!("row has {fields} values, expected dim {dim}"),
            ));
        }
    }
    if values.is_empty() {
        return Err(Error::format(source, "end of file", "no frame rows"));
    }
    Ok(FrameScoreFile {
        video_id,
        dim,
        values,
    })
}

pub fn read_frame_scores(path: impl AsRef<Path>) -> Result<FrameScoreFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FrameScoreFile::decode(&bytes, &path.display().to_string())
}

pub fn write_frame_scores(
    file: &FrameScoreFile,
    path: impl AsRef<Path>,
    encoding: ScoreEncoding,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, file.encode(encoding)).map_err(|e| Error::io(path, e))
}
