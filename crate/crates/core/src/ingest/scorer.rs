//! Line protocol for external frame scorers.
//!
//! The adapter is a child process. It receives one frame reference per line
//! on stdin and answers with one line of `dim` space-separated decimal scores
//! per reference on stdout, in the same order. stderr is passed through.
//! Exit status 0 means success.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::thread;

use crate::error::{Error, Result};
use crate::kernel::FrameAttributeMatrix;

/// Program plus arguments used to launch a scorer adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScorerCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl ScorerCommand {
    pub fn new(program: impl Into<String>) -> Self {
        ScorerCommand {
            program: program.into(),
            args: Vec::new(),
        }
    }

    pub fn arg(mut self, arg: impl Into<String>) -> Self {
        self.args.push(arg.into());
        self
    }

    pub fn args<I, S>(mut self, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.args.extend(args.into_iter().map(Into::into));
        self
    }
}

/// Parses one response line into exactly `dim` scores.
pub fn parse_score_line(line: &str, dim: usize, line_no: usize) -> Result<Vec<f64>> {
    let protocol = |message: String| Error::ScorerProtocol {
        line: line_no,
        message,
    };
    let mut scores = Vec::with_capacity(dim);
    for field in line.split_whitespace() {
        let v: f64 = field
            .parse()
            .map_err(|_| protocol(format!("not a number: `{field}`")))?;
        if !v.is_finite() {
            return Err(protocol(format!("non-finite score `{field}`")));
        }
        if v < 0.0 {
            return Err(protocol(format!("negative score `{field}`")));
        }
        scores.push(v);
    }
    if scores.len() != dim {
        return Err(protocol(format!("expected {dim} scores, got {}", scores.len())));
    }
    Ok(scores)
}

/// Scores `frames` with the adapter, preserving their order.
///
/// stdin is fed from a separate thread so a chatty adapter cannot deadlock
/// against a full pipe.
pub fn run_scorer(
    command: &ScorerCommand,
    frames: &[String],
    dim: usize,
) -> Result<FrameAttributeMatrix> {
    if let Some(bad) = frames.iter().find(|f| f.contains('\n')) {
        return Err(Error::invalid(format!("frame reference contains a newline: {bad:?}")));
    }
    let mut child = Command::new(&command.program)
        .args(&command.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::io(&command.program, e))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input: String = frames.iter().map(|f| format!("{f}\n")).collect();
    let writer = thread::spawn(move || {
        // a broken pipe here surfaces below as a short or failed response
        let _ = stdin.write_all(input.as_bytes());
    });

    let stdout = child.stdout.take().expect("piped stdout");
    let mut matrix = FrameAttributeMatrix::new(dim)?;
    let mut outcome = Ok(());
    for (i, line) in BufReader::new(stdout).lines().enumerate() {
        let line_no = i + 1;
        let line = match line {
            Ok(line) => line,
            Err(e) => {
                outcome = Err(Error::io(&command.program, e));
                break;
            }
        };
        if line_no > frames.len() {
            outcome = Err(Error::ScorerProtocol {
                line: line_no,
                message: format!("unexpected extra output; only {} frames sent", frames.len()),
            });
            break;
        }
        match parse_score_line(&line, dim, line_no) {
            Ok(scores) => matrix.push(&scores)?,
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }

    if outcome.is_err() {
        let _ = child.kill();
    }
    let status = child.wait().map_err(|e| Error::io(&command.program, e))?;
    let _ = writer.join();
    outcome?;

    if !status.success() {
        return Err(Error::ScorerProtocol {
            line: matrix.len() + 1,
            message: format!("adapter exited with {status}"),
        });
    }
    if matrix.len() != frames.len() {
        return Err(Error::ScorerProtocol {
            line: matrix.len() + 1,
            message: format!(
                "adapter closed its output after {} of {} frames",
                matrix.len(),
                frames.len()
            ),
        });
    }
    Ok(matrix)
}
