//! `boa`: command-line driver for the bag-of-attributes retrieval pipeline.
//!
//! Exit codes: 0 success, 1 data or validation error, 2 usage error,
//! 3 I/O error.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use boa_core::eval::{
    align_columns, emit_report, evaluate, paired_ttest, read_metric_column, Comparison,
    MethodColumn, MetricTable,
};
use boa_core::index::{build_store, load_store, save_store, BuildConfig, ScoreDir, StoreMetadata};
use boa_core::ingest::{parse_manifest, run_scorer, sample_plan, write_frame_scores, FrameScoreFile, ScoreEncoding, ScorerCommand};
use boa_core::retrieval::{query_manifest, read_ranked_lists, write_ranked_lists};
use boa_core::synth::{generate, SynthConfig, SynthDataset};
use boa_core::{CodingMode, NormMode, PoolingMode, Provenance};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "boa", version, about = "Bag-of-attributes video event retrieval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print frame timestamps for fixed-rate sampling of a video.
    SamplePlan {
        /// Video duration in seconds.
        #[arg(long)]
        duration: f64,
        /// Sampling rate in frames per second.
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Native frame rate; adds a source frame index column.
        #[arg(long)]
        fps: Option<f64>,
    },
    /// Score frames with an external adapter and write a frame-score file.
    Score {
        /// Adapter program.
        #[arg(long)]
        adapter: String,
        /// Argument passed to the adapter (repeatable).
        #[arg(long = "adapter-arg", allow_hyphen_values = true)]
        adapter_args: Vec<String>,
        /// File with one frame reference per line (`-` for stdin).
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        video_id: String,
        #[arg(long)]
        dim: usize,
        /// Output file; `.csv` selects CSV, anything else BOAF.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a vector store from a manifest and frame-score files.
    Index {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory of `<video_id>.boaf` / `<video_id>.csv` files.
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Creation time recorded in the store (Unix seconds).
        #[arg(long, env = "SOURCE_DATE_EPOCH", default_value_t = 0)]
        created: u64,
        #[command(flatten)]
        workers: WorkerArgs,
    },
    /// Rank every event's database for each of its queries.
    Query {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Ranked-list dump to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        expect: ExpectArgs,
        #[command(flatten)]
        workers: WorkerArgs,
    },
    /// Compute per-event mAP and avg-mAP from a ranked-list dump.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        ranked: PathBuf,
        /// Directory for the CSV table, charts and per-query APs.
        #[arg(long)]
        out_dir: PathBuf,
        /// Column name in the report.
        #[arg(long, default_value = "BoA")]
        method: String,
    },
    /// Paired t-test between two `event_id,value` metric columns.
    Ttest {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Generate a synthetic event dataset.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: SynthArgs,
        #[arg(long, value_enum, default_value_t = FileFormat::Boaf)]
        format: FileFormat,
    },
    /// Scorer adapter that serves synthetic frame scores over stdin/stdout.
    SynthScorer {
        #[command(flatten)]
        config: SynthArgs,
    },
    /// Compare methods: table, avg-mAP chart and paired t-test intervals.
    Report {
        /// `NAME=PATH` of an `event_id,value` column (repeatable, in order).
        #[arg(long = "column", required = true)]
        columns: Vec<String>,
        /// `NAME=VALUE` published avg-mAP overriding the computed mean.
        #[arg(long = "published-avg")]
        published: Vec<String>,
        /// Method compared against every other column.
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Validate a manifest and print its per-event counts.
    Manifest {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Coding {
    Soft,
    Hard,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pooling {
    Max,
    Avg,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    None,
    L1,
    L2,
}

impl From<Coding> for CodingMode {
    fn from(c: Coding) -> Self {
        match c {
            Coding::Soft => CodingMode::Soft,
            Coding::Hard => CodingMode::Hard,
        }
    }
}

impl From<Pooling> for PoolingMode {
    fn from(p: Pooling) -> Self {
        match p {
            Pooling::Max => PoolingMode::Max,
            Pooling::Avg => PoolingMode::Avg,
            Pooling::Sum => PoolingMode::Sum,
        }
    }
}

impl From<Norm> for NormMode {
    fn from(n: Norm) -> Self {
        match n {
            Norm::None => NormMode::None,
            Norm::L1 => NormMode::L1,
            Norm::L2 => NormMode::L2,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, value_enum, default_value_t = Coding::Soft)]
    coding: Coding,
    #[arg(long, value_enum, default_value_t = Pooling::Max)]
    pooling: Pooling,
    #[arg(long, value_enum, default_value_t = Norm::None)]
    norm: Norm,
}

impl PipelineArgs {
    fn provenance(&self) -> Provenance {
        Provenance::new(self.coding.into(), self.pooling.into(), self.norm.into())
    }
}

/// When any flag is given, the store must match it.
#[derive(Args)]
struct ExpectArgs {
    #[arg(long, value_enum)]
    coding: Option<Coding>,
    #[arg(long, value_enum)]
    pooling: Option<Pooling>,
    #[arg(long, value_enum)]
    norm: Option<Norm>,
}

#[derive(Args)]
struct WorkerArgs {
    /// Worker threads (0 = one per core).
    #[arg(long, env = "BOA_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Boaf,
    Csv,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the 13 EVVE per-event counts instead of uniform counts.
    #[arg(long)]
    evve_shape: bool,
    #[arg(long, default_value_t = 4)]
    events: usize,
    #[arg(long, default_value_t = 3)]
    queries: usize,
    #[arg(long, default_value_t = 6)]
    positives: usize,
    #[arg(long, default_value_t = 10)]
    negatives: usize,
    #[arg(long, default_value_t = 256)]
    dim: usize,
    #[arg(long, default_value_t = 16)]
    signature_size: usize,
    #[arg(long, default_value_t = 4)]
    frames_min: usize,
    #[arg(long, default_value_t = 12)]
    frames_max: usize,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Fraction of each signature shared with the next event's.
    #[arg(long, default_value_t = 0.0)]
    overlap: f64,
}

impl SynthArgs {
    fn config(&self) -> SynthConfig {
        let base = if self.evve_shape {
            SynthConfig::evve_shaped()
        } else {
            SynthConfig::uniform(self.events, self.queries, self.positives, self.negatives)
        };
        SynthConfig {
            dim: self.dim,
            signature_size: self.signature_size,
            frames_per_video: (self.frames_min, self.frames_max),
            noise_sigma: self.sigma,
            overlap: self.overlap,
            seed: self.seed,
            ..base
        }
    }
}

fn split_pair<'a>(text: &'a str, flag: &str) -> Result<(&'a str, &'a str)> {
    text.split_once('=')
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| anyhow!(UsageError(format!("{flag} expects NAME=VALUE, got `{text}`"))))
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let lines: io::Result<Vec<String>> = if path == Path::new("-") {
        io::stdin().lock().lines().collect()
    } else {
        let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        io::BufReader::new(file).lines().collect()
    };
    Ok(lines?
        .into_iter()
        .filter(|l| !l.trim().is_empty())
        .collect())
}

fn run(cli: Cli) -> Result<()> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::SamplePlan { duration, rate, fps } => {
            let mut plan = sample_plan(duration, rate)?;
            if let Some(fps) = fps {
                plan = plan.with_native_fps(fps)?;
            }
            match plan.frame_indices() {
                Some(indices) => {
                    for (t, i) in plan.timestamps.iter().zip(indices) {
                        writeln!(out, "{t:.6}\t{i}")?;
                    }
                }
                None => {
                    for t in &plan.timestamps {
                        writeln!(out, "{t:.6}")?;
                    }
                }
            }
        }
        Command::Score {
            adapter,
            adapter_args,
            frames,
            video_id,
            dim,
            out: dest,
        } => {
            let refs = read_lines(&frames)?;
            if refs.is_empty() {
                bail!(boa_core::Error::EmptyVideo);
            }
            let command = ScorerCommand::new(adapter).args(adapter_args);
            let matrix = run_scorer(&command, &refs, dim)?;
            let file = FrameScoreFile::from_matrix(video_id, &matrix)?;
            write_frame_scores(&file, &dest, ScoreEncoding::from_path(&dest))?;
            eprintln!("scored {} frames -> {}", file.frame_count(), dest.display());
        }
        Command::Index {
            manifest,
            scores,
            out: dest,
            pipeline,
            created,
            workers,
        } => {
            let manifest = parse_manifest(&manifest)?;
            let config = BuildConfig {
                provenance: pipeline.provenance(),
                workers: workers.workers,
                metadata: StoreMetadata {
                    created_unix: created,
                    ..StoreMetadata::default()
                },
            };
            let store = build_store(&manifest, &ScoreDir::new(scores), &config)?;
            save_store(&store, &dest)?;
            eprintln!(
                "indexed {} videos (dim {}, {}) -> {}",
                store.len(),
                store.dim(),
                store.provenance(),
                dest.display()
            );
        }
        Command::Query {
            manifest,
            store,
            out: dest,
            expect,
            workers,
        } => {
            let manifest = parse_manifest(&manifest)?;
            let loaded = load_store(&store)?;
            if expect.coding.is_some() || expect.pooling.is_some() || expect.norm.is_some() {
                let found = loaded.provenance();
                let expected = Provenance::new(
                    expect.coding.map_or(found.coding, Into::into),
                    expect.pooling.map_or(found.pooling, Into::into),
                    expect.norm.map_or(found.norm, Into::into),
                );
                if found != expected {
                    bail!(boa_core::Error::ProvenanceMismatch { expected, found });
                }
            }
            let lists = query_manifest(&manifest, &loaded, workers.workers)?;
            write_ranked_lists(&lists, &dest)?;
            eprintln!("wrote {} ranked lists -> {}", lists.len(), dest.display());
        }
        Command::Evaluate {
            manifest,
            ranked,
            out_dir,
            method,
        } => {
            let manifest = parse_manifest(&manifest)?;
            let lists = read_ranked_lists(&ranked)?;
            let report = evaluate(&manifest, &lists)?;
            let table = MetricTable::new(report.event_ids(), vec![report.to_column(&method)])?;
            let files = emit_report(&table, &[], &out_dir)?;
            let per_query = out_dir.join("per_query_ap.tsv");
            let mut text = String::from("event_id\tquery_id\tap\n");
            for e in &report.events {
                for q in &e.queries {
                    text.push_str(&format!("{}\t{}\t{:.6}\n", e.event_id, q.query_id, q.ap));
                }
            }
            fs::write(&per_query, text)
                .map_err(|e| boa_core::Error::Io { path: per_query.clone(), source: e })?;
            for e in &report.events {
                writeln!(out, "event {}: mAP {:.2}", e.event_id, 100.0 * e.map)?;
            }
            writeln!(out, "avg-mAP: {:.2}", 100.0 * report.avg_map)?;
            eprintln!("report -> {}", files.table.display());
        }
        Command::Ttest { a, b, alpha } => {
            let (xs, ys) = align_columns(&read_metric_column(&a)?, &read_metric_column(&b)?)?;
            let ci = paired_ttest(&xs, &ys, alpha)?;
            let level = 100.0 * (1.0 - alpha);
            writeln!(out, "pairs: {}", xs.len())?;
            writeln!(out, "mean difference: {:.4}", ci.mean_difference)?;
            writeln!(out, "t statistic: {:.4} (df {})", ci.t_statistic, ci.df)?;
            writeln!(out, "{level}% confidence interval: [{:.4}, {:.4}]", ci.lower, ci.upper)?;
            writeln!(out, "significant: {}", if ci.is_significant() { "yes" } else { "no" })?;
        }
        Command::Synth {
            out_dir,
            config,
            format,
        } => {
            let dataset = generate(&config.config())?;
            let encoding = match format {
                FileFormat::Boaf => ScoreEncoding::Binary,
                FileFormat::Csv => ScoreEncoding::Csv,
            };
            let manifest = dataset.write_to_dir(&out_dir, encoding)?;
            let counts = dataset.manifest.count_report();
            write!(out, "{counts}")?;
            eprintln!("wrote {} videos, manifest {}", dataset.files.len(), manifest.display());
        }
        Command::SynthScorer { config } => {
            let dataset = generate(&config.config())?;
            serve_synthetic_scores(&dataset)?;
        }
        Command::Report {
            columns,
            published,
            baseline,
            alpha,
            out_dir,
        } => {
            let mut event_ids: Option<Vec<String>> = None;
            let mut raw = Vec::new();
            for spec in &columns {
                let (name, path) = split_pair(spec, "--column")?;
                let rows = read_metric_column(path)?;
                raw.push((name.to_owned(), rows));
            }
            let mut methods = Vec::new();
            for (name, rows) in &raw {
                let ids = event_ids.get_or_insert_with(|| rows.iter().map(|(id, _)| id.clone()).collect());
                let reference: Vec<(String, f64)> = ids.iter().map(|id| (id.clone(), 0.0)).collect();
                let (_, values) = align_columns(&reference, rows)
                    .with_context(|| format!("column `{name}`"))?;
                methods.push(MethodColumn::new(name.clone(), values));
            }
            for spec in &published {
                let (name, value) = split_pair(spec, "--published-avg")?;
                let value: f64 = value
                    .parse()
                    .map_err(|_| UsageError(format!("bad --published-avg value `{value}`")))?;
                let column = methods
                    .iter_mut()
                    .find(|m| m.name == name)
                    .ok_or_else(|| UsageError(format!("--published-avg names unknown column `{name}`")))?;
                column.published_avg = Some(value);
            }
            let table = MetricTable::new(event_ids.unwrap_or_default(), methods)?;
            let mut comparisons = Vec::new();
            if let Some(base) = &baseline {
                let reference = table
                    .method(base)
                    .ok_or_else(|| UsageError(format!("--baseline names unknown column `{base}`")))?;
                for other in table.methods.iter().filter(|m| &m.name != base) {
                    let ci = paired_ttest(&reference.values, &other.values, alpha)?;
                    writeln!(
                        out,
                        "{base} - {}: mean {:.4}, CI [{:.4}, {:.4}], significant: {}",
                        other.name,
                        ci.mean_difference,
                        ci.lower,
                        ci.upper,
                        if ci.is_significant() { "yes" } else { "no" }
                    )?;
                    comparisons.push(Comparison {
                        label: format!("{base} - {}", other.name),
                        interval: ci,
                    });
                }
            }
            let files = emit_report(&table, &comparisons, &out_dir)?;
            for m in &table.methods {
                writeln!(out, "{}: avg-mAP {:.2}", m.name, m.avg()?)?;
            }
            eprintln!("report -> {}", files.table.parent().unwrap_or(&out_dir).display());
        }
        Command::Manifest { manifest } => {
            let manifest = parse_manifest(&manifest)?;
            write!(out, "{}", manifest.count_report())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Answers one line of scores per frame reference read from stdin.
fn serve_synthetic_scores(dataset: &SynthDataset) -> Result<()> {
    let stdin = io::stdin().lock();
    let mut stdout = io::BufWriter::new(io::stdout().lock());
    for (n, line) in stdin.lines().enumerate() {
        let line = line?;
        let reference = line.trim();
        let row = dataset
            .lookup(reference)
            .ok_or_else(|| anyhow!("line {}: unknown frame reference `{reference}`", n + 1))?;
        let fields: Vec<String> = row.iter().map(|&v| f64::from(v).to_string()).collect();
        writeln!(stdout, "{}", fields.join(" "))?;
        // adapters answer line by line
        stdout.flush()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<boa_core::Error>() {
            return if e.is_io() { 3 } else { 1 };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
