//! Report files: a per-event mAP table (CSV), an avg-mAP bar chart and a
//! confidence-interval plot (both standalone SVG).
//!
//! Values in this module are percentages. Rounding to two decimals happens
//! only when text is written.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::metrics::{mean, EvalReport};
use crate::eval::stats::ConfidenceInterval;

pub const TABLE_FILE: &str = "map_per_event.csv";
pub const BAR_CHART_FILE: &str = "avg_map.svg";
pub const INTERVAL_PLOT_FILE: &str = "paired_ttest.svg";

/// One method's per-event mAP column, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodColumn {
    pub name: String,
    pub values: Vec<f64>,
    /// Overrides the computed mean in the `avg-mAP` row, for transcribing
    /// published tables whose averages were computed from unrounded data.
    pub published_avg: Option<f64>,
}

impl MethodColumn {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        MethodColumn {
            name: name.into(),
            values,
            published_avg: None,
        }
    }

    pub fn with_published_avg(mut self, avg: f64) -> Self {
        self.published_avg = Some(avg);
        self
    }

    pub fn mean(&self) -> Result<f64> {
        mean(&self.values)
    }

    /// The value reported in the `avg-mAP` row.
    pub fn avg(&self) -> Result<f64> {
        match self.published_avg {
            Some(avg) => Ok(avg),
            None => self.mean(),
        }
    }
}

impl EvalReport {
    /// Converts fractions to a percent column.
    pub fn to_column(&self, name: impl Into<String>) -> MethodColumn {
        MethodColumn::new(name, self.events.iter().map(|e| 100.0 * e.map).collect())
    }

    pub fn event_ids(&self) -> Vec<String> {
        self.events.iter().map(|e| e.event_id.clone()).collect()
    }
}

/// Methods side by side over the same events.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub event_ids: Vec<String>,
    pub methods: Vec<MethodColumn>,
}

impl MetricTable {
    pub fn new(event_ids: Vec<String>, methods: Vec<MethodColumn>) -> Result<Self> {
        if event_ids.is_empty() {
            return Err(Error::invalid("metric table needs at least one event"));
        }
        for m in &methods {
            if m.values.len() != event_ids.len() {
                return Err(Error::invalid(format!(
                    "method `{}` has {} values for {} events",
                    m.name,
                    m.values.len(),
                    event_ids.len()
                )));
            }
        }
        Ok(MetricTable { event_ids, methods })
    }

    pub fn method(&self, name: &str) -> Option<&MethodColumn> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Header `event_id,<method>,...`, one row per event, final
    /// `avg-mAP` row; two decimals.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::invalid(format!("csv encoding failed: {e}"));
        let mut header = vec!["event_id".to_owned()];
        header.extend(self.methods.iter().map(|m| m.name.clone()));
        w.write_record(&header).map_err(io)?;
        for (i, id) in self.event_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.methods.iter().map(|m| format!("{:.2}", m.values[i])));
            w.write_record(&row).map_err(io)?;
        }
        let mut avg = vec!["avg-mAP".to_owned()];
        for m in &self.methods {
            avg.push(format!("{:.2}", m.avg()?));
        }
        w.write_record(&avg).map_err(io)?;
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Reads `event_id,value` rows. A leading `event_id,...` header is
/// skipped.
pub fn parse_metric_column(text: &str, source: &str) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(source, format!("record {}", i + 1), e.to_string()))?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && record.get(0) == Some("event_id") {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::format(
                source,
                format!("line {line}"),
                format!("expected `event_id,value`, got {} fields", record.len()),
            ));
        }
        let value: f64 = record[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::format(source, format!("line {line}"), format!("bad value `{}`", &record[1])))?;
        if rows.iter().any(|(id, _)| id == &record[0]) {
            return Err(Error::format(source, format!("line {line}"), format!("duplicate event `{}`", &record[0])));
        }
        rows.push((record[0].to_owned(), value));
    }
    if rows.is_empty() {
        return Err(Error::format(source, "end of file", "no rows"));
    }
    Ok(rows)
}

pub fn read_metric_column(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metric_column(&text, &path.display().to_string())
}

/// Pairs two metric columns by event id, in the order of `a`.
pub fn align_columns(a: &[(String, f64)], b: &[(String, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("columns cover {} and {} events", a.len(), b.len())));
    }
    let mut xs = Vec::with_capacity(a.len());
    let mut ys = Vec::with_capacity(a.len());
    for (id, x) in a {
        let y = b
            .iter()
            .find(|(other, _)| other == id)
            .ok_or_else(|| Error::invalid(format!("event `{id}` missing from second column")))?
            .1;
        xs.push(*x);
        ys.push(y);
    }
    Ok((xs, ys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub interval: ConfidenceInterval,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Maps values to SVG y coordinates (which grow downward).
#[derive(Debug, Clone, Copy)]
struct YScale {
    min: f64,
    max: f64,
}

impl YScale {
    fn covering(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max) = (0.0f64, 0.0f64);
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if max - min < 1e-12 {
            max = min + 1.0;
        }
        let pad = 0.05 * (max - min);
        YScale {
            min: if min < 0.0 { min - pad } else { min },
            max: max + pad,
        }
    }

    fn y(&self, value: f64) -> f64 {
        let plot = HEIGHT - 2.0 * MARGIN;
        MARGIN + plot * (self.max - value) / (self.max - self.min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub baseline_y: f64,
    pub bars: Vec<Bar>,
}

impl BarChart {
    pub fn layout(items: &[(String, f64)]) -> Self {
        let scale = YScale::covering(items.iter().map(|(_, v)| *v));
        let baseline_y = scale.y(0.0);
        let slot = (WIDTH - 2.0 * MARGIN) / items.len().max(1) as f64;
        let bars = items
            .iter()
            .enumerate()
            .map(|(i, (label, value))| {
                let top = scale.y(*value);
                Bar {
                    label: label.clone(),
                    value: *value,
                    x: MARGIN + slot * i as f64 + 0.15 * slot,
                    y: top.min(baseline_y),
                    width: 0.7 * slot,
                    height: (baseline_y - top).abs(),
                }
            })
            .collect();
        BarChart { baseline_y, bars }
    }

    pub fn to_svg(&self, title: &str) -> String {
        let mut s = svg_open(title);
        for b in &self.bars {
            writeln!(
                s,
                r##"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4a7ab7" data-value="{:.2}"/>"##,
                b.x, b.y, b.width, b.height, b.value
            )
            .unwrap();
            let cx = b.x + b.width / 2.0;
            writeln!(
                s,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="12">{:.2}</text>"#,
                b.y - 4.0,
                b.value
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
                HEIGHT - MARGIN + 16.0,
                escape(&b.label)
            )
            .unwrap();
        }
        axis_line(&mut s, self.baseline_y, "baseline");
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMark {
    pub label: String,
    pub x: f64,
    pub y_lower: f64,
    pub y_upper: f64,
    pub y_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPlot {
    pub zero_y: f64,
    pub marks: Vec<IntervalMark>,
}

impl IntervalPlot {
    pub fn layout(comparisons: &[Comparison]) -> Self {
        let scale = YScale::covering(
            comparisons
                .iter()
                .flat_map(|c| [c.interval.lower, c.interval.upper]),
        );
        let slot = (WIDTH - 2.0 * MARGIN) / comparisons.len().max(1) as f64;
        let marks = comparisons
            .iter()
            .enumerate()
            .map(|(i, c)| IntervalMark {
                label: c.label.clone(),
                x: MARGIN + slot * (i as f64 + 0.5),
                y_lower: scale.y(c.interval.lower),
                y_upper: scale.y(c.interval.upper),
                y_mean: scale.y(c.interval.mean_difference),
            })
            .collect();
        IntervalPlot {
            zero_y: scale.y(0.0),
            marks,
        }
    }

    pub fn to_svg(&self, title: &str) -> String {
        let mut s = svg_open(title);
        axis_line(&mut s, self.zero_y, "zero");
        for m in &self.marks {
            writeln!(
                s,
                r##"<line class="interval" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#b7484a" stroke-width="3"/>"##,
                m.y_lower,
                m.y_upper,
                x = m.x
            )
            .unwrap();
            for y in [m.y_lower, m.y_upper] {
                writeln!(
                    s,
                    r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#b7484a"/>"##,
                    m.x - 8.0,
                    m.x + 8.0
                )
                .unwrap();
            }
            writeln!(
                s,
                r##"<circle class="mean" cx="{:.2}" cy="{:.2}" r="4" fill="#b7484a"/>"##,
                m.x, m.y_mean
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
                m.x,
                HEIGHT - MARGIN + 16.0,
                escape(&m.label)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn axis_line(s: &mut String, y: f64, class: &str) {
    writeln!(
        s,
        r##"<line class="{class}" x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#333" stroke-dasharray="4 3"/>"##,
        WIDTH - MARGIN
    )
    .unwrap();
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub bar_chart: PathBuf,
    pub interval_plot: PathBuf,
}

/// Writes the CSV table, the avg-mAP bar chart and the interval plot into
/// `out_dir`, creating it if needed.
pub fn emit_report(
    table: &MetricTable,
    comparisons: &[Comparison],
    out_dir: impl AsRef<Path>,
) -> Result<ReportFiles> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = ReportFiles {
        table: out_dir.join(TABLE_FILE),
        bar_chart: out_dir.join(BAR_CHART_FILE),
        interval_plot: out_dir.join(INTERVAL_PLOT_FILE),
    };
    let write = |path: &Path, text: String| fs::write(path, text).map_err(|e| Error::io(path, e));

    write(&files.table, table.to_csv()?)?;
    let bars = table
        .methods
        .iter()
        .map(|m| Ok((m.name.clone(), m.avg()?)))
        .collect::<Result<Vec<_>>>()?;
    write(&files.bar_chart, BarChart::layout(&bars).to_svg("avg-mAP (%)"))?;
    write(
        &files.interval_plot,
        IntervalPlot::layout(comparisons).to_svg("Paired t-test confidence intervals"),
    )?;
    Ok(files)
}
