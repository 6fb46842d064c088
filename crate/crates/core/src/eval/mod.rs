//! Retrieval evaluation: AP, per-event mAP, avg-mAP, paired t-tests and
//! report emission.

mod metrics;
mod report;
mod stats;

pub use metrics::{
    average_precision, avg_map, evaluate, map_per_event, mean, EvalReport, EventResult, QueryAp,
    RelevanceJudgments,
};
pub use report::{
    align_columns, emit_report, parse_metric_column, read_metric_column, Bar, BarChart,
    Comparison, IntervalMark, IntervalPlot, MethodColumn, MetricTable, ReportFiles,
    BAR_CHART_FILE, INTERVAL_PLOT_FILE, TABLE_FILE,
};
pub use stats::{paired_ttest, t_cdf, t_quantile, ConfidenceInterval, DEFAULT_ALPHA};
