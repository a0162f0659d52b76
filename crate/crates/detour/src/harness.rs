//! Scenario × provider evaluation runs, metric aggregation, and report
//! tables.
//!
//! Cells are isolated: one provider failure (a replay miss, a transport
//! error) becomes that cell's error string and the run continues. Aggregation
//! keeps full precision; rounding to two decimals happens only when a table
//! is rendered.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disruption::compile;
use crate::metrics::{default_depart, evaluate, MetricsReport, NetworkTimeProvider};
use crate::pipeline::{
    run_pipeline, IoMode, MapMode, PipelineMode, ProviderConfig, TranscriptStore, Transport,
};
use crate::scenario::Scenario;

/// One (scenario, provider, pipeline mode, map mode) evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub scenario_id: String,
    pub provider: String,
    pub pipeline_mode: PipelineMode,
    pub map_mode: MapMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_text: Option<String>,
}

pub struct EvalOptions<'a> {
    pub store: &'a TranscriptStore,
    pub transport: &'a dyn Transport,
    pub io_mode: IoMode,
    pub depart: DateTime<FixedOffset>,
    /// Maximum cells evaluated concurrently; 1 runs sequentially.
    pub concurrency: usize,
}

impl<'a> EvalOptions<'a> {
    pub fn new(store: &'a TranscriptStore, transport: &'a dyn Transport, io_mode: IoMode) -> Self {
        Self {
            store,
            transport,
            io_mode,
            depart: default_depart(),
            concurrency: 4,
        }
    }
}

fn evaluate_cell(
    scenario: &Scenario,
    config: &ProviderConfig,
    pipeline_mode: PipelineMode,
    map_mode: MapMode,
    options: &EvalOptions<'_>,
) -> EvalCell {
    let mut cell = EvalCell {
        scenario_id: scenario.id.clone(),
        provider: config.name.clone(),
        pipeline_mode,
        map_mode,
        report: None,
        error: None,
        plan_text: None,
        summary_text: None,
    };
    let outcome = (|| -> Result<MetricsReport, String> {
        let network = scenario.load_network().map_err(|e| e.to_string())?;
        let constraints = compile(&network, &scenario.disruption).map_err(|e| e.to_string())?;
        let run = run_pipeline(
            scenario,
            config,
            pipeline_mode,
            map_mode,
            options.store,
            options.io_mode,
            options.transport,
        )
        .map_err(|e| e.to_string())?;
        cell.plan_text = Some(run.plan_text.clone());
        cell.summary_text = Some(run.summary_text.clone());
        let provider = NetworkTimeProvider::new(&network);
        evaluate(
            &network,
            &constraints,
            &scenario.origin_name,
            &scenario.dest_name,
            &run.parse,
            &provider,
            &options.depart,
        )
        .map_err(|e| e.to_string())
    })();
    match outcome {
        Ok(report) => cell.report = Some(report),
        Err(message) => cell.error = Some(message),
    }
    cell
}

/// Evaluate every scenario × provider cell under one (pipeline, maps) mode.
/// Output order is deterministic regardless of concurrency: scenarios outer,
/// providers inner.
pub fn run_evaluation(
    scenarios: &[Scenario],
    providers: &[ProviderConfig],
    pipeline_mode: PipelineMode,
    map_mode: MapMode,
    options: &EvalOptions<'_>,
) -> Vec<EvalCell> {
    let jobs: Vec<(&Scenario, &ProviderConfig)> = scenarios
        .iter()
        .flat_map(|s| providers.iter().map(move |p| (s, p)))
        .collect();

    let workers = options.concurrency.max(1).min(jobs.len().max(1));
    if workers <= 1 {
        return jobs
            .into_iter()
            .map(|(s, p)| evaluate_cell(s, p, pipeline_mode, map_mode, options))
            .collect();
    }

    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<EvalCell>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = {
                    let mut cursor = next.lock().expect("job cursor poisoned");
                    let index = *cursor;
                    *cursor += 1;
                    index
                };
                if index >= jobs.len() {
                    break;
                }
                let (scenario, provider) = jobs[index];
                let cell = evaluate_cell(scenario, provider, pipeline_mode, map_mode, options);
                results.lock().expect("results poisoned")[index] = Some(cell);
            });
        }
    });
    results
        .into_inner()
        .expect("results poisoned")
        .into_iter()
        .map(|cell| cell.expect("every job ran"))
        .collect()
}

/// Evaluate the full ablation matrix: both pipeline modes × both map modes.
pub fn run_matrix(
    scenarios: &[Scenario],
    providers: &[ProviderConfig],
    options: &EvalOptions<'_>,
) -> Vec<EvalCell> {
    let mut cells = Vec::new();
    for pipeline_mode in [PipelineMode::TwoStage, PipelineMode::SingleStage] {
        for map_mode in [MapMode::WithMaps, MapMode::WithoutMaps] {
            cells.extend(run_evaluation(
                scenarios,
                providers,
                pipeline_mode,
                map_mode,
                options,
            ));
        }
    }
    cells
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub provider: String,
    pub pipeline_mode: PipelineMode,
    pub map_mode: MapMode,
}

/// Aggregated metrics for one group, at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// Fraction of cells passing connectivity.
    pub connectivity: f64,
    /// Fraction of cells passing avoidance.
    pub avoidance: f64,
    /// Mean normalized travel time (invalid results count as 1.0).
    pub normalized_time: f64,
    /// Mean transfers over valid routes; absent when no route was valid.
    pub mean_transfers: Option<f64>,
    /// Fraction of cells with a route-format violation.
    pub violation_rate: f64,
    pub valid_routes: usize,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub groups: BTreeMap<GroupKey, GroupStats>,
    /// Providers in first-seen order, for stable table columns.
    pub provider_order: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("no successful evaluations to aggregate")]
    EmptyGroup,
}

/// Fold evaluated cells into per-group means. Cells that errored are
/// excluded; permutation of the input never changes the result.
pub fn aggregate(cells: &[EvalCell]) -> Result<AggregateReport, AggregateError> {
    let mut provider_order: Vec<String> = Vec::new();
    for cell in cells {
        if !provider_order.contains(&cell.provider) {
            provider_order.push(cell.provider.clone());
        }
    }

    let mut grouped: BTreeMap<GroupKey, Vec<&MetricsReport>> = BTreeMap::new();
    for cell in cells {
        if let Some(report) = &cell.report {
            grouped
                .entry(GroupKey {
                    provider: cell.provider.clone(),
                    pipeline_mode: cell.pipeline_mode,
                    map_mode: cell.map_mode,
                })
                .or_default()
                .push(report);
        }
    }
    if grouped.is_empty() {
        return Err(AggregateError::EmptyGroup);
    }

    // summing in sorted order makes the means permutation-invariant bit for bit
    let stable_mean = |mut values: Vec<f64>| -> f64 {
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        values.into_iter().sum::<f64>() / n
    };

    let mut groups = BTreeMap::new();
    for (key, reports) in grouped {
        let n = reports.len() as f64;
        let frac = |pred: &dyn Fn(&MetricsReport) -> bool| {
            reports.iter().filter(|r| pred(r)).count() as f64 / n
        };
        let valid: Vec<&&MetricsReport> = reports.iter().filter(|r| r.valid).collect();
        let mean_transfers = if valid.is_empty() {
            None
        } else {
            Some(stable_mean(valid.iter().map(|r| r.transfers as f64).collect()))
        };
        groups.insert(
            key,
            GroupStats {
                connectivity: frac(&|r| r.connected),
                avoidance: frac(&|r| r.avoided),
                normalized_time: stable_mean(reports.iter().map(|r| r.normalized_time).collect()),
                mean_transfers,
                violation_rate: frac(&|r| r.format_violation),
                valid_routes: valid.len(),
                cells: reports.len(),
            },
        );
    }
    Ok(AggregateReport {
        groups,
        provider_order,
    })
}

// ---------------------------------------------------------------------------
// Table rendering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableLayout {
    /// Provider columns, two-stage with-maps cells.
    Models,
    /// Per provider: with-maps vs without-maps (two-stage).
    MapAblation,
    /// Per provider: two-stage vs single-stage (with maps); adds the
    /// format-violations row.
    SummaryAblation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTable {
    pub text: String,
    pub csv: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("missing column: {0}")]
    MissingColumn(String),
}

struct Column<'a> {
    header: String,
    stats: &'a GroupStats,
}

fn columns_for<'a>(
    report: &'a AggregateReport,
    layout: TableLayout,
) -> Result<Vec<Column<'a>>, RenderError> {
    let get = |provider: &str, pipeline_mode: PipelineMode, map_mode: MapMode| {
        report.groups.get(&GroupKey {
            provider: provider.to_string(),
            pipeline_mode,
            map_mode,
        })
    };
    let mut columns = Vec::new();
    match layout {
        TableLayout::Models => {
            for provider in &report.provider_order {
                if let Some(stats) = get(provider, PipelineMode::TwoStage, MapMode::WithMaps) {
                    columns.push(Column {
                        header: provider.clone(),
                        stats,
                    });
                }
            }
            if columns.len() < 2 {
                return Err(RenderError::MissingColumn(
                    "models layout needs two-stage with-maps results for at least two providers"
                        .into(),
                ));
            }
        }
        TableLayout::MapAblation => {
            for provider in &report.provider_order {
                let with = get(provider, PipelineMode::TwoStage, MapMode::WithMaps);
                let without = get(provider, PipelineMode::TwoStage, MapMode::WithoutMaps);
                if let (Some(with), Some(without)) = (with, without) {
                    columns.push(Column {
                        header: format!("{provider} w/ map"),
                        stats: with,
                    });
                    columns.push(Column {
                        header: format!("{provider} w/o map"),
                        stats: without,
                    });
                }
            }
            if columns.is_empty() {
                return Err(RenderError::MissingColumn(
                    "map-ablation layout needs with-maps and without-maps results".into(),
                ));
            }
        }
        TableLayout::SummaryAblation => {
            for provider in &report.provider_order {
                let two = get(provider, PipelineMode::TwoStage, MapMode::WithMaps);
                let one = get(provider, PipelineMode::SingleStage, MapMode::WithMaps);
                if let (Some(two), Some(one)) = (two, one) {
                    columns.push(Column {
                        header: format!("{provider} two-stage"),
                        stats: two,
                    });
                    columns.push(Column {
                        header: format!("{provider} single-stage"),
                        stats: one,
                    });
                }
            }
            if columns.is_empty() {
                return Err(RenderError::MissingColumn(
                    "summary-ablation layout needs two-stage and single-stage results".into(),
                ));
            }
        }
    }
    Ok(columns)
}

fn format_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "—".to_string(),
    }
}

/// Render an aggregate as a plain-text table plus CSV (`metric,<column...>`).
/// Values are rounded to two decimals here and nowhere else.
pub fn render_table(
    report: &AggregateReport,
    layout: TableLayout,
) -> Result<RenderedTable, RenderError> {
    let columns = columns_for(report, layout)?;

    let mut rows: Vec<(String, String, Vec<String>)> = Vec::new(); // (text label, csv label, values)
    let mut push_row = |label: &str, arrow: &str, values: Vec<String>| {
        rows.push((format!("{label} {arrow}"), label.to_string(), values));
    };
    push_row(
        "Connectivity",
        "↑",
        columns.iter().map(|c| format_cell(Some(c.stats.connectivity))).collect(),
    );
    push_row(
        "Avoidance",
        "↑",
        columns.iter().map(|c| format_cell(Some(c.stats.avoidance))).collect(),
    );
    push_row(
        "Approx. Time",
        "↓",
        columns.iter().map(|c| format_cell(Some(c.stats.normalized_time))).collect(),
    );
    push_row(
        "# Transfers",
        "↓",
        columns.iter().map(|c| format_cell(c.stats.mean_transfers)).collect(),
    );
    if layout == TableLayout::SummaryAblation {
        push_row(
            "Violations of format",
            "↓",
            columns.iter().map(|c| format_cell(Some(c.stats.violation_rate))).collect(),
        );
    }

    // text table
    let headers: Vec<String> = std::iter::once("Metric".to_string())
        .chain(columns.iter().map(|c| c.header.clone()))
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for (label, _, values) in &rows {
        widths[0] = widths[0].max(label.chars().count());
        for (i, value) in values.iter().enumerate() {
            widths[i + 1] = widths[i + 1].max(value.chars().count());
        }
    }
    let pad = |text: &str, width: usize| {
        let len = text.chars().count();
        format!("{text}{}", " ".repeat(width.saturating_sub(len)))
    };
    let mut text = String::new();
    let header_line: Vec<String> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| pad(h, widths[i]))
        .collect();
    text.push_str(&header_line.join(" | "));
    text.push('\n');
    text.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    text.push('\n');
    for (label, _, values) in &rows {
        let mut line = vec![pad(label, widths[0])];
        for (i, value) in values.iter().enumerate() {
            line.push(pad(value, widths[i + 1]));
        }
        text.push_str(&line.join(" | "));
        text.push('\n');
    }

    // csv
    let mut csv = String::new();
    csv.push_str("metric");
    for column in &columns {
        csv.push(',');
        csv.push_str(&column.header);
    }
    csv.push('\n');
    for (_, label, values) in &rows {
        csv.push_str(label);
        for value in values {
            csv.push(',');
            csv.push_str(value);
        }
        csv.push('\n');
    }

    Ok(RenderedTable { text, csv })
}

// ---------------------------------------------------------------------------
// Results files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub cells: Vec<EvalCell>,
}

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("cannot access results file {0}: {1}")]
    Io(std::path::PathBuf, String),
    #[error("results file {0} is malformed: {1}")]
    Malformed(std::path::PathBuf, String),
}

pub fn save_results(path: impl AsRef<Path>, cells: &[EvalCell]) -> Result<(), ResultsError> {
    let path = path.as_ref();
    let file = ResultsFile {
        cells: cells.to_vec(),
    };
    let json = serde_json::to_string_pretty(&file).expect("results serialization cannot fail");
    std::fs::write(path, json).map_err(|e| ResultsError::Io(path.to_path_buf(), e.to_string()))
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<EvalCell>, ResultsError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ResultsError::Io(path.to_path_buf(), e.to_string()))?;
    let file: ResultsFile = serde_json::from_str(&text)
        .map_err(|e| ResultsError::Malformed(path.to_path_buf(), e.to_string()))?;
    Ok(file.cells)
}
