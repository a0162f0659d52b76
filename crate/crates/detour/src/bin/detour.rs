//! Command-line interface: network validation and import, deterministic
//! planning, route evaluation, pipeline runs, and report rendering.
//!
//! Machine-readable output goes to stdout, diagnostics to stderr. Exit
//! codes: 0 success, 1 input or configuration error, 2 no route exists,
//! 3 provider or transport failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, FixedOffset};
use clap::{Args, Parser, Subcommand};

use detour::disruption::DisruptionSpec;
use detour::gtfs::import_gtfs;
use detour::harness::{
    aggregate, load_results, render_table, run_evaluation, save_results, EvalCell, EvalOptions,
    TableLayout,
};
use detour::metrics::{default_depart, evaluate, NetworkTimeProvider};
use detour::pipeline::{
    load_provider_configs, HttpTransport, InvokeError, IoMode, MapMode, PipelineMode,
    RecordingTransport, TranscriptStore, Transport,
};
use detour::router::{plan, Objective, PlanError};
use detour::scenario::{load_scenario_file, load_scenarios};
use detour::{compile, load_network, parse_route, serialize_route};

#[derive(Parser)]
#[command(name = "detour", version, about = "Disruption-aware transit routing and route-evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate or import transit network documents.
    Network {
        #[command(subcommand)]
        action: NetworkAction,
    },
    /// Plan a journey with the deterministic constrained router.
    Plan(PlanArgs),
    /// Evaluate a proposed route text against a scenario.
    Evaluate(EvaluateArgs),
    /// Run the LLM pipeline across scenarios and providers.
    Llm {
        #[command(subcommand)]
        action: LlmAction,
    },
    /// Render aggregate tables from saved results.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum NetworkAction {
    /// Parse and validate a network document.
    Validate { path: PathBuf },
    /// Build a network document from a GTFS static feed directory.
    ImportGtfs {
        feed: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PlanArgs {
    origin: String,
    dest: String,
    #[arg(long)]
    network: PathBuf,
    #[arg(long, default_value = "min-time", value_parser = parse_objective)]
    objective: Objective,
    /// JSON file holding a disruption spec.
    #[arg(long)]
    disruption: Option<PathBuf>,
    /// Station name to avoid; repeatable.
    #[arg(long = "avoid-station")]
    avoid_stations: Vec<String>,
    /// Line label to disable; repeatable.
    #[arg(long = "disable-line")]
    disable_lines: Vec<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// File containing the route text to score (e.g. a summary-stage output).
    #[arg(long)]
    route: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_parser = parse_depart)]
    depart: Option<DateTime<FixedOffset>>,
}

#[derive(Subcommand)]
enum LlmAction {
    /// Evaluate scenario × provider cells through the pipeline.
    Run(LlmRunArgs),
}

#[derive(Args)]
struct LlmRunArgs {
    /// Scenario directory or single scenario file.
    #[arg(long, default_value_os_t = default_data_path("scenarios"))]
    scenarios: PathBuf,
    /// Provider config file (JSON array).
    #[arg(long = "provider-file", default_value_os_t = default_data_path("providers.json"))]
    provider_file: PathBuf,
    /// Provider selection: "all" or a comma-separated list of names.
    #[arg(long, default_value = "all")]
    providers: String,
    /// two-stage, single-stage, or both.
    #[arg(long, default_value = "two-stage")]
    pipeline: String,
    /// with, without, or both.
    #[arg(long, default_value = "with")]
    maps: String,
    /// live, record, or replay.
    #[arg(long, default_value = "replay")]
    io: String,
    #[arg(long, default_value_os_t = default_data_path("cassettes"))]
    cassettes: PathBuf,
    /// Where to write results JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, value_parser = parse_depart)]
    depart: Option<DateTime<FixedOffset>>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    /// models, map-ablation, or summary-ablation.
    #[arg(long)]
    layout: String,
    /// Also write the CSV rendering to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn default_data_path(leaf: &str) -> PathBuf {
    let base = std::env::var_os("DETOUR_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data"));
    base.join(leaf)
}

fn parse_objective(text: &str) -> Result<Objective, String> {
    match text {
        "min-time" => Ok(Objective::MinTime),
        "min-stops" => Ok(Objective::MinStops),
        other => Err(format!("unknown objective {other:?} (want min-time or min-stops)")),
    }
}

fn parse_depart(text: &str) -> Result<DateTime<FixedOffset>, String> {
    DateTime::parse_from_rfc3339(text).map_err(|e| format!("bad timestamp: {e}"))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn no_route(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn transport(message: impl ToString) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Network { action } => run_network(action),
        Command::Plan(args) => run_plan(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Llm {
            action: LlmAction::Run(args),
        } => run_llm(args),
        Command::Report(args) => run_report(args),
    }
}

fn run_network(action: NetworkAction) -> Result<(), Failure> {
    match action {
        NetworkAction::Validate { path } => {
            let network = load_network(&read_file(&path)?).map_err(Failure::input)?;
            eprintln!(
                "{}: valid ({} stations, {} lines, {} bike stations)",
                path.display(),
                network.stations().len(),
                network.lines().len(),
                network.bike_stations().len()
            );
            Ok(())
        }
        NetworkAction::ImportGtfs { feed, out } => {
            let network = import_gtfs(&feed).map_err(Failure::input)?;
            let document = network.to_document();
            match out {
                Some(path) => {
                    std::fs::write(&path, &document)
                        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
                    eprintln!(
                        "imported {} stations, {} lines -> {}",
                        network.stations().len(),
                        network.lines().len(),
                        path.display()
                    );
                }
                None => println!("{document}"),
            }
            Ok(())
        }
    }
}

fn run_plan(args: PlanArgs) -> Result<(), Failure> {
    let network = load_network(&read_file(&args.network)?).map_err(Failure::input)?;

    let mut spec: DisruptionSpec = match &args.disruption {
        Some(path) => serde_json::from_str(&read_file(path)?).map_err(Failure::input)?,
        None => DisruptionSpec::default(),
    };
    spec.avoided_stations.extend(args.avoid_stations.iter().cloned());
    spec.disabled_lines.extend(args.disable_lines.iter().cloned());

    let constraints = compile(&network, &spec).map_err(Failure::input)?;
    let origin = network
        .resolve_station(&args.origin)
        .map_err(Failure::input)?
        .id
        .clone();
    let dest = network
        .resolve_station(&args.dest)
        .map_err(Failure::input)?
        .id
        .clone();

    let result = plan(&network, &constraints, &origin, &dest, args.objective).map_err(|e| match e {
        PlanError::NoRoute => Failure::no_route(e),
        other => Failure::input(other),
    })?;

    println!("{}", serialize_route(&result.route).map_err(Failure::input)?);
    eprintln!(
        "cost {:.0} s, {} transfers, {} stations visited",
        result.total_cost_s, result.transfers, result.stations_visited
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let scenario = load_scenario_file(&args.scenario).map_err(Failure::input)?;
    let network = scenario.load_network().map_err(Failure::input)?;
    let constraints = compile(&network, &scenario.disruption).map_err(Failure::input)?;
    let route_text = read_file(&args.route)?;
    let outcome = parse_route(&route_text);
    let provider = NetworkTimeProvider::new(&network);
    let depart = args.depart.unwrap_or_else(default_depart);
    let report = evaluate(
        &network,
        &constraints,
        &scenario.origin_name,
        &scenario.dest_name,
        &outcome,
        &provider,
        &depart,
    )
    .map_err(Failure::input)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn parse_pipeline_modes(text: &str) -> Result<Vec<PipelineMode>, Failure> {
    match text {
        "two-stage" => Ok(vec![PipelineMode::TwoStage]),
        "single-stage" => Ok(vec![PipelineMode::SingleStage]),
        "both" => Ok(vec![PipelineMode::TwoStage, PipelineMode::SingleStage]),
        other => Err(Failure::input(format!(
            "unknown pipeline {other:?} (want two-stage, single-stage, or both)"
        ))),
    }
}

fn parse_map_modes(text: &str) -> Result<Vec<MapMode>, Failure> {
    match text {
        "with" => Ok(vec![MapMode::WithMaps]),
        "without" => Ok(vec![MapMode::WithoutMaps]),
        "both" => Ok(vec![MapMode::WithMaps, MapMode::WithoutMaps]),
        other => Err(Failure::input(format!(
            "unknown maps mode {other:?} (want with, without, or both)"
        ))),
    }
}

fn parse_io_mode(text: &str) -> Result<IoMode, Failure> {
    match text {
        "live" => Ok(IoMode::Live),
        "record" => Ok(IoMode::Record),
        "replay" => Ok(IoMode::Replay),
        other => Err(Failure::input(format!(
            "unknown io mode {other:?} (want live, record, or replay)"
        ))),
    }
}

fn run_llm(args: LlmRunArgs) -> Result<(), Failure> {
    let scenarios = load_scenarios(&args.scenarios).map_err(Failure::input)?;
    if scenarios.is_empty() {
        return Err(Failure::input("no scenarios found"));
    }
    let mut providers = load_provider_configs(&read_file(&args.provider_file)?).map_err(Failure::input)?;
    if args.providers != "all" {
        let wanted: Vec<&str> = args.providers.split(',').map(str::trim).collect();
        providers.retain(|p| wanted.contains(&p.name.as_str()));
        if providers.len() != wanted.len() {
            return Err(Failure::input(format!(
                "provider selection {:?} does not match the config file",
                args.providers
            )));
        }
    }

    let io_mode = parse_io_mode(&args.io)?;
    if io_mode != IoMode::Replay {
        // fail fast on missing auth before any network traffic
        for provider in &providers {
            if std::env::var(&provider.auth_token_env).is_err() {
                return Err(Failure::transport(InvokeError::Auth(
                    provider.auth_token_env.clone(),
                )));
            }
        }
    }

    let store = TranscriptStore::open(&args.cassettes);
    let http;
    let recorder;
    let transport: &dyn Transport = if io_mode == IoMode::Replay {
        recorder = RecordingTransport::refusing();
        &recorder
    } else {
        http = HttpTransport::new();
        &http
    };

    let mut options = EvalOptions::new(&store, transport, io_mode);
    options.concurrency = args.concurrency;
    if let Some(depart) = args.depart {
        options.depart = depart;
    }

    let mut cells: Vec<EvalCell> = Vec::new();
    for pipeline_mode in parse_pipeline_modes(&args.pipeline)? {
        for map_mode in parse_map_modes(&args.maps)? {
            cells.extend(run_evaluation(
                &scenarios,
                &providers,
                pipeline_mode,
                map_mode,
                &options,
            ));
        }
    }

    let mut failures = 0;
    for cell in &cells {
        let status = match (&cell.report, &cell.error) {
            (Some(report), _) => format!(
                "connected={} avoided={} normalized={:.2} transfers={} violation={}",
                report.connected,
                report.avoided,
                report.normalized_time,
                report.transfers,
                report.format_violation
            ),
            (None, Some(error)) => {
                failures += 1;
                format!("ERROR {error}")
            }
            (None, None) => "ERROR empty cell".to_string(),
        };
        eprintln!(
            "[{} {} {} {}] {status}",
            cell.scenario_id,
            cell.provider,
            cell.pipeline_mode.as_str(),
            cell.map_mode.as_str()
        );
    }
    eprintln!("{} cells evaluated, {failures} errors", cells.len());

    match &args.out {
        Some(path) => save_results(path, &cells).map_err(Failure::input)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&detour::harness::ResultsFile { cells: cells.clone() })
                .expect("results serialize")
        ),
    }

    if cells.iter().all(|c| c.report.is_none()) {
        return Err(Failure::transport("every cell failed"));
    }
    Ok(())
}

fn run_report(args: ReportArgs) -> Result<(), Failure> {
    let layout = match args.layout.as_str() {
        "models" => TableLayout::Models,
        "map-ablation" => TableLayout::MapAblation,
        "summary-ablation" => TableLayout::SummaryAblation,
        other => {
            return Err(Failure::input(format!(
                "unknown layout {other:?} (want models, map-ablation, or summary-ablation)"
            )))
        }
    };
    let cells = load_results(&args.results).map_err(Failure::input)?;
    let report = aggregate(&cells).map_err(Failure::input)?;
    let rendered = render_table(&report, layout).map_err(Failure::input)?;
    print!("{}", rendered.text);
    if let Some(path) = &args.csv {
        std::fs::write(path, &rendered.csv)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("csv written to {}", path.display());
    }
    Ok(())
}
