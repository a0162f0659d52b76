//! Replay one scenario through the two-stage pipeline from the bundled
//! cassettes and score the parsed route.
//!
//! ```bash
//! cargo run --example replay_pipeline [scenario-id]
//! ```

use std::path::Path;

use detour::compile;
use detour::metrics::{default_depart, evaluate, NetworkTimeProvider};
use detour::pipeline::{
    load_provider_configs, run_pipeline, IoMode, MapMode, PipelineMode, RecordingTransport,
    TranscriptStore,
};
use detour::scenario::load_scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wanted = std::env::args().nth(1).unwrap_or_else(|| "S5".to_string());
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let scenarios = load_scenarios(data.join("scenarios"))?;
    let scenario = scenarios
        .iter()
        .find(|s| s.id == wanted)
        .ok_or_else(|| format!("no bundled scenario named {wanted}"))?;
    let providers = load_provider_configs(&std::fs::read_to_string(data.join("providers.json"))?)?;
    let store = TranscriptStore::open(data.join("cassettes"));
    let transport = RecordingTransport::refusing();

    println!("[{}] {}\n", scenario.id, scenario.query_text);
    let run = run_pipeline(
        scenario,
        &providers[0],
        PipelineMode::TwoStage,
        MapMode::WithMaps,
        &store,
        IoMode::Replay,
        &transport,
    )?;
    println!("planner said:\n{}\n", run.plan_text);
    println!("summary said:\n{}\n", run.summary_text);

    let network = scenario.load_network()?;
    let constraints = compile(&network, &scenario.disruption)?;
    let provider = NetworkTimeProvider::new(&network);
    let report = evaluate(
        &network,
        &constraints,
        &scenario.origin_name,
        &scenario.dest_name,
        &run.parse,
        &provider,
        &default_depart(),
    )?;
    println!(
        "metrics: connected={} avoided={} normalized_time={:.3} transfers={} valid={}",
        report.connected, report.avoided, report.normalized_time, report.transfers, report.valid
    );
    println!("network operations performed: {}", transport.calls());
    Ok(())
}
