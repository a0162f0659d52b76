//! Run the full scenario × provider × ablation matrix offline and render
//! all three report tables.
//!
//! Uses the bundled cassettes in replay mode, so no API keys and no network
//! access are needed:
//!
//! ```bash
//! cargo run --example run_benchmark
//! ```

use std::path::Path;

use detour::harness::{aggregate, render_table, run_matrix, EvalOptions, TableLayout};
use detour::pipeline::{load_provider_configs, IoMode, RecordingTransport, TranscriptStore};
use detour::scenario::load_scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let scenarios = load_scenarios(data.join("scenarios"))?;
    let providers = load_provider_configs(&std::fs::read_to_string(data.join("providers.json"))?)?;
    let store = TranscriptStore::open(data.join("cassettes"));
    let transport = RecordingTransport::refusing();

    let options = EvalOptions::new(&store, &transport, IoMode::Replay);
    let cells = run_matrix(&scenarios, &providers, &options);
    let errors = cells.iter().filter(|c| c.error.is_some()).count();
    println!(
        "evaluated {} cells ({} errors, {} network operations)\n",
        cells.len(),
        errors,
        transport.calls()
    );

    let report = aggregate(&cells)?;
    for (name, layout) in [
        ("Model comparison (two-stage, with maps)", TableLayout::Models),
        ("Map ablation (two-stage)", TableLayout::MapAblation),
        ("Summary ablation (with maps)", TableLayout::SummaryAblation),
    ] {
        println!("== {name} ==");
        println!("{}", render_table(&report, layout)?.text);
    }
    Ok(())
}
