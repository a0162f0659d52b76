//! Regenerate the bundled synthetic cassettes.
//!
//! The bundled cassettes let every pipeline command run in `--io replay`
//! mode with zero network access. They are derived data: each response is a
//! pure function of the scenario, the deterministic router's route, and the
//! provider name. Rerun this after changing scenarios, networks, prompt
//! templates, or provider configs:
//!
//! ```bash
//! cargo run --example seed_cassettes
//! ```

use std::path::Path;

use detour::pipeline::synthetic::seed_synthetic_cassettes;
use detour::pipeline::{load_provider_configs, TranscriptStore};
use detour::scenario::load_scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let scenarios = load_scenarios(data.join("scenarios"))?;
    let providers = load_provider_configs(&std::fs::read_to_string(data.join("providers.json"))?)?;
    let store = TranscriptStore::open(data.join("cassettes"));

    let written = seed_synthetic_cassettes(&scenarios, &providers, &store)?;
    println!(
        "seeded {written} responses ({} distinct transcripts) for {} scenarios x {} providers into {}",
        store.len(),
        scenarios.len(),
        providers.len(),
        store.dir().display()
    );
    Ok(())
}
