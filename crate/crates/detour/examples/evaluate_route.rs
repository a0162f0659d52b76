//! Score proposed route texts against a scenario: a clean machine-readable
//! route, a disconnected one, and prose that violates the format.
//!
//! ```bash
//! cargo run --example evaluate_route
//! ```

use std::path::Path;

use detour::metrics::{default_depart, evaluate, NetworkTimeProvider};
use detour::scenario::load_scenario_file;
use detour::{compile, parse_route};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let scenario = load_scenario_file(data.join("scenarios/s2.json"))?;
    let network = scenario.load_network()?;
    let constraints = compile(&network, &scenario.disruption)?;
    let provider = NetworkTimeProvider::new(&network);
    let depart = default_depart();

    let candidates: [(&str, &str); 3] = [
        (
            "clean",
            r#"{"legs":[{"mode":"subway","line":"B","from":"Cathedral Parkway","to":"42 St-Bryant Pk"},{"mode":"walk","from":"42 St-Bryant Pk","to":"5 Av"},{"mode":"subway","line":"7","from":"5 Av","to":"Flushing-Main St"}]}"#,
        ),
        (
            "disconnected",
            r#"{"legs":[{"mode":"subway","line":"7","from":"Cathedral Parkway","to":"Flushing-Main St"}]}"#,
        ),
        (
            "prose",
            "Sure thing! Take the B down to Bryant Park, stroll over to 5 Av and ride the 7 out to Flushing.",
        ),
    ];

    for (label, text) in candidates {
        let outcome = parse_route(text);
        let report = evaluate(
            &network,
            &constraints,
            &scenario.origin_name,
            &scenario.dest_name,
            &outcome,
            &provider,
            &depart,
        )?;
        println!("[{label}]");
        println!("  connected={} avoided={} valid={}", report.connected, report.avoided, report.valid);
        println!(
            "  travel_time={:.0} s  normalized={:.3}  transfers={}  format_violation={}",
            report.travel_time_s, report.normalized_time, report.transfers, report.format_violation
        );
        if !report.offenders.is_empty() {
            println!("  offenders: {:?}", report.offenders);
        }
        println!();
    }
    Ok(())
}
