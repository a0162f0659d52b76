//! Plan journeys with the deterministic constrained router, with and
//! without disruptions.
//!
//! ```bash
//! cargo run --example plan_route
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use detour::{compile, load_network, plan, serialize_route, DisruptionSpec, Objective};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let network = load_network(&std::fs::read_to_string(data.join("networks/nyc-midtown.json"))?)?;

    let origin = network.resolve_station("WTC")?.id.clone();
    let dest = network.resolve_station("Cathedral Parkway")?.id.clone();

    // undisrupted baseline
    let free = compile(&network, &DisruptionSpec::default())?;
    let baseline = plan(&network, &free, &origin, &dest, Objective::MinTime)?;
    println!("baseline:   {}", serialize_route(&baseline.route)?);
    println!(
        "            {:.0} s, {} transfers, {} stations\n",
        baseline.total_cost_s, baseline.transfers, baseline.stations_visited
    );

    // the flooded-corridor disruption: seven lines out of service
    let disruption = DisruptionSpec {
        disabled_lines: BTreeSet::from(
            ["1", "2", "3", "A", "B", "C", "D"].map(String::from),
        ),
        ..Default::default()
    };
    let constraints = compile(&network, &disruption)?;
    let rerouted = plan(&network, &constraints, &origin, &dest, Objective::MinTime)?;
    println!("disrupted:  {}", serialize_route(&rerouted.route)?);
    println!(
        "            {:.0} s, {} transfers, {} stations",
        rerouted.total_cost_s, rerouted.transfers, rerouted.stations_visited
    );

    Ok(())
}
