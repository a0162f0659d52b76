//! Load and validate a network document, then run a few queries against it.
//!
//! ```bash
//! cargo run --example validate_network [path/to/network.json]
//! ```

use std::path::{Path, PathBuf};

use detour::geo::LatLonBounds;
use detour::load_network;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/networks/nyc-midtown.json")
    });
    let network = load_network(&std::fs::read_to_string(&path)?)?;

    println!("{}: valid", path.display());
    println!(
        "  {} stations, {} lines, {} bike stations",
        network.stations().len(),
        network.lines().len(),
        network.bike_stations().len()
    );
    for line in network.lines() {
        println!(
            "  line {:<10} {:>3} stops  ({})",
            line.display_label,
            line.stops.len(),
            line.mode
        );
    }

    if let Ok(station) = network.resolve_station("cathedral  parkway") {
        println!("  resolve 'cathedral  parkway' -> {} ({})", station.canonical_name, station.id);
        let nearby = network.walk_neighbors(&station.id);
        println!("  {} stations within walking range of it", nearby.len());
    }

    let midtown = LatLonBounds {
        min_lat: 40.74,
        min_lon: -74.00,
        max_lat: 40.77,
        max_lon: -73.97,
    };
    if let Ok(inside) = network.stations_in_zone(&midtown) {
        println!("  {} stations inside the sample midtown box", inside.len());
    }
    Ok(())
}
