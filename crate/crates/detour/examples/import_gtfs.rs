//! Import the bundled minimal GTFS feed and export it as a network
//! document.
//!
//! ```bash
//! cargo run --example import_gtfs [feed-dir]
//! ```

use std::path::{Path, PathBuf};

use detour::gtfs::import_gtfs;
use detour::load_network;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let feed = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/gtfs-mini")
    });
    let network = import_gtfs(&feed)?;
    println!(
        "imported {}: {} stations, {} lines",
        feed.display(),
        network.stations().len(),
        network.lines().len()
    );
    for line in network.lines() {
        println!(
            "  {} ({}): {} stops, hop times {:?}",
            line.display_label,
            line.mode,
            line.stops.len(),
            line.hop_times_s
        );
    }

    let document = network.to_document();
    let reloaded = load_network(&document)?;
    assert_eq!(network, reloaded);
    println!("\nexport -> reload round trip: identical");
    println!("\n{document}");
    Ok(())
}
