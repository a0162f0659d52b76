//! User-declared disruptions and their compilation to concrete forbidden sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::LatLonBounds;
use crate::network::{LineId, ResolveError, StationId, TransitNetwork};

/// An axis-aligned lat/lon rectangle whose contained stations are off-limits.
pub type DangerZone = LatLonBounds;

/// What the user declared: lines out of service, stations to avoid (by name),
/// and rectangular danger zones. All fields may be empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisruptionSpec {
    pub disabled_lines: BTreeSet<String>,
    pub avoided_stations: BTreeSet<String>,
    pub danger_zones: Vec<DangerZone>,
}

impl DisruptionSpec {
    pub fn is_empty(&self) -> bool {
        self.disabled_lines.is_empty()
            && self.avoided_stations.is_empty()
            && self.danger_zones.is_empty()
    }
}

/// A spec compiled against a concrete network: every id resolves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConstraints {
    pub forbidden_stations: BTreeSet<StationId>,
    pub disabled_lines: BTreeSet<LineId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("unknown line {0:?}")]
    UnknownLine(String),
    #[error("unknown station {0:?}")]
    UnknownStation(String),
    #[error("station name {query:?} is ambiguous: {candidates:?}")]
    Ambiguous {
        query: String,
        candidates: Vec<StationId>,
    },
    #[error("danger zone has min > max")]
    InvalidZone,
}

/// Resolve a disruption spec to forbidden station ids and disabled line ids.
///
/// Avoided station names resolve through the network's normal name
/// resolution; danger zones forbid every station inside them; disabled line
/// entries match any line whose label or id equals the entry after
/// normalization (a shared label disables every line carrying it).
pub fn compile(
    network: &TransitNetwork,
    spec: &DisruptionSpec,
) -> Result<EffectiveConstraints, CompileError> {
    let mut forbidden = BTreeSet::new();
    for name in &spec.avoided_stations {
        let station = network.resolve_station(name).map_err(|e| match e {
            ResolveError::NotFound(n) => CompileError::UnknownStation(n),
            ResolveError::Ambiguous { query, candidates } => {
                CompileError::Ambiguous { query, candidates }
            }
        })?;
        forbidden.insert(station.id.clone());
    }
    for zone in &spec.danger_zones {
        let hits = network
            .stations_in_zone(zone)
            .map_err(|_| CompileError::InvalidZone)?;
        forbidden.extend(hits);
    }

    let mut disabled = BTreeSet::new();
    for label in &spec.disabled_lines {
        let matches = network.lines_with_label(label);
        if matches.is_empty() {
            return Err(CompileError::UnknownLine(label.clone()));
        }
        disabled.extend(matches.into_iter().map(|l| l.id.clone()));
    }

    Ok(EffectiveConstraints {
        forbidden_stations: forbidden,
        disabled_lines: disabled,
    })
}
