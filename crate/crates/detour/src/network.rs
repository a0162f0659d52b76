//! Machine-readable transit network model with loaders and query operations.
//!
//! A [`TransitNetwork`] is immutable after construction: every constructor
//! validates the full invariant set (unique ids, resolvable stop references,
//! coordinate ranges, hop-time arity) and builds the name-resolution indexes
//! up front, so readers never observe a partially valid network.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::geo::{haversine_m, GeoPoint, LatLonBounds};

/// Opaque station identifier, unique within a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(String);

impl StationId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque line identifier, unique within a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineId(String);

impl LineId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Service mode of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Subway,
    Bus,
    Bike,
    WalkNetwork,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Subway => "subway",
            Mode::Bus => "bus",
            Mode::Bike => "bike",
            Mode::WalkNetwork => "walk-network",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: StationId,
    pub canonical_name: String,
    pub aliases: Vec<String>,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: LineId,
    pub display_label: String,
    pub mode: Mode,
    pub stops: Vec<StationId>,
    /// Seconds per consecutive stop pair; length is `stops.len() - 1`.
    pub hop_times_s: Vec<f64>,
    pub bidirectional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BikeStation {
    pub id: String,
    pub location: GeoPoint,
    pub bikes_available: u32,
}

/// Default maximum walking-link length between stations, in meters.
pub const DEFAULT_WALK_LINK_THRESHOLD_M: f64 = 1000.0;
/// Default walking speed, meters per second.
pub const DEFAULT_WALKING_SPEED_MPS: f64 = 1.25;

/// An immutable transit network: stations, lines, bike stations, and the
/// walking parameters used for implicit station-to-station walk links.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitNetwork {
    stations: Vec<Station>,
    lines: Vec<Line>,
    bike_stations: Vec<BikeStation>,
    walk_link_threshold_m: f64,
    walking_speed_mps: f64,
    // normalized canonical name -> station index
    by_name: HashMap<String, usize>,
    // normalized alias -> station indexes (collisions surface at resolution)
    by_alias: HashMap<String, Vec<usize>>,
    by_id: HashMap<StationId, usize>,
    line_by_id: HashMap<LineId, usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line} references unknown station {stop}")]
    DanglingReference { line: LineId, stop: StationId },
    #[error("duplicate id: {0}")]
    DuplicateId(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ResolveError {
    #[error("no station named {0:?}")]
    NotFound(String),
    #[error("station name {query:?} is ambiguous: {candidates:?}")]
    Ambiguous {
        query: String,
        candidates: Vec<StationId>,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("unknown station {0}")]
    UnknownStation(StationId),
    #[error("unknown line {0}")]
    UnknownLine(LineId),
    #[error("invalid zone: min exceeds max")]
    InvalidZone,
    #[error("station {station} is not on line {line}")]
    NotOnLine { line: LineId, station: StationId },
    #[error("line {0} does not run in the requested direction")]
    DirectionUnavailable(LineId),
}

/// Normalize a station or line name for comparison: Unicode NFC, trimmed,
/// case-folded, hyphens treated as spaces, internal whitespace collapsed.
pub fn normalize_name(name: &str) -> String {
    let nfc: String = name.nfc().collect();
    let spaced = nfc.replace('-', " ");
    let lowered = spaced.to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Document schema (the JSON wire format for networks)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    #[serde(default)]
    stations: Vec<StationDoc>,
    #[serde(default)]
    lines: Vec<LineDoc>,
    #[serde(default)]
    bike_stations: Vec<BikeStationDoc>,
    #[serde(default)]
    walk_link_threshold_m: Option<f64>,
    #[serde(default)]
    walking_speed_mps: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StationDoc {
    id: String,
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aliases: Vec<String>,
    lat: f64,
    lon: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    id: String,
    label: String,
    mode: Mode,
    stops: Vec<String>,
    hop_times_s: Vec<f64>,
    bidirectional: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BikeStationDoc {
    id: String,
    lat: f64,
    lon: f64,
    bikes: u32,
}

/// Parse and validate a network document (UTF-8 JSON, unknown keys rejected).
pub fn load_network(document: &str) -> Result<TransitNetwork, NetworkError> {
    let doc: NetworkDoc =
        serde_json::from_str(document).map_err(|e| NetworkError::Schema(e.to_string()))?;

    let stations = doc
        .stations
        .into_iter()
        .map(|s| Station {
            id: StationId::new(s.id),
            canonical_name: s.name,
            aliases: s.aliases,
            location: GeoPoint::new(s.lat, s.lon),
        })
        .collect();
    let lines = doc
        .lines
        .into_iter()
        .map(|l| Line {
            id: LineId::new(l.id),
            display_label: l.label,
            mode: l.mode,
            stops: l.stops.into_iter().map(StationId::new).collect(),
            hop_times_s: l.hop_times_s,
            bidirectional: l.bidirectional,
        })
        .collect();
    let bike_stations = doc
        .bike_stations
        .into_iter()
        .map(|b| BikeStation {
            id: b.id,
            location: GeoPoint::new(b.lat, b.lon),
            bikes_available: b.bikes,
        })
        .collect();

    TransitNetwork::new(
        stations,
        lines,
        bike_stations,
        doc.walk_link_threshold_m.unwrap_or(DEFAULT_WALK_LINK_THRESHOLD_M),
        doc.walking_speed_mps.unwrap_or(DEFAULT_WALKING_SPEED_MPS),
    )
}

impl TransitNetwork {
    /// Build a validated network. Stations, lines, and bike stations are
    /// stored sorted by id so iteration order (and serialization) is
    /// deterministic regardless of input order.
    pub fn new(
        mut stations: Vec<Station>,
        mut lines: Vec<Line>,
        mut bike_stations: Vec<BikeStation>,
        walk_link_threshold_m: f64,
        walking_speed_mps: f64,
    ) -> Result<Self, NetworkError> {
        if !(walk_link_threshold_m > 0.0) {
            return Err(NetworkError::Schema(
                "walk_link_threshold_m must be > 0".into(),
            ));
        }
        if !(walking_speed_mps > 0.0) {
            return Err(NetworkError::Schema("walking_speed_mps must be > 0".into()));
        }

        stations.sort_by(|a, b| a.id.cmp(&b.id));
        lines.sort_by(|a, b| a.id.cmp(&b.id));
        bike_stations.sort_by(|a, b| a.id.cmp(&b.id));

        let mut by_id = HashMap::new();
        let mut by_name = HashMap::new();
        let mut by_alias: HashMap<String, Vec<usize>> = HashMap::new();
        for (idx, st) in stations.iter().enumerate() {
            if by_id.insert(st.id.clone(), idx).is_some() {
                return Err(NetworkError::DuplicateId(st.id.to_string()));
            }
            if !st.location.is_valid() {
                return Err(NetworkError::Schema(format!(
                    "station {} has out-of-range coordinates",
                    st.id
                )));
            }
            let name_key = normalize_name(&st.canonical_name);
            if name_key.is_empty() {
                return Err(NetworkError::Schema(format!(
                    "station {} has an empty name",
                    st.id
                )));
            }
            if by_name.insert(name_key, idx).is_some() {
                return Err(NetworkError::Schema(format!(
                    "two stations share the canonical name {:?}",
                    st.canonical_name
                )));
            }
            for alias in &st.aliases {
                let key = normalize_name(alias);
                if !key.is_empty() {
                    by_alias.entry(key).or_default().push(idx);
                }
            }
        }

        let mut line_by_id = HashMap::new();
        for (idx, line) in lines.iter().enumerate() {
            if line_by_id.insert(line.id.clone(), idx).is_some() {
                return Err(NetworkError::DuplicateId(line.id.to_string()));
            }
            if line.stops.len() < 2 {
                return Err(NetworkError::Schema(format!(
                    "line {} must have at least 2 stops",
                    line.id
                )));
            }
            if line.hop_times_s.len() != line.stops.len() - 1 {
                return Err(NetworkError::Schema(format!(
                    "line {} has {} hop times for {} stops",
                    line.id,
                    line.hop_times_s.len(),
                    line.stops.len()
                )));
            }
            if line.hop_times_s.iter().any(|t| !(*t > 0.0)) {
                return Err(NetworkError::Schema(format!(
                    "line {} has a non-positive hop time",
                    line.id
                )));
            }
            for pair in line.stops.windows(2) {
                if pair[0] == pair[1] {
                    return Err(NetworkError::Schema(format!(
                        "line {} repeats stop {} consecutively",
                        line.id, pair[0]
                    )));
                }
            }
            for stop in &line.stops {
                if !by_id.contains_key(stop) {
                    return Err(NetworkError::DanglingReference {
                        line: line.id.clone(),
                        stop: stop.clone(),
                    });
                }
            }
        }

        let mut bike_ids = BTreeSet::new();
        for b in &bike_stations {
            if !bike_ids.insert(b.id.clone()) {
                return Err(NetworkError::DuplicateId(b.id.clone()));
            }
            if !b.location.is_valid() {
                return Err(NetworkError::Schema(format!(
                    "bike station {} has out-of-range coordinates",
                    b.id
                )));
            }
        }

        Ok(Self {
            stations,
            lines,
            bike_stations,
            walk_link_threshold_m,
            walking_speed_mps,
            by_name,
            by_alias,
            by_id,
            line_by_id,
        })
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn bike_stations(&self) -> &[BikeStation] {
        &self.bike_stations
    }

    pub fn walk_link_threshold_m(&self) -> f64 {
        self.walk_link_threshold_m
    }

    pub fn walking_speed_mps(&self) -> f64 {
        self.walking_speed_mps
    }

    pub fn station(&self, id: &StationId) -> Option<&Station> {
        self.by_id.get(id).map(|&i| &self.stations[i])
    }

    pub fn line(&self, id: &LineId) -> Option<&Line> {
        self.line_by_id.get(id).map(|&i| &self.lines[i])
    }

    /// Find the unique station whose canonical name or alias matches the
    /// query after normalization.
    pub fn resolve_station(&self, name: &str) -> Result<&Station, ResolveError> {
        let key = normalize_name(name);
        let mut hits: BTreeSet<usize> = BTreeSet::new();
        if let Some(&i) = self.by_name.get(&key) {
            hits.insert(i);
        }
        if let Some(idxs) = self.by_alias.get(&key) {
            hits.extend(idxs.iter().copied());
        }
        match hits.len() {
            0 => Err(ResolveError::NotFound(name.to_string())),
            1 => Ok(&self.stations[*hits.iter().next().unwrap()]),
            _ => Err(ResolveError::Ambiguous {
                query: name.to_string(),
                candidates: hits.iter().map(|&i| self.stations[i].id.clone()).collect(),
            }),
        }
    }

    /// Straight-line walking time between two stations, in seconds.
    pub fn walk_time(&self, a: &StationId, b: &StationId) -> Result<f64, QueryError> {
        let sa = self.station(a).ok_or_else(|| QueryError::UnknownStation(a.clone()))?;
        let sb = self.station(b).ok_or_else(|| QueryError::UnknownStation(b.clone()))?;
        Ok(haversine_m(sa.location, sb.location) / self.walking_speed_mps)
    }

    /// Stations whose location lies inside or on the boundary of the box.
    pub fn stations_in_zone(&self, zone: &LatLonBounds) -> Result<BTreeSet<StationId>, QueryError> {
        if !zone.is_valid() {
            return Err(QueryError::InvalidZone);
        }
        Ok(self
            .stations
            .iter()
            .filter(|s| zone.contains(s.location))
            .map(|s| s.id.clone())
            .collect())
    }

    /// The contiguous stop sub-sequence of a line from `from` to `to`,
    /// inclusive. Reverse direction is only available on bidirectional lines.
    pub fn line_segment(
        &self,
        line_id: &LineId,
        from: &StationId,
        to: &StationId,
    ) -> Result<Vec<StationId>, QueryError> {
        let line = self
            .line(line_id)
            .ok_or_else(|| QueryError::UnknownLine(line_id.clone()))?;
        let pos_of = |id: &StationId| line.stops.iter().position(|s| s == id);
        let from_pos = pos_of(from).ok_or_else(|| QueryError::NotOnLine {
            line: line_id.clone(),
            station: from.clone(),
        })?;
        let to_pos = pos_of(to).ok_or_else(|| QueryError::NotOnLine {
            line: line_id.clone(),
            station: to.clone(),
        })?;
        if from_pos <= to_pos {
            Ok(line.stops[from_pos..=to_pos].to_vec())
        } else if line.bidirectional {
            let mut seg = line.stops[to_pos..=from_pos].to_vec();
            seg.reverse();
            Ok(seg)
        } else {
            Err(QueryError::DirectionUnavailable(line_id.clone()))
        }
    }

    /// All stations within `walk_link_threshold_m` of the given station.
    pub fn walk_neighbors(&self, of: &StationId) -> Vec<(StationId, f64)> {
        let Some(origin) = self.station(of) else {
            return Vec::new();
        };
        self.stations
            .iter()
            .filter(|s| s.id != *of)
            .filter_map(|s| {
                let d = haversine_m(origin.location, s.location);
                (d <= self.walk_link_threshold_m)
                    .then(|| (s.id.clone(), d / self.walking_speed_mps))
            })
            .collect()
    }

    /// Serialize back to the network document schema. `load_network` on the
    /// output reproduces this network exactly.
    pub fn to_document(&self) -> String {
        let doc = NetworkDoc {
            stations: self
                .stations
                .iter()
                .map(|s| StationDoc {
                    id: s.id.to_string(),
                    name: s.canonical_name.clone(),
                    aliases: s.aliases.clone(),
                    lat: s.location.lat,
                    lon: s.location.lon,
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineDoc {
                    id: l.id.to_string(),
                    label: l.display_label.clone(),
                    mode: l.mode,
                    stops: l.stops.iter().map(|s| s.to_string()).collect(),
                    hop_times_s: l.hop_times_s.clone(),
                    bidirectional: l.bidirectional,
                })
                .collect(),
            bike_stations: self
                .bike_stations
                .iter()
                .map(|b| BikeStationDoc {
                    id: b.id.clone(),
                    lat: b.location.lat,
                    lon: b.location.lon,
                    bikes: b.bikes_available,
                })
                .collect(),
            walk_link_threshold_m: Some(self.walk_link_threshold_m),
            walking_speed_mps: Some(self.walking_speed_mps),
        };
        serde_json::to_string_pretty(&doc).expect("network document serialization cannot fail")
    }

    /// Lines whose display label (or id) matches the given label after name
    /// normalization, in id order.
    pub fn lines_with_label(&self, label: &str) -> Vec<&Line> {
        let key = normalize_name(label);
        self.lines
            .iter()
            .filter(|l| normalize_name(&l.display_label) == key || normalize_name(l.id.as_str()) == key)
            .collect()
    }

    /// Stable map from line id to its display label, for reporting.
    pub fn line_labels(&self) -> BTreeMap<LineId, String> {
        self.lines
            .iter()
            .map(|l| (l.id.clone(), l.display_label.clone()))
            .collect()
    }
}
