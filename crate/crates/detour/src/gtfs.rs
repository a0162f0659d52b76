//! Importer for the static GTFS tables (stops, routes, trips, stop_times).
//!
//! The importer builds one line per route, taking the stop sequence from the
//! route's longest trip and hop times as the median scheduled inter-stop time
//! across all of the route's trips for each consecutive stop pair. Stops that
//! declare a `parent_station` collapse into the parent, and stops sharing a
//! canonical name collapse into one station; the absorbed stop ids become
//! aliases so GTFS ids keep resolving. No timetable or service-calendar
//! information is retained.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use thiserror::Error;

use crate::geo::GeoPoint;
use crate::network::{
    normalize_name, BikeStation, Line, LineId, Mode, NetworkError, Station, StationId,
    TransitNetwork, DEFAULT_WALKING_SPEED_MPS, DEFAULT_WALK_LINK_THRESHOLD_M,
};

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("missing GTFS table {0}")]
    MissingTable(String),
    #[error("{table} row {row}: {message}")]
    MalformedRow {
        table: String,
        row: u64,
        message: String,
    },
    #[error("feed produced no stations or no lines")]
    EmptyFeed,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

struct Table {
    name: String,
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(dir: &Path, name: &str) -> Result<Self, GtfsError> {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(GtfsError::MissingTable(name.to_string()));
        }
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(|e| GtfsError::MalformedRow {
                table: name.to_string(),
                row: 0,
                message: e.to_string(),
            })?;
        let headers = reader
            .headers()
            .map_err(|e| GtfsError::MalformedRow {
                table: name.to_string(),
                row: 0,
                message: e.to_string(),
            })?
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}').to_string())
            .collect();
        let mut rows = Vec::new();
        for result in reader.records() {
            let record = result.map_err(|e| GtfsError::MalformedRow {
                table: name.to_string(),
                row: 0,
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, record));
        }
        Ok(Self {
            name: name.to_string(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize, GtfsError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| GtfsError::MalformedRow {
                table: self.name.clone(),
                row: 1,
                message: format!("missing column {name}"),
            })
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn malformed(&self, row: u64, message: impl Into<String>) -> GtfsError {
        GtfsError::MalformedRow {
            table: self.name.clone(),
            row,
            message: message.into(),
        }
    }
}

fn field(record: &csv::StringRecord, idx: usize) -> &str {
    record.get(idx).unwrap_or("")
}

/// Parse "HH:MM:SS" (hours may exceed 24) into seconds since midnight.
fn parse_gtfs_time(text: &str) -> Option<f64> {
    let mut parts = text.split(':');
    let h: f64 = parts.next()?.trim().parse().ok()?;
    let m: f64 = parts.next()?.trim().parse().ok()?;
    let s: f64 = parts.next()?.trim().parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some(h * 3600.0 + m * 60.0 + s)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

struct StopTimeEntry {
    station: StationId,
    arrival_s: Option<f64>,
    departure_s: Option<f64>,
    sequence: i64,
}

/// Import a directory of GTFS static tables into a transit network.
pub fn import_gtfs(feed_directory: impl AsRef<Path>) -> Result<TransitNetwork, GtfsError> {
    let dir = feed_directory.as_ref();
    let stops = Table::read(dir, "stops.txt")?;
    let routes = Table::read(dir, "routes.txt")?;
    let trips = Table::read(dir, "trips.txt")?;
    let stop_times = Table::read(dir, "stop_times.txt")?;

    // --- stops: collapse children into parents, then same-name stations ---
    let id_col = stops.column("stop_id")?;
    let name_col = stops.column("stop_name")?;
    let lat_col = stops.column("stop_lat")?;
    let lon_col = stops.column("stop_lon")?;
    let parent_col = stops.optional_column("parent_station");

    struct RawStop {
        id: String,
        name: String,
        location: GeoPoint,
        parent: Option<String>,
    }
    let mut raw_stops: Vec<RawStop> = Vec::new();
    for (row, record) in &stops.rows {
        let id = field(record, id_col).to_string();
        if id.is_empty() {
            return Err(stops.malformed(*row, "empty stop_id"));
        }
        let lat: f64 = field(record, lat_col)
            .parse()
            .map_err(|_| stops.malformed(*row, "bad stop_lat"))?;
        let lon: f64 = field(record, lon_col)
            .parse()
            .map_err(|_| stops.malformed(*row, "bad stop_lon"))?;
        let parent = parent_col
            .map(|c| field(record, c))
            .filter(|p| !p.is_empty())
            .map(str::to_string);
        raw_stops.push(RawStop {
            id,
            name: field(record, name_col).to_string(),
            location: GeoPoint::new(lat, lon),
            parent,
        });
    }

    let by_id: HashMap<&str, &RawStop> = raw_stops.iter().map(|s| (s.id.as_str(), s)).collect();
    // stop_id -> id of the standalone stop it collapses into
    let mut collapse: HashMap<String, String> = HashMap::new();
    for stop in &raw_stops {
        let target = match &stop.parent {
            Some(parent) if by_id.contains_key(parent.as_str()) => parent.clone(),
            Some(_) | None => stop.id.clone(),
        };
        collapse.insert(stop.id.clone(), target);
    }

    // group survivors by normalized name; smallest id wins as the station id
    let mut name_groups: BTreeMap<String, Vec<&RawStop>> = BTreeMap::new();
    for stop in &raw_stops {
        if collapse[&stop.id] == stop.id {
            name_groups
                .entry(normalize_name(&stop.name))
                .or_default()
                .push(stop);
        }
    }

    let mut stations: Vec<Station> = Vec::new();
    let mut station_of_stop: HashMap<String, StationId> = HashMap::new();
    for group in name_groups.values() {
        let mut members = group.clone();
        members.sort_by(|a, b| a.id.cmp(&b.id));
        let primary = members[0];
        let station_id = StationId::new(primary.id.clone());
        let mut aliases: Vec<String> = Vec::new();
        for member in &members {
            if member.id != primary.id {
                aliases.push(member.id.clone());
            }
        }
        for (child, target) in &collapse {
            if members.iter().any(|m| &m.id == target) && child != target {
                aliases.push(child.clone());
            }
        }
        aliases.sort();
        aliases.dedup();
        for member in &members {
            station_of_stop.insert(member.id.clone(), station_id.clone());
        }
        for (child, target) in &collapse {
            if members.iter().any(|m| &m.id == target) {
                station_of_stop.insert(child.clone(), station_id.clone());
            }
        }
        stations.push(Station {
            id: station_id,
            canonical_name: primary.name.clone(),
            aliases,
            location: primary.location,
        });
    }

    // --- routes and trips ---
    let route_id_col = routes.column("route_id")?;
    let short_name_col = routes.optional_column("route_short_name");
    let route_type_col = routes.optional_column("route_type");
    struct RouteInfo {
        label: String,
        mode: Mode,
    }
    let mut route_infos: BTreeMap<String, RouteInfo> = BTreeMap::new();
    for (row, record) in &routes.rows {
        let id = field(record, route_id_col).to_string();
        if id.is_empty() {
            return Err(routes.malformed(*row, "empty route_id"));
        }
        let label = short_name_col
            .map(|c| field(record, c).to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| id.clone());
        let mode = match route_type_col.map(|c| field(record, c)) {
            Some("3") => Mode::Bus,
            _ => Mode::Subway,
        };
        route_infos.insert(id, RouteInfo { label, mode });
    }

    let trip_id_col = trips.column("trip_id")?;
    let trip_route_col = trips.column("route_id")?;
    let mut route_of_trip: HashMap<String, String> = HashMap::new();
    for (row, record) in &trips.rows {
        let trip_id = field(record, trip_id_col).to_string();
        let route_id = field(record, trip_route_col).to_string();
        if trip_id.is_empty() || route_id.is_empty() {
            return Err(trips.malformed(*row, "empty trip_id or route_id"));
        }
        route_of_trip.insert(trip_id, route_id);
    }

    // --- stop_times grouped by trip ---
    let st_trip_col = stop_times.column("trip_id")?;
    let st_stop_col = stop_times.column("stop_id")?;
    let st_seq_col = stop_times.column("stop_sequence")?;
    let st_arr_col = stop_times.optional_column("arrival_time");
    let st_dep_col = stop_times.optional_column("departure_time");

    let mut entries_by_trip: BTreeMap<String, Vec<StopTimeEntry>> = BTreeMap::new();
    for (row, record) in &stop_times.rows {
        let trip_id = field(record, st_trip_col).to_string();
        let stop_id = field(record, st_stop_col);
        let station = station_of_stop
            .get(stop_id)
            .ok_or_else(|| stop_times.malformed(*row, format!("unknown stop_id {stop_id}")))?
            .clone();
        let sequence: i64 = field(record, st_seq_col)
            .parse()
            .map_err(|_| stop_times.malformed(*row, "bad stop_sequence"))?;
        let parse_time = |col: Option<usize>| -> Result<Option<f64>, GtfsError> {
            match col.map(|c| field(record, c)).filter(|t| !t.is_empty()) {
                None => Ok(None),
                Some(text) => parse_gtfs_time(text)
                    .map(Some)
                    .ok_or_else(|| stop_times.malformed(*row, format!("bad time {text:?}"))),
            }
        };
        entries_by_trip.entry(trip_id).or_default().push(StopTimeEntry {
            station,
            arrival_s: parse_time(st_arr_col)?,
            departure_s: parse_time(st_dep_col)?,
            sequence,
        });
    }
    for entries in entries_by_trip.values_mut() {
        entries.sort_by_key(|e| e.sequence);
        // parent collapse can leave consecutive duplicates; keep the first
        entries.dedup_by(|b, a| a.station == b.station);
    }

    // --- one line per route, from its longest trip ---
    let mut trips_by_route: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (trip_id, route_id) in &route_of_trip {
        if entries_by_trip.contains_key(trip_id) {
            trips_by_route
                .entry(route_id.as_str())
                .or_default()
                .push(trip_id.as_str());
        }
    }

    let mut lines: Vec<Line> = Vec::new();
    for (route_id, mut trip_ids) in trips_by_route {
        let Some(info) = route_infos.get(route_id) else {
            continue;
        };
        trip_ids.sort();
        let representative = trip_ids
            .iter()
            .max_by_key(|t| (entries_by_trip[**t].len(), std::cmp::Reverse(**t)))
            .copied()
            .expect("route has at least one trip here");
        let rep_entries = &entries_by_trip[representative];
        if rep_entries.len() < 2 {
            continue;
        }
        let stops: Vec<StationId> = rep_entries.iter().map(|e| e.station.clone()).collect();

        // median scheduled time across all trips for each consecutive pair
        let mut hop_times = Vec::with_capacity(stops.len() - 1);
        for pair in stops.windows(2) {
            let mut deltas = Vec::new();
            for trip_id in &trip_ids {
                let entries = &entries_by_trip[*trip_id];
                for window in entries.windows(2) {
                    if window[0].station == pair[0] && window[1].station == pair[1] {
                        let leave = window[0].departure_s.or(window[0].arrival_s);
                        let arrive = window[1].arrival_s.or(window[1].departure_s);
                        if let (Some(leave), Some(arrive)) = (leave, arrive) {
                            if arrive > leave {
                                deltas.push(arrive - leave);
                            }
                        }
                    }
                }
            }
            // 30 s floor covers schedules quantized to the same minute
            hop_times.push(median(deltas).unwrap_or(30.0));
        }

        lines.push(Line {
            id: LineId::new(route_id),
            display_label: info.label.clone(),
            mode: info.mode,
            stops,
            hop_times_s: hop_times,
            bidirectional: true,
        });
    }

    if stations.is_empty() || lines.is_empty() {
        return Err(GtfsError::EmptyFeed);
    }

    let bike_stations: Vec<BikeStation> = Vec::new();
    Ok(TransitNetwork::new(
        stations,
        lines,
        bike_stations,
        DEFAULT_WALK_LINK_THRESHOLD_M,
        DEFAULT_WALKING_SPEED_MPS,
    )?)
}
