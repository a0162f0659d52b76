//! Route evaluation: connectivity, disruption avoidance, approximate travel
//! time with a walking baseline, and transfer counting.
//!
//! Everything here treats route defects as measured data, not errors. A leg
//! whose claimed line does not link its endpoints is "disconnected" and is
//! costed at straight-line walking time; a route that never reaches the
//! destination is invalid and its normalized time pins to 1.0. The only hard
//! errors are an origin or destination that cannot be resolved at all.

use std::path::PathBuf;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disruption::EffectiveConstraints;
use crate::geo::haversine_m;
use crate::network::{normalize_name, LineId, Mode, StationId, TransitNetwork};
use crate::route::{LegMode, ParseOutcome, Route};

/// Fallback cycling speed used by the network-derived estimator for bike
/// legs, meters per second.
pub const DEFAULT_CYCLING_SPEED_MPS: f64 = 4.0;

/// The fixed departure timestamp used for reproducible travel-time queries:
/// 2024-05-01 13:30 in New York (EDT).
pub fn default_depart() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("2024-05-01T13:30:00-04:00")
        .expect("default depart timestamp is valid")
}

/// Per-segment travel time source. `None` means the provider cannot estimate
/// the segment, in which case the engine substitutes walking time.
///
/// Implementations must be deterministic for fixed inputs and safe for
/// concurrent calls.
pub trait TravelTimeProvider: Sync {
    fn estimate(
        &self,
        mode: LegMode,
        line_label: Option<&str>,
        from: &StationId,
        to: &StationId,
        depart: &DateTime<FixedOffset>,
    ) -> Option<f64>;
}

/// Estimates segment times from the network itself: scheduled hop times for
/// rides, straight-line time at a fixed speed for bike legs.
pub struct NetworkTimeProvider<'n> {
    network: &'n TransitNetwork,
}

impl<'n> NetworkTimeProvider<'n> {
    pub fn new(network: &'n TransitNetwork) -> Self {
        Self { network }
    }
}

impl TravelTimeProvider for NetworkTimeProvider<'_> {
    fn estimate(
        &self,
        mode: LegMode,
        line_label: Option<&str>,
        from: &StationId,
        to: &StationId,
        _depart: &DateTime<FixedOffset>,
    ) -> Option<f64> {
        match mode {
            LegMode::Subway | LegMode::Bus => {
                let line = matching_line(self.network, mode, line_label?, from, to)?;
                segment_time(self.network, &line, from, to)
            }
            LegMode::Bike => {
                let a = self.network.station(from)?;
                let b = self.network.station(to)?;
                Some(haversine_m(a.location, b.location) / DEFAULT_CYCLING_SPEED_MPS)
            }
            LegMode::Walk => None, // the engine costs walking itself
        }
    }
}

/// The first line (in id order) with the given mode and label that links the
/// two stations contiguously.
fn matching_line(
    network: &TransitNetwork,
    mode: LegMode,
    label: &str,
    from: &StationId,
    to: &StationId,
) -> Option<LineId> {
    let want_mode = match mode {
        LegMode::Subway => Mode::Subway,
        LegMode::Bus => Mode::Bus,
        _ => return None,
    };
    let key = normalize_name(label);
    network
        .lines()
        .iter()
        .filter(|l| l.mode == want_mode && normalize_name(&l.display_label) == key)
        .find(|l| network.line_segment(&l.id, from, to).is_ok())
        .map(|l| l.id.clone())
}

/// Scheduled seconds along a line between two of its stops.
fn segment_time(
    network: &TransitNetwork,
    line_id: &LineId,
    from: &StationId,
    to: &StationId,
) -> Option<f64> {
    let line = network.line(line_id)?;
    let from_pos = line.stops.iter().position(|s| s == from)?;
    let to_pos = line.stops.iter().position(|s| s == to)?;
    let (lo, hi) = if from_pos <= to_pos {
        (from_pos, to_pos)
    } else {
        if !line.bidirectional {
            return None;
        }
        (to_pos, from_pos)
    };
    Some(line.hop_times_s[lo..hi].iter().sum())
}

/// Full evaluation of one route against one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub connected: bool,
    pub per_leg_connectivity: Vec<bool>,
    pub avoided: bool,
    pub offenders: Vec<Offender>,
    pub travel_time_s: f64,
    pub normalized_time: f64,
    pub transfers: u32,
    pub format_violation: bool,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Offender {
    Station(StationId),
    Line(LineId),
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("station {0:?} does not resolve in this network")]
    UnknownStation(String),
}

// ---------------------------------------------------------------------------
// Per-leg analysis shared by the metric checks
// ---------------------------------------------------------------------------

struct LegAnalysis {
    connected: bool,
    from: Option<StationId>,
    to: Option<StationId>,
    /// Stations the leg touches: full line segment for connected rides,
    /// resolved endpoints otherwise.
    expansion: Vec<StationId>,
}

fn resolve(network: &TransitNetwork, name: &str) -> Option<StationId> {
    network.resolve_station(name).ok().map(|s| s.id.clone())
}

fn analyze_leg(network: &TransitNetwork, leg: &crate::route::Leg) -> LegAnalysis {
    let from = resolve(network, &leg.from);
    let to = resolve(network, &leg.to);

    let endpoints = || {
        from.iter()
            .chain(to.iter())
            .cloned()
            .collect::<Vec<StationId>>()
    };

    match leg.mode {
        LegMode::Subway | LegMode::Bus => {
            if let (Some(f), Some(t), Some(label)) = (&from, &to, leg.line.as_deref()) {
                if let Some(line) = matching_line(network, leg.mode, label, f, t) {
                    let segment = network
                        .line_segment(&line, f, t)
                        .expect("matching_line verified the segment");
                    return LegAnalysis {
                        connected: true,
                        from,
                        to,
                        expansion: segment,
                    };
                }
            }
            LegAnalysis {
                connected: false,
                expansion: endpoints(),
                from,
                to,
            }
        }
        LegMode::Walk => LegAnalysis {
            connected: from.is_some() && to.is_some(),
            expansion: endpoints(),
            from,
            to,
        },
        LegMode::Bike => {
            let bike_reachable = |id: &Option<StationId>, need_bikes: bool| -> bool {
                let Some(id) = id else { return false };
                let Some(station) = network.station(id) else {
                    return false;
                };
                network.bike_stations().iter().any(|b| {
                    haversine_m(station.location, b.location) <= network.walk_link_threshold_m()
                        && (!need_bikes || b.bikes_available > 0)
                })
            };
            LegAnalysis {
                connected: bike_reachable(&from, true) && bike_reachable(&to, false),
                expansion: endpoints(),
                from,
                to,
            }
        }
    }
}

/// Metric 1: every ride leg's claimed line links its endpoints contiguously;
/// walk legs need both endpoints to resolve; bike legs need a bike station
/// with available bikes near the origin side and any dock near the far side.
pub fn check_connectivity(network: &TransitNetwork, route: &Route) -> (bool, Vec<bool>) {
    let per_leg: Vec<bool> = route
        .legs
        .iter()
        .map(|leg| analyze_leg(network, leg).connected)
        .collect();
    (per_leg.iter().all(|&c| c), per_leg)
}

/// Metric 2: the expanded route must never touch a forbidden station (even
/// passing through without alighting) or ride a disabled line.
pub fn check_avoidance(
    network: &TransitNetwork,
    constraints: &EffectiveConstraints,
    route: &Route,
) -> (bool, Vec<Offender>) {
    let mut offenders: Vec<Offender> = Vec::new();
    let push = |offenders: &mut Vec<Offender>, o: Offender| {
        if !offenders.contains(&o) {
            offenders.push(o);
        }
    };

    for leg in &route.legs {
        if leg.mode.requires_line() {
            if let Some(label) = leg.line.as_deref() {
                let key = normalize_name(label);
                let want_mode = match leg.mode {
                    LegMode::Subway => Mode::Subway,
                    LegMode::Bus => Mode::Bus,
                    _ => unreachable!(),
                };
                for line_id in &constraints.disabled_lines {
                    if let Some(line) = network.line(line_id) {
                        if line.mode == want_mode && normalize_name(&line.display_label) == key {
                            push(&mut offenders, Offender::Line(line_id.clone()));
                        }
                    }
                }
            }
        }
        for station in analyze_leg(network, leg).expansion {
            if constraints.forbidden_stations.contains(&station) {
                push(&mut offenders, Offender::Station(station));
            }
        }
    }
    (offenders.is_empty(), offenders)
}

/// Metric 3 numerator: sum of per-leg times. Connected ride and bike legs ask
/// the provider (falling back to walking time when it cannot estimate);
/// disconnected legs and walk legs are costed at straight-line walking time.
///
/// A leg with one unresolvable endpoint contributes nothing; a leg where
/// neither endpoint resolves makes the whole route unscorable.
pub fn route_travel_time(
    network: &TransitNetwork,
    route: &Route,
    provider: &dyn TravelTimeProvider,
    depart: &DateTime<FixedOffset>,
) -> Result<f64, MetricsError> {
    let mut total = 0.0;
    for leg in &route.legs {
        let analysis = analyze_leg(network, leg);
        let (from, to) = match (&analysis.from, &analysis.to) {
            (Some(f), Some(t)) => (f.clone(), t.clone()),
            (None, None) => return Err(MetricsError::UnknownStation(leg.from.clone())),
            _ => continue,
        };
        let walk = network
            .walk_time(&from, &to)
            .expect("both endpoints resolved");
        let seconds = match leg.mode {
            LegMode::Walk => walk,
            _ if !analysis.connected => walk,
            mode => provider
                .estimate(mode, leg.line.as_deref(), &from, &to, depart)
                .unwrap_or(walk),
        };
        total += seconds;
    }
    Ok(total)
}

/// Metric 4: boundaries between consecutive legs with a differing carrier
/// (mode plus line label), including switches to or from walking.
pub fn count_transfers(route: &Route) -> u32 {
    route
        .legs
        .windows(2)
        .filter(|pair| {
            let carrier = |leg: &crate::route::Leg| {
                (
                    leg.mode,
                    leg.line.as_deref().map(normalize_name).unwrap_or_default(),
                )
            };
            carrier(&pair[0]) != carrier(&pair[1])
        })
        .count() as u32
}

/// Does a route-leg station name denote the given resolved station?
fn names_match(network: &TransitNetwork, name: &str, id: &StationId) -> bool {
    match resolve(network, name) {
        Some(resolved) => resolved == *id,
        None => {
            let station = network.station(id).expect("id came from this network");
            normalize_name(name) == normalize_name(&station.canonical_name)
        }
    }
}

/// Metric 3 denominator and the validity rule, composed with the other
/// metrics into a full report.
///
/// A result is valid when it parsed and its legs chain from the origin to the
/// destination (an empty route is valid only when origin = destination).
/// Invalid results pin `normalized_time` to 1.0.
pub fn evaluate(
    network: &TransitNetwork,
    constraints: &EffectiveConstraints,
    origin_name: &str,
    dest_name: &str,
    outcome: &ParseOutcome,
    provider: &dyn TravelTimeProvider,
    depart: &DateTime<FixedOffset>,
) -> Result<MetricsReport, MetricsError> {
    let origin = network
        .resolve_station(origin_name)
        .map_err(|_| MetricsError::UnknownStation(origin_name.to_string()))?
        .id
        .clone();
    let dest = network
        .resolve_station(dest_name)
        .map_err(|_| MetricsError::UnknownStation(dest_name.to_string()))?
        .id
        .clone();

    let route = match outcome {
        ParseOutcome::Route(route) => route,
        ParseOutcome::Violation(_) => {
            return Ok(MetricsReport {
                connected: false,
                per_leg_connectivity: Vec::new(),
                avoided: false,
                offenders: Vec::new(),
                travel_time_s: 0.0,
                normalized_time: 1.0,
                transfers: 0,
                format_violation: true,
                valid: false,
            });
        }
    };

    let (connected, per_leg_connectivity) = check_connectivity(network, route);
    let (avoided, offenders) = check_avoidance(network, constraints, route);
    let transfers = count_transfers(route);

    let chains = if route.legs.is_empty() {
        origin == dest
    } else {
        names_match(network, &route.legs[0].from, &origin)
            && crate::route::validate_chaining(route).is_empty()
            && names_match(network, &route.legs.last().unwrap().to, &dest)
    };

    let (travel_time_s, scorable) = match route_travel_time(network, route, provider, depart) {
        Ok(t) => (t, true),
        Err(MetricsError::UnknownStation(_)) => (0.0, false),
    };
    let valid = chains && scorable;

    let normalized_time = if !valid {
        1.0
    } else if route.legs.is_empty() {
        0.0
    } else {
        let baseline = network.walk_time(&origin, &dest).expect("endpoints resolved");
        if baseline > 0.0 {
            (travel_time_s / baseline).min(1.0)
        } else if travel_time_s > 0.0 {
            1.0
        } else {
            0.0
        }
    };

    Ok(MetricsReport {
        connected,
        per_leg_connectivity,
        avoided,
        offenders,
        travel_time_s,
        normalized_time,
        transfers,
        format_violation: false,
        valid,
    })
}

// ---------------------------------------------------------------------------
// External directions provider with a disk cache
// ---------------------------------------------------------------------------

/// A travel-time provider backed by an external directions HTTP service,
/// with a disk cache keyed by (mode, line, endpoints, timestamp) so that
/// reruns are offline-reproducible.
///
/// The service is expected to answer `POST <endpoint>` with body
/// `{"mode", "line", "from": {"lat", "lon"}, "to": {"lat", "lon"}, "depart"}`
/// and respond `{"duration_s": <seconds>}`. When the API key environment
/// variable is unset and the cache misses, the provider reports the segment
/// as unavailable instead of failing the evaluation.
pub struct DirectionsProvider<'n> {
    network: &'n TransitNetwork,
    endpoint: String,
    api_key_env: String,
    cache_dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CachedEstimate {
    duration_s: f64,
}

impl<'n> DirectionsProvider<'n> {
    pub fn new(
        network: &'n TransitNetwork,
        endpoint: impl Into<String>,
        api_key_env: impl Into<String>,
        cache_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            network,
            endpoint: endpoint.into(),
            api_key_env: api_key_env.into(),
            cache_dir: cache_dir.into(),
        }
    }

    fn cache_key(
        &self,
        mode: LegMode,
        line: Option<&str>,
        from: &StationId,
        to: &StationId,
        depart: &DateTime<FixedOffset>,
    ) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for part in [
            mode.as_str(),
            line.unwrap_or(""),
            from.as_str(),
            to.as_str(),
            &depart.to_rfc3339(),
        ] {
            hasher.update((part.len() as u64).to_be_bytes());
            hasher.update(part.as_bytes());
        }
        hex::encode(hasher.finalize())
    }

    fn cache_path(&self, key: &str) -> PathBuf {
        self.cache_dir.join(format!("{key}.json"))
    }

    fn query_service(
        &self,
        mode: LegMode,
        line: Option<&str>,
        from: &StationId,
        to: &StationId,
        depart: &DateTime<FixedOffset>,
    ) -> Option<f64> {
        let api_key = std::env::var(&self.api_key_env).ok()?;
        let from_loc = self.network.station(from)?.location;
        let to_loc = self.network.station(to)?.location;
        let body = serde_json::json!({
            "mode": mode.as_str(),
            "line": line,
            "from": {"lat": from_loc.lat, "lon": from_loc.lon},
            "to": {"lat": to_loc.lat, "lon": to_loc.lon},
            "depart": depart.to_rfc3339(),
        });
        let client = reqwest::blocking::Client::new();
        let response = client
            .post(&self.endpoint)
            .bearer_auth(api_key)
            .json(&body)
            .send()
            .ok()?;
        let parsed: CachedEstimate = response.json().ok()?;
        (parsed.duration_s > 0.0).then_some(parsed.duration_s)
    }
}

impl TravelTimeProvider for DirectionsProvider<'_> {
    fn estimate(
        &self,
        mode: LegMode,
        line_label: Option<&str>,
        from: &StationId,
        to: &StationId,
        depart: &DateTime<FixedOffset>,
    ) -> Option<f64> {
        if mode == LegMode::Walk {
            return None;
        }
        let key = self.cache_key(mode, line_label, from, to, depart);
        let path = self.cache_path(&key);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(cached) = serde_json::from_str::<CachedEstimate>(&text) {
                return Some(cached.duration_s);
            }
        }
        let duration = self.query_service(mode, line_label, from, to, depart)?;
        let _ = std::fs::create_dir_all(&self.cache_dir);
        let _ = std::fs::write(
            &path,
            serde_json::to_string(&CachedEstimate { duration_s: duration }).unwrap(),
        );
        Some(duration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::load_network;
    use crate::route::{parse_route, Leg};
    use std::collections::BTreeSet;

    const NET_TOY_WITH_BIKES: &str = r#"{
      "stations": [
        {"id": "A", "name": "A", "lat": 40.700, "lon": -74.000},
        {"id": "B", "name": "B", "lat": 40.710, "lon": -74.000},
        {"id": "C", "name": "C", "lat": 40.720, "lon": -74.000},
        {"id": "D", "name": "D", "lat": 40.730, "lon": -74.000},
        {"id": "E", "name": "E", "lat": 40.712, "lon": -74.008}
      ],
      "lines": [
        {"id": "R", "label": "R", "mode": "subway", "stops": ["A", "B", "C", "D"],
         "hop_times_s": [120, 120, 120], "bidirectional": true},
        {"id": "G", "label": "G", "mode": "subway", "stops": ["A", "E", "D"],
         "hop_times_s": [180, 180], "bidirectional": true}
      ],
      "bike_stations": [
        {"id": "bk-a", "lat": 40.7005, "lon": -74.0005, "bikes": 3},
        {"id": "bk-b", "lat": 40.7095, "lon": -74.0005, "bikes": 0}
      ]
    }"#;

    fn toy() -> TransitNetwork {
        load_network(NET_TOY_WITH_BIKES).unwrap()
    }

    fn sid(s: &str) -> StationId {
        StationId::new(s)
    }

    fn forbid(stations: &[&str]) -> EffectiveConstraints {
        EffectiveConstraints {
            forbidden_stations: stations.iter().map(|s| sid(s)).collect(),
            disabled_lines: BTreeSet::new(),
        }
    }

    fn ride(line: &str, from: &str, to: &str) -> Route {
        Route::new(vec![Leg::ride(LegMode::Subway, line, from, to)])
    }

    #[test]
    fn connected_ride_on_g() {
        let net = toy();
        let (ok, per_leg) = check_connectivity(&net, &ride("G", "A", "D"));
        assert!(ok);
        assert_eq!(per_leg, vec![true]);
    }

    #[test]
    fn ride_to_station_not_on_line_is_disconnected() {
        let net = toy();
        let (ok, per_leg) = check_connectivity(&net, &ride("R", "A", "E"));
        assert!(!ok);
        assert_eq!(per_leg, vec![false]);
    }

    #[test]
    fn walk_legs_are_never_length_limited() {
        let net = toy();
        let (ok, _) = check_connectivity(&net, &Route::new(vec![Leg::walk("A", "D")]));
        assert!(ok);
    }

    #[test]
    fn unresolvable_endpoint_breaks_connectivity() {
        let net = toy();
        let (ok, _) = check_connectivity(&net, &ride("R", "A", "Narnia"));
        assert!(!ok);
    }

    #[test]
    fn bike_needs_nearby_docks_and_available_bikes() {
        let net = toy();
        // A has a dock with bikes; B has an empty dock. A->B works
        // (origin side has bikes), B->A does not.
        let (ok, _) = check_connectivity(&net, &Route::new(vec![Leg::bike("A", "B")]));
        assert!(ok);
        let (ok, _) = check_connectivity(&net, &Route::new(vec![Leg::bike("B", "A")]));
        assert!(!ok);
        // D has no dock within the threshold at all.
        let (ok, _) = check_connectivity(&net, &Route::new(vec![Leg::bike("A", "D")]));
        assert!(!ok);
    }

    #[test]
    fn pass_through_station_fails_avoidance() {
        let net = toy();
        let (ok, offenders) = check_avoidance(&net, &forbid(&["B"]), &ride("R", "A", "C"));
        assert!(!ok);
        assert_eq!(offenders, vec![Offender::Station(sid("B"))]);
    }

    #[test]
    fn route_around_forbidden_station_passes() {
        let net = toy();
        let (ok, offenders) = check_avoidance(&net, &forbid(&["B"]), &ride("G", "A", "D"));
        assert!(ok);
        assert!(offenders.is_empty());
    }

    #[test]
    fn disabled_line_is_an_offender() {
        let net = toy();
        let constraints = EffectiveConstraints {
            forbidden_stations: BTreeSet::new(),
            disabled_lines: BTreeSet::from([LineId::new("R")]),
        };
        let (ok, offenders) = check_avoidance(&net, &constraints, &ride("R", "A", "B"));
        assert!(!ok);
        assert_eq!(offenders, vec![Offender::Line(LineId::new("R"))]);
    }

    #[test]
    fn empty_constraints_always_pass() {
        let net = toy();
        let (ok, _) = check_avoidance(&net, &EffectiveConstraints::default(), &ride("R", "A", "E"));
        assert!(ok);
    }

    #[test]
    fn travel_time_sums_hop_times() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let t = route_travel_time(&net, &ride("G", "A", "D"), &provider, &default_depart()).unwrap();
        assert_eq!(t, 360.0);
    }

    #[test]
    fn disconnected_leg_costs_walk_time() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let t = route_travel_time(&net, &ride("R", "A", "E"), &provider, &default_depart()).unwrap();
        let walk = net.walk_time(&sid("A"), &sid("E")).unwrap();
        assert_eq!(t, walk);
        // independently: ~1.5 km at 1.25 m/s
        assert!((t - 1196.0).abs() / 1196.0 < 0.02, "walk fallback = {t}");
    }

    #[test]
    fn empty_route_has_zero_travel_time() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let t = route_travel_time(&net, &Route::empty(), &provider, &default_depart()).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn transfer_counting() {
        let walk_then_two_rides = Route::new(vec![
            Leg::walk("X", "A"),
            Leg::ride(LegMode::Subway, "R", "A", "B"),
            Leg::ride(LegMode::Subway, "G", "B", "D"),
        ]);
        assert_eq!(count_transfers(&walk_then_two_rides), 2);

        let same_carrier = Route::new(vec![
            Leg::ride(LegMode::Subway, "R", "A", "B"),
            Leg::ride(LegMode::Subway, "R", "B", "C"),
        ]);
        assert_eq!(count_transfers(&same_carrier), 0);

        assert_eq!(count_transfers(&Route::empty()), 0);
        assert_eq!(count_transfers(&ride("R", "A", "B")), 0);
    }

    #[test]
    fn transfers_symmetric_under_reversal() {
        let route = Route::new(vec![
            Leg::walk("X", "A"),
            Leg::ride(LegMode::Subway, "R", "A", "B"),
            Leg::ride(LegMode::Bus, "M", "B", "C"),
        ]);
        let reversed = Route::new(
            route
                .legs
                .iter()
                .rev()
                .map(|l| Leg {
                    mode: l.mode,
                    line: l.line.clone(),
                    from: l.to.clone(),
                    to: l.from.clone(),
                })
                .collect(),
        );
        assert_eq!(count_transfers(&route), count_transfers(&reversed));
    }

    #[test]
    fn evaluate_clean_route() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = ParseOutcome::Route(ride("G", "A", "D"));
        let report = evaluate(
            &net,
            &EffectiveConstraints::default(),
            "A",
            "D",
            &outcome,
            &provider,
            &default_depart(),
        )
        .unwrap();
        assert!(report.connected && report.avoided && report.valid);
        assert!(!report.format_violation);
        assert_eq!(report.travel_time_s, 360.0);
        // 360 s over a ~2670 s walking baseline
        assert!((report.normalized_time - 0.135).abs() < 0.135 * 0.02);
    }

    #[test]
    fn evaluate_format_violation() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = parse_route("Sorry, here is a route: take the G.");
        let report = evaluate(
            &net,
            &EffectiveConstraints::default(),
            "A",
            "D",
            &outcome,
            &provider,
            &default_depart(),
        )
        .unwrap();
        assert!(report.format_violation);
        assert!(!report.valid);
        assert_eq!(report.normalized_time, 1.0);
    }

    #[test]
    fn evaluate_wrong_destination_is_invalid() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = ParseOutcome::Route(ride("R", "A", "C"));
        let report = evaluate(
            &net,
            &EffectiveConstraints::default(),
            "A",
            "D",
            &outcome,
            &provider,
            &default_depart(),
        )
        .unwrap();
        assert!(!report.valid);
        assert_eq!(report.normalized_time, 1.0);
        assert!(report.connected); // the leg itself is fine
    }

    #[test]
    fn evaluate_broken_chain_is_invalid() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = ParseOutcome::Route(Route::new(vec![
            Leg::ride(LegMode::Subway, "R", "A", "B"),
            Leg::ride(LegMode::Subway, "G", "E", "D"),
        ]));
        let report = evaluate(
            &net,
            &EffectiveConstraints::default(),
            "A",
            "D",
            &outcome,
            &provider,
            &default_depart(),
        )
        .unwrap();
        assert!(!report.valid);
        assert_eq!(report.normalized_time, 1.0);
    }

    #[test]
    fn evaluate_origin_equals_dest_empty_route() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = ParseOutcome::Route(Route::empty());
        let report = evaluate(
            &net,
            &EffectiveConstraints::default(),
            "A",
            "A",
            &outcome,
            &provider,
            &default_depart(),
        )
        .unwrap();
        assert!(report.valid);
        assert_eq!(report.normalized_time, 0.0);
        assert_eq!(report.transfers, 0);
    }

    #[test]
    fn evaluate_unknown_origin_is_an_error() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = ParseOutcome::Route(Route::empty());
        assert_eq!(
            evaluate(
                &net,
                &EffectiveConstraints::default(),
                "Narnia",
                "D",
                &outcome,
                &provider,
                &default_depart(),
            ),
            Err(MetricsError::UnknownStation("Narnia".into()))
        );
    }

    #[test]
    fn normalized_time_clamps_at_one() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let outcome = ParseOutcome::Route(Route::new(vec![
            Leg::walk("A", "D"),
            Leg::walk("D", "B"),
        ]));
        let report = evaluate(
            &net,
            &EffectiveConstraints::default(),
            "A",
            "B",
            &outcome,
            &provider,
            &default_depart(),
        )
        .unwrap();
        assert!(report.valid);
        assert_eq!(report.normalized_time, 1.0);
    }

    #[test]
    fn directions_provider_reads_cache_without_network() {
        let net = toy();
        let dir = tempfile::tempdir().unwrap();
        let provider =
            DirectionsProvider::new(&net, "http://unused.invalid", "DETOUR_TEST_NO_KEY", dir.path());
        let depart = default_depart();

        // cold: no key in the environment, no cache -> unavailable
        assert_eq!(
            provider.estimate(LegMode::Subway, Some("G"), &sid("A"), &sid("D"), &depart),
            None
        );

        // seed the cache entry the provider would have written
        let key = provider.cache_key(LegMode::Subway, Some("G"), &sid("A"), &sid("D"), &depart);
        std::fs::write(
            provider.cache_path(&key),
            serde_json::to_string(&CachedEstimate { duration_s: 345.0 }).unwrap(),
        )
        .unwrap();
        assert_eq!(
            provider.estimate(LegMode::Subway, Some("G"), &sid("A"), &sid("D"), &depart),
            Some(345.0)
        );
    }

    #[test]
    fn travel_time_is_additive_over_concatenation() {
        let net = toy();
        let provider = NetworkTimeProvider::new(&net);
        let depart = default_depart();
        let first = ride("R", "A", "B");
        let second = ride("R", "B", "D");
        let joined = Route::new(
            first
                .legs
                .iter()
                .chain(second.legs.iter())
                .cloned()
                .collect(),
        );
        let t1 = route_travel_time(&net, &first, &provider, &depart).unwrap();
        let t2 = route_travel_time(&net, &second, &provider, &depart).unwrap();
        let tj = route_travel_time(&net, &joined, &provider, &depart).unwrap();
        assert!((tj - (t1 + t2)).abs() < 1e-9);
    }
}
