//! Deterministic constrained journey planner, plus an exhaustive twin used
//! as a test oracle.
//!
//! The search space is (station, carrier) states, where a carrier is a
//! specific line or walking. Ride edges follow consecutive stops of a
//! subway or bus line; walk edges connect station pairs within the
//! network's walk-link threshold. Bike and walk-network lines contribute no
//! ride edges: the planner only proposes legs the evaluation engine can
//! verify against the line map. Forbidden stations are removed from the
//! graph entirely, so they cannot be passed through even without alighting,
//! and disabled lines contribute no edges.
//!
//! Changing carrier (other than boarding the first one) costs one transfer
//! and a fixed time penalty. Ties break by fewer transfers, then by the
//! lexicographically smallest sequence of leg line labels, which makes
//! results reproducible across implementations: `plan` and
//! `brute_force_plan` share the cost arithmetic, leg construction, and
//! comparator, and must return identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disruption::EffectiveConstraints;
use crate::network::{Mode, StationId, TransitNetwork};
use crate::route::{Leg, LegMode, Route};

/// What the planner optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Minimize ride + walk seconds plus the transfer penalty.
    MinTime,
    /// Minimize stations visited, tie-broken by the same time cost.
    MinStops,
}

/// Default perceived cost of a transfer, in seconds.
pub const DEFAULT_TRANSFER_PENALTY_S: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    pub transfer_penalty_s: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            transfer_penalty_s: DEFAULT_TRANSFER_PENALTY_S,
        }
    }
}

/// A planned journey and its search-cost summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub route: Route,
    pub total_cost_s: f64,
    pub transfers: u32,
    pub stations_visited: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("unknown station {0}")]
    UnknownStation(StationId),
    #[error("endpoint {0} is forbidden by the active constraints")]
    ForbiddenEndpoint(StationId),
    #[error("no route exists under the active constraints")]
    NoRoute,
    #[error("network has {stations} stations, above the brute-force guard of {max}")]
    TooLarge { stations: usize, max: usize },
}

// ---------------------------------------------------------------------------
// Shared search machinery
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Carrier {
    Start,
    Walk,
    Ride(usize), // index into network.lines()
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    carrier: Carrier,
    cost_s: f64,
}

/// Accumulated path cost. `time_s` already includes transfer penalties;
/// `labels` holds one entry per leg so far (empty string for walk legs).
#[derive(Debug, Clone, PartialEq)]
struct PathCost {
    stations: u32,
    time_s: f64,
    transfers: u32,
    labels: Vec<String>,
}

impl PathCost {
    fn start() -> Self {
        Self {
            stations: 1,
            time_s: 0.0,
            transfers: 0,
            labels: Vec::new(),
        }
    }
}

/// Total order on path costs under an objective. Equal transfer counts imply
/// equal label-sequence lengths (legs = transfers + 1), so the element-wise
/// label comparison is stable under extension, which Dijkstra relies on.
fn cmp_cost(a: &PathCost, b: &PathCost, objective: Objective) -> Ordering {
    let time_then_ties = |a: &PathCost, b: &PathCost| {
        a.time_s
            .total_cmp(&b.time_s)
            .then_with(|| a.transfers.cmp(&b.transfers))
            .then_with(|| a.labels.cmp(&b.labels))
    };
    match objective {
        Objective::MinTime => time_then_ties(a, b),
        Objective::MinStops => a
            .stations
            .cmp(&b.stations)
            .then_with(|| time_then_ties(a, b)),
    }
}

struct SearchGraph<'n> {
    network: &'n TransitNetwork,
    station_index: std::collections::HashMap<StationId, usize>,
    adjacency: Vec<Vec<Edge>>,
    forbidden: Vec<bool>,
}

impl<'n> SearchGraph<'n> {
    fn build(network: &'n TransitNetwork, constraints: &EffectiveConstraints) -> Self {
        let stations = network.stations();
        let station_index: std::collections::HashMap<StationId, usize> = stations
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();
        let forbidden: Vec<bool> = stations
            .iter()
            .map(|s| constraints.forbidden_stations.contains(&s.id))
            .collect();

        let mut adjacency = vec![Vec::new(); stations.len()];
        for (line_idx, line) in network.lines().iter().enumerate() {
            if constraints.disabled_lines.contains(&line.id) {
                continue;
            }
            if !matches!(line.mode, Mode::Subway | Mode::Bus) {
                continue;
            }
            for (i, pair) in line.stops.windows(2).enumerate() {
                let a = station_index[&pair[0]];
                let b = station_index[&pair[1]];
                if forbidden[a] || forbidden[b] {
                    continue;
                }
                let cost = line.hop_times_s[i];
                adjacency[a].push(Edge {
                    to: b,
                    carrier: Carrier::Ride(line_idx),
                    cost_s: cost,
                });
                if line.bidirectional {
                    adjacency[b].push(Edge {
                        to: a,
                        carrier: Carrier::Ride(line_idx),
                        cost_s: cost,
                    });
                }
            }
        }
        for (a, sa) in stations.iter().enumerate() {
            if forbidden[a] {
                continue;
            }
            for (b, sb) in stations.iter().enumerate() {
                if a == b || forbidden[b] {
                    continue;
                }
                let d = crate::geo::haversine_m(sa.location, sb.location);
                if d <= network.walk_link_threshold_m() {
                    adjacency[a].push(Edge {
                        to: b,
                        carrier: Carrier::Walk,
                        cost_s: d / network.walking_speed_mps(),
                    });
                }
            }
        }
        Self {
            network,
            station_index,
            adjacency,
            forbidden,
        }
    }

    fn label_of(&self, carrier: Carrier) -> String {
        match carrier {
            Carrier::Ride(i) => self.network.lines()[i].display_label.clone(),
            _ => String::new(),
        }
    }

    /// Extend a path cost along one edge. Both planners use this for every
    /// hop, so cost arithmetic is bit-identical between them.
    fn extend(&self, cost: &PathCost, from_carrier: Carrier, edge: &Edge, penalty_s: f64) -> PathCost {
        let mut labels = cost.labels.clone();
        let (dt, dtr) = if from_carrier == Carrier::Start {
            labels.push(self.label_of(edge.carrier));
            (edge.cost_s, 0)
        } else if from_carrier != edge.carrier {
            labels.push(self.label_of(edge.carrier));
            (edge.cost_s + penalty_s, 1)
        } else {
            (edge.cost_s, 0)
        };
        PathCost {
            stations: cost.stations + 1,
            time_s: cost.time_s + dt,
            transfers: cost.transfers + dtr,
            labels,
        }
    }

    /// Merge a hop chain into route legs: consecutive hops on one carrier
    /// become a single leg.
    fn hops_to_route(&self, stations: &[usize], carriers: &[Carrier]) -> Route {
        debug_assert_eq!(stations.len(), carriers.len() + 1);
        let name = |idx: usize| self.network.stations()[idx].canonical_name.clone();
        let mut legs: Vec<Leg> = Vec::new();
        let mut i = 0;
        while i < carriers.len() {
            let carrier = carriers[i];
            let mut j = i;
            while j + 1 < carriers.len() && carriers[j + 1] == carrier {
                j += 1;
            }
            let leg = match carrier {
                Carrier::Ride(line_idx) => {
                    let line = &self.network.lines()[line_idx];
                    let mode = match line.mode {
                        Mode::Subway => LegMode::Subway,
                        Mode::Bus => LegMode::Bus,
                        // unreachable while ride edges are subway/bus only
                        Mode::Bike => LegMode::Bike,
                        Mode::WalkNetwork => LegMode::Walk,
                    };
                    Leg {
                        mode,
                        line: Some(line.display_label.clone()),
                        from: name(stations[i]),
                        to: name(stations[j + 1]),
                    }
                }
                Carrier::Walk => Leg::walk(name(stations[i]), name(stations[j + 1])),
                Carrier::Start => unreachable!("start is never an edge carrier"),
            };
            legs.push(leg);
            i = j + 1;
        }
        Route::new(legs)
    }

    fn result(&self, cost: PathCost, stations: &[usize], carriers: &[Carrier]) -> PlanResult {
        PlanResult {
            route: self.hops_to_route(stations, carriers),
            total_cost_s: cost.time_s,
            transfers: cost.transfers,
            stations_visited: cost.stations,
        }
    }
}

fn check_endpoints(
    graph: &SearchGraph<'_>,
    origin: &StationId,
    dest: &StationId,
) -> Result<(usize, usize), PlanError> {
    let o = *graph
        .station_index
        .get(origin)
        .ok_or_else(|| PlanError::UnknownStation(origin.clone()))?;
    let d = *graph
        .station_index
        .get(dest)
        .ok_or_else(|| PlanError::UnknownStation(dest.clone()))?;
    if graph.forbidden[o] {
        return Err(PlanError::ForbiddenEndpoint(origin.clone()));
    }
    if graph.forbidden[d] {
        return Err(PlanError::ForbiddenEndpoint(dest.clone()));
    }
    Ok((o, d))
}

fn empty_result() -> PlanResult {
    PlanResult {
        route: Route::empty(),
        total_cost_s: 0.0,
        transfers: 0,
        stations_visited: 1,
    }
}

// ---------------------------------------------------------------------------
// Dijkstra planner
// ---------------------------------------------------------------------------

struct QueueEntry {
    cost: PathCost,
    state: usize,
    objective: Objective,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want the smallest cost first
        cmp_cost(&other.cost, &self.cost, self.objective)
            .then_with(|| other.state.cmp(&self.state))
    }
}

/// Plan a journey with the default transfer penalty.
pub fn plan(
    network: &TransitNetwork,
    constraints: &EffectiveConstraints,
    origin: &StationId,
    dest: &StationId,
    objective: Objective,
) -> Result<PlanResult, PlanError> {
    plan_with_options(network, constraints, origin, dest, objective, &PlanOptions::default())
}

pub fn plan_with_options(
    network: &TransitNetwork,
    constraints: &EffectiveConstraints,
    origin: &StationId,
    dest: &StationId,
    objective: Objective,
    options: &PlanOptions,
) -> Result<PlanResult, PlanError> {
    let graph = SearchGraph::build(network, constraints);
    let (o, d) = check_endpoints(&graph, origin, dest)?;
    if o == d {
        return Ok(empty_result());
    }

    let n_lines = network.lines().len();
    let carriers_per_station = n_lines + 2; // Start, Walk, Ride(i)
    let carrier_code = |c: Carrier| match c {
        Carrier::Start => 0usize,
        Carrier::Walk => 1,
        Carrier::Ride(i) => 2 + i,
    };
    let state_of = |station: usize, c: Carrier| station * carriers_per_station + carrier_code(c);
    let station_of = |state: usize| state / carriers_per_station;
    let carrier_of = |state: usize| match state % carriers_per_station {
        0 => Carrier::Start,
        1 => Carrier::Walk,
        k => Carrier::Ride(k - 2),
    };

    let n_states = network.stations().len() * carriers_per_station;
    let mut best: Vec<Option<PathCost>> = vec![None; n_states];
    let mut parent: Vec<Option<usize>> = vec![None; n_states];
    let mut heap = BinaryHeap::new();

    let start_state = state_of(o, Carrier::Start);
    best[start_state] = Some(PathCost::start());
    heap.push(QueueEntry {
        cost: PathCost::start(),
        state: start_state,
        objective,
    });

    while let Some(QueueEntry { cost, state, .. }) = heap.pop() {
        match &best[state] {
            Some(known) if cmp_cost(known, &cost, objective) == Ordering::Less => continue,
            _ => {}
        }
        let station = station_of(state);
        let carrier = carrier_of(state);
        for edge in &graph.adjacency[station] {
            let next_cost = graph.extend(&cost, carrier, edge, options.transfer_penalty_s);
            let next_state = state_of(edge.to, edge.carrier);
            let improves = match &best[next_state] {
                None => true,
                Some(current) => cmp_cost(&next_cost, current, objective) == Ordering::Less,
            };
            if improves {
                best[next_state] = Some(next_cost.clone());
                parent[next_state] = Some(state);
                heap.push(QueueEntry {
                    cost: next_cost,
                    state: next_state,
                    objective,
                });
            }
        }
    }

    // pick the best terminal state at the destination
    let mut winner: Option<usize> = None;
    for code in 0..carriers_per_station {
        let state = d * carriers_per_station + code;
        if best[state].is_none() {
            continue;
        }
        winner = match winner {
            None => Some(state),
            Some(current) => {
                let a = best[state].as_ref().unwrap();
                let b = best[current].as_ref().unwrap();
                if cmp_cost(a, b, objective) == Ordering::Less {
                    Some(state)
                } else {
                    Some(current)
                }
            }
        };
    }
    let end_state = winner.ok_or(PlanError::NoRoute)?;

    // walk parents back to the origin
    let mut states = vec![end_state];
    let mut cursor = end_state;
    while let Some(prev) = parent[cursor] {
        states.push(prev);
        cursor = prev;
    }
    states.reverse();
    let stations: Vec<usize> = states.iter().map(|&s| station_of(s)).collect();
    let carriers: Vec<Carrier> = states[1..].iter().map(|&s| carrier_of(s)).collect();

    let cost = best[end_state].clone().unwrap();
    Ok(graph.result(cost, &stations, &carriers))
}

// ---------------------------------------------------------------------------
// Exhaustive planner (test oracle)
// ---------------------------------------------------------------------------

/// Exhaustively enumerate simple station paths realizable by rides and
/// walks, applying the identical cost model and tie-breaking as [`plan`].
/// Refuses networks with more than `max_stations` stations.
pub fn brute_force_plan(
    network: &TransitNetwork,
    constraints: &EffectiveConstraints,
    origin: &StationId,
    dest: &StationId,
    objective: Objective,
    max_stations: usize,
) -> Result<PlanResult, PlanError> {
    brute_force_plan_with_options(
        network,
        constraints,
        origin,
        dest,
        objective,
        max_stations,
        &PlanOptions::default(),
    )
}

pub fn brute_force_plan_with_options(
    network: &TransitNetwork,
    constraints: &EffectiveConstraints,
    origin: &StationId,
    dest: &StationId,
    objective: Objective,
    max_stations: usize,
    options: &PlanOptions,
) -> Result<PlanResult, PlanError> {
    let n = network.stations().len();
    if n > max_stations {
        return Err(PlanError::TooLarge {
            stations: n,
            max: max_stations,
        });
    }
    let graph = SearchGraph::build(network, constraints);
    let (o, d) = check_endpoints(&graph, origin, dest)?;
    if o == d {
        return Ok(empty_result());
    }

    struct Dfs<'g, 'n> {
        graph: &'g SearchGraph<'n>,
        objective: Objective,
        penalty_s: f64,
        dest: usize,
        visited: Vec<bool>,
        stations: Vec<usize>,
        carriers: Vec<Carrier>,
        best: Option<(PathCost, Vec<usize>, Vec<Carrier>)>,
    }

    impl Dfs<'_, '_> {
        fn run(&mut self, at: usize, carrier: Carrier, cost: PathCost) {
            if at == self.dest {
                let candidate_wins = match &self.best {
                    None => true,
                    Some((best_cost, _, _)) => {
                        cmp_cost(&cost, best_cost, self.objective) == Ordering::Less
                    }
                };
                if candidate_wins {
                    self.best = Some((cost, self.stations.clone(), self.carriers.clone()));
                }
                return;
            }
            // sound pruning: the primary key only grows along a path
            if let Some((best_cost, _, _)) = &self.best {
                let worse = match self.objective {
                    Objective::MinTime => cost.time_s > best_cost.time_s,
                    Objective::MinStops => cost.stations >= best_cost.stations,
                };
                if worse {
                    return;
                }
            }
            for i in 0..self.graph.adjacency[at].len() {
                let edge = self.graph.adjacency[at][i];
                if self.visited[edge.to] {
                    continue;
                }
                let next = self.graph.extend(&cost, carrier, &edge, self.penalty_s);
                self.visited[edge.to] = true;
                self.stations.push(edge.to);
                self.carriers.push(edge.carrier);
                self.run(edge.to, edge.carrier, next);
                self.carriers.pop();
                self.stations.pop();
                self.visited[edge.to] = false;
            }
        }
    }

    let mut dfs = Dfs {
        graph: &graph,
        objective,
        penalty_s: options.transfer_penalty_s,
        dest: d,
        visited: vec![false; n],
        stations: vec![o],
        carriers: Vec::new(),
        best: None,
    };
    dfs.visited[o] = true;
    dfs.run(o, Carrier::Start, PathCost::start());

    match dfs.best {
        Some((cost, stations, carriers)) => Ok(graph.result(cost, &stations, &carriers)),
        None => Err(PlanError::NoRoute),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{load_network, LineId};
    use std::collections::BTreeSet;

    const NET_TOY: &str = r#"{
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
      ]
    }"#;

    fn toy() -> TransitNetwork {
        load_network(NET_TOY).unwrap()
    }

    fn sid(s: &str) -> StationId {
        StationId::new(s)
    }

    fn no_constraints() -> EffectiveConstraints {
        EffectiveConstraints::default()
    }

    fn forbid(stations: &[&str]) -> EffectiveConstraints {
        EffectiveConstraints {
            forbidden_stations: stations.iter().map(|s| sid(s)).collect(),
            disabled_lines: BTreeSet::new(),
        }
    }

    #[test]
    fn tie_breaks_to_line_g_on_labels() {
        let net = toy();
        let result = plan(&net, &no_constraints(), &sid("A"), &sid("D"), Objective::MinTime).unwrap();
        assert_eq!(result.total_cost_s, 360.0);
        assert_eq!(result.transfers, 0);
        assert_eq!(result.stations_visited, 3);
        assert_eq!(result.route.legs.len(), 1);
        assert_eq!(result.route.legs[0].line.as_deref(), Some("G"));
        assert_eq!(result.route.legs[0].from, "A");
        assert_eq!(result.route.legs[0].to, "D");
    }

    #[test]
    fn forbidding_e_reroutes_via_r() {
        let net = toy();
        let result = plan(&net, &forbid(&["E"]), &sid("A"), &sid("D"), Objective::MinTime).unwrap();
        assert_eq!(result.total_cost_s, 360.0);
        assert_eq!(result.transfers, 0);
        assert_eq!(result.route.legs[0].line.as_deref(), Some("R"));
        assert_eq!(result.stations_visited, 4);
    }

    #[test]
    fn stranded_walk_link_yields_no_route() {
        let net = toy();
        let constraints = EffectiveConstraints {
            forbidden_stations: BTreeSet::from([sid("C")]),
            disabled_lines: BTreeSet::from([LineId::new("G")]),
        };
        assert_eq!(
            plan(&net, &constraints, &sid("A"), &sid("D"), Objective::MinTime),
            Err(PlanError::NoRoute)
        );
    }

    #[test]
    fn origin_equals_dest_is_empty() {
        let net = toy();
        let result = plan(&net, &no_constraints(), &sid("A"), &sid("A"), Objective::MinTime).unwrap();
        assert_eq!(result.route, Route::empty());
        assert_eq!(result.total_cost_s, 0.0);
        assert_eq!(result.transfers, 0);
        assert_eq!(result.stations_visited, 1);
    }

    #[test]
    fn forbidden_endpoint_is_an_error() {
        let net = toy();
        assert_eq!(
            plan(&net, &forbid(&["A"]), &sid("A"), &sid("D"), Objective::MinTime),
            Err(PlanError::ForbiddenEndpoint(sid("A")))
        );
        assert_eq!(
            plan(&net, &forbid(&["D"]), &sid("A"), &sid("D"), Objective::MinTime),
            Err(PlanError::ForbiddenEndpoint(sid("D")))
        );
    }

    #[test]
    fn unknown_station_is_an_error() {
        let net = toy();
        assert_eq!(
            plan(&net, &no_constraints(), &sid("Z"), &sid("D"), Objective::MinTime),
            Err(PlanError::UnknownStation(sid("Z")))
        );
    }

    #[test]
    fn min_stops_prefers_fewer_stations() {
        let net = toy();
        let result = plan(&net, &no_constraints(), &sid("A"), &sid("D"), Objective::MinStops).unwrap();
        assert_eq!(result.stations_visited, 3);
        assert_eq!(result.route.legs[0].line.as_deref(), Some("G"));
    }

    #[test]
    fn direct_ride_merges_into_one_leg() {
        let net = toy();
        let result = plan(&net, &no_constraints(), &sid("A"), &sid("C"), Objective::MinTime).unwrap();
        assert_eq!(result.route.legs.len(), 1);
        assert_eq!(result.transfers, 0);
        assert_eq!(result.total_cost_s, 240.0);
    }

    #[test]
    fn multi_leg_route_chains_and_counts_transfers() {
        // With R disabled, B->D goes walk B->E then ride G.
        let net = toy();
        let constraints = EffectiveConstraints {
            forbidden_stations: BTreeSet::new(),
            disabled_lines: BTreeSet::from([LineId::new("R")]),
        };
        let result = plan(&net, &constraints, &sid("B"), &sid("D"), Objective::MinTime).unwrap();
        assert_eq!(result.route.legs.len(), 2);
        assert_eq!(result.route.legs[0].mode, LegMode::Walk);
        assert_eq!(result.route.legs[0].from, "B");
        assert_eq!(result.route.legs[0].to, "E");
        assert_eq!(result.route.legs[1].line.as_deref(), Some("G"));
        assert_eq!(result.transfers, 1);
        // walk B->E (~568 s) + ride 180 s + 300 s penalty
        assert!((result.total_cost_s - (568.0 + 180.0 + 300.0)).abs() < 5.0);
    }

    #[test]
    fn plan_is_deterministic() {
        let net = toy();
        let a = plan(&net, &no_constraints(), &sid("A"), &sid("D"), Objective::MinTime).unwrap();
        let b = plan(&net, &no_constraints(), &sid("A"), &sid("D"), Objective::MinTime).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_cost_s.to_bits(), b.total_cost_s.to_bits());
    }

    #[test]
    fn constraint_monotonicity_on_toy() {
        let net = toy();
        let free = plan(&net, &no_constraints(), &sid("A"), &sid("D"), Objective::MinTime).unwrap();
        let constrained =
            plan(&net, &forbid(&["E"]), &sid("A"), &sid("D"), Objective::MinTime).unwrap();
        assert!(constrained.total_cost_s >= free.total_cost_s);
    }

    #[test]
    fn brute_force_guard() {
        let net = toy();
        assert_eq!(
            brute_force_plan(&net, &no_constraints(), &sid("A"), &sid("D"), Objective::MinTime, 3),
            Err(PlanError::TooLarge { stations: 5, max: 3 })
        );
    }

    #[test]
    fn brute_force_matches_plan_on_all_toy_pairs() {
        let net = toy();
        let constraint_sets = [no_constraints(), forbid(&["C"])];
        let ids = ["A", "B", "C", "D", "E"];
        for constraints in &constraint_sets {
            for from in ids {
                for to in ids {
                    for objective in [Objective::MinTime, Objective::MinStops] {
                        let fast = plan(&net, constraints, &sid(from), &sid(to), objective);
                        let slow = brute_force_plan(
                            &net, constraints, &sid(from), &sid(to), objective, 8,
                        );
                        assert_eq!(fast, slow, "{from}->{to} under {constraints:?} {objective:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn isolated_stations_have_no_route() {
        let doc = r#"{
          "stations": [
            {"id": "X", "name": "X", "lat": 0.0, "lon": 0.0},
            {"id": "Y", "name": "Y", "lat": 10.0, "lon": 10.0}
          ]
        }"#;
        let net = load_network(doc).unwrap();
        assert_eq!(
            brute_force_plan(&net, &no_constraints(), &sid("X"), &sid("Y"), Objective::MinTime, 8),
            Err(PlanError::NoRoute)
        );
        assert_eq!(
            plan(&net, &no_constraints(), &sid("X"), &sid("Y"), Objective::MinTime),
            Err(PlanError::NoRoute)
        );
    }

    #[test]
    fn single_station_self_route() {
        let doc = r#"{"stations": [{"id": "X", "name": "X", "lat": 0.0, "lon": 0.0}]}"#;
        let net = load_network(doc).unwrap();
        let result =
            brute_force_plan(&net, &no_constraints(), &sid("X"), &sid("X"), Objective::MinTime, 8)
                .unwrap();
        assert_eq!(result.route, Route::empty());
        assert_eq!(result.stations_visited, 1);
    }
}
