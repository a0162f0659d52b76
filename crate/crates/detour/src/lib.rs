//! Disruption-aware public transit routing and evaluation toolkit.
//!
//! The library models a transit system as an explicit, machine-readable
//! network (stations, lines, bike stations), compiles user-declared
//! disruptions into concrete forbidden sets, and plans journeys around them
//! with a deterministic constrained router. The same network powers an
//! evaluation engine that scores any proposed route — including routes
//! produced by an LLM planning pipeline — on connectivity, disruption
//! avoidance, normalized travel time, and transfer count.
//!
//! The LLM side is a two-stage prompt pipeline (free-text planner, then a
//! summarizer that must emit a strict JSON route) with a transcript store for
//! offline record/replay, plus a scenario harness that runs provider ×
//! ablation matrices and renders report tables.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `detour` binary for the command-line interface.

pub mod disruption;
pub mod geo;
pub mod gtfs;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod route;
pub mod router;
pub mod scenario;

pub use disruption::{compile, DangerZone, DisruptionSpec, EffectiveConstraints};
pub use network::{
    load_network, BikeStation, Line, LineId, Mode, Station, StationId, TransitNetwork,
};
pub use route::{parse_route, serialize_route, Leg, LegMode, ParseOutcome, Route};
pub use router::{brute_force_plan, plan, Objective, PlanResult};
