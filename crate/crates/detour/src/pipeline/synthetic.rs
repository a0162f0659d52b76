//! Deterministic synthetic cassettes for the bundled scenarios.
//!
//! The seeder plays the role of a well-behaved model: the planner response
//! narrates the deterministic router's route for the scenario, and the
//! two-stage summary response is that route's canonical JSON. Two planned
//! flaws give the violation accounting something to measure: scenario S4's
//! two-stage summary second-guesses the plan and wraps the JSON in prose,
//! and every single-stage response mixes prose with the JSON. Everything is
//! a pure function of the scenario and provider, so reseeding writes
//! byte-identical files.

use thiserror::Error;

use crate::disruption::{compile, CompileError};
use crate::network::{ResolveError, TransitNetwork};
use crate::route::{serialize_route, InvariantViolation, LegMode};
use crate::router::{plan, PlanError, PlanResult};
use crate::scenario::{Scenario, ScenarioError};

use super::prompts::{build_planner_prompt, build_summary_prompt, PromptError};
use super::transcript::{transcript_key, RequestSnapshot, StoreError, Transcript, TranscriptStore};
use super::{single_stage_bundle, MapMode, PromptBundle, ProviderConfig};

/// Timestamp stamped on every synthetic transcript, so files are stable.
pub const SYNTHETIC_RECORDED_AT: &str = "2024-05-01T13:30:00-04:00";

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("scenario {id}: {source}")]
    Constraints { id: String, source: CompileError },
    #[error("scenario {id}: endpoint does not resolve: {source}")]
    Endpoint { id: String, source: ResolveError },
    #[error("scenario {id}: the deterministic router found no route: {source}")]
    Plan { id: String, source: PlanError },
    #[error(transparent)]
    Serialize(#[from] InvariantViolation),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn leg_sentence(index: usize, leg: &crate::route::Leg) -> String {
    match leg.mode {
        LegMode::Walk => format!("{index}. Walk from {} to {}.", leg.from, leg.to),
        LegMode::Bike => format!("{index}. Bike from {} to {}.", leg.from, leg.to),
        LegMode::Subway => format!(
            "{index}. Take the {} subway from {} to {}.",
            leg.line.as_deref().unwrap_or("?"),
            leg.from,
            leg.to
        ),
        LegMode::Bus => format!(
            "{index}. Take the {} bus from {} to {}.",
            leg.line.as_deref().unwrap_or("?"),
            leg.from,
            leg.to
        ),
    }
}

/// The planner-stage narration of a deterministic route.
pub fn synthetic_plan_text(scenario: &Scenario, result: &PlanResult) -> String {
    let mut lines = vec![format!(
        "I checked the attached knowledge base. Safest route from {} to {}:",
        scenario.origin_name, scenario.dest_name
    )];
    if result.route.legs.is_empty() {
        lines.push("You are already at the destination; no travel is needed.".to_string());
    } else {
        for (i, leg) in result.route.legs.iter().enumerate() {
            lines.push(leg_sentence(i + 1, leg));
        }
    }
    lines.push(format!(
        "This avoids every disrupted line and marked area, with {} transfer(s).",
        result.transfers
    ));
    lines.join("\n")
}

/// The two-stage summary response: canonical route JSON, except S4, whose
/// summary distrusts the plan and adds prose around the object.
pub fn synthetic_summary_text(scenario: &Scenario, route_json: &str) -> String {
    if scenario.id == "S4" {
        format!(
            "The plan rides through the area the narrative warns about, so I adjusted it before summarizing:\n{route_json}"
        )
    } else {
        route_json.to_string()
    }
}

/// The single-stage response: plan reasoning and JSON in one message, which
/// is never a clean route object.
pub fn synthetic_single_stage_text(plan_text: &str, route_json: &str) -> String {
    format!("{plan_text}\n\nSummary:\n{route_json}\n\nSafe travels!")
}

/// Plan a scenario with the deterministic router.
pub fn oracle_plan(scenario: &Scenario, network: &TransitNetwork) -> Result<PlanResult, SyntheticError> {
    let wrap_resolve = |source: ResolveError| SyntheticError::Endpoint {
        id: scenario.id.clone(),
        source,
    };
    let constraints = compile(network, &scenario.disruption).map_err(|source| {
        SyntheticError::Constraints {
            id: scenario.id.clone(),
            source,
        }
    })?;
    let origin = network
        .resolve_station(&scenario.origin_name)
        .map_err(wrap_resolve)?
        .id
        .clone();
    let dest = network
        .resolve_station(&scenario.dest_name)
        .map_err(wrap_resolve)?
        .id
        .clone();
    plan(network, &constraints, &origin, &dest, scenario.objective).map_err(|source| {
        SyntheticError::Plan {
            id: scenario.id.clone(),
            source,
        }
    })
}

fn store_response(
    store: &TranscriptStore,
    config: &ProviderConfig,
    bundle: &PromptBundle,
    response_text: String,
) -> Result<(), SyntheticError> {
    let key = transcript_key(&config.name, &config.model_id, bundle);
    store.put(&Transcript {
        key,
        request_snapshot: RequestSnapshot::of(&config.name, &config.model_id, bundle),
        response_text,
        recorded_at: SYNTHETIC_RECORDED_AT.to_string(),
    })?;
    Ok(())
}

/// Write synthetic transcripts covering every scenario × provider ×
/// pipeline mode × map mode cell. Returns the number of transcripts written
/// (summary transcripts are shared between map modes, so this is less than
/// the raw cell count).
pub fn seed_synthetic_cassettes(
    scenarios: &[Scenario],
    providers: &[ProviderConfig],
    store: &TranscriptStore,
) -> Result<usize, SyntheticError> {
    let mut written = 0;
    for scenario in scenarios {
        let network = scenario.load_network()?;
        let result = oracle_plan(scenario, &network)?;
        let route_json = serialize_route(&result.route)?;
        let plan_text = synthetic_plan_text(scenario, &result);

        for config in providers {
            for map_mode in [MapMode::WithMaps, MapMode::WithoutMaps] {
                let planner_bundle = build_planner_prompt(scenario, map_mode)?;
                store_response(store, config, &planner_bundle, plan_text.clone())?;
                written += 1;

                let single_bundle = single_stage_bundle(scenario, map_mode)?;
                store_response(
                    store,
                    config,
                    &single_bundle,
                    synthetic_single_stage_text(&plan_text, &route_json),
                )?;
                written += 1;
            }
            let summary_bundle = build_summary_prompt(&plan_text)?;
            store_response(
                store,
                config,
                &summary_bundle,
                synthetic_summary_text(scenario, &route_json),
            )?;
            written += 1;
        }
    }
    Ok(written)
}

/// Convenience for tests: a parsed route must come back from a clean
/// synthetic summary.
pub fn is_clean_summary(scenario: &Scenario) -> bool {
    scenario.id != "S4"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disruption::DisruptionSpec;
    use crate::pipeline::{run_pipeline, AdapterKind, IoMode, PipelineMode, RecordingTransport, RetryPolicy};
    use crate::router::Objective;

    fn toy_scenario(dir: &std::path::Path, id: &str) -> Scenario {
        std::fs::write(
            dir.join("net.json"),
            r#"{
              "stations": [
                {"id": "A", "name": "A", "lat": 40.700, "lon": -74.000},
                {"id": "D", "name": "D", "lat": 40.730, "lon": -74.000}
              ],
              "lines": [
                {"id": "G", "label": "G", "mode": "subway", "stops": ["A", "D"],
                 "hop_times_s": [360], "bidirectional": true}
              ]
            }"#,
        )
        .unwrap();
        std::fs::write(dir.join("map.png"), b"\x89PNG\r\n\x1a\nfake").unwrap();
        Scenario::new(
            id,
            "net.json",
            "A",
            "D",
            DisruptionSpec::default(),
            Objective::MinTime,
            "A to D please",
            vec![crate::scenario::AttachmentRef {
                path: "map.png".into(),
                caption: "subway map".into(),
                role: crate::scenario::AttachmentRole::Map,
            }],
            dir,
        )
    }

    fn providers() -> Vec<ProviderConfig> {
        ["gpt", "gemini"]
            .iter()
            .map(|name| ProviderConfig {
                name: name.to_string(),
                endpoint: "https://api.example.invalid".into(),
                model_id: format!("{name}-model"),
                auth_token_env: "UNSET".into(),
                adapter: AdapterKind::OpenaiChat,
                max_output_tokens: 256,
                temperature: 0.0,
                retry: RetryPolicy::default(),
            })
            .collect()
    }

    #[test]
    fn seeded_cassettes_cover_all_modes() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = toy_scenario(dir.path(), "T1");
        let store = TranscriptStore::open(dir.path().join("cassettes"));
        let written =
            seed_synthetic_cassettes(std::slice::from_ref(&scenario), &providers(), &store).unwrap();
        // per provider: 2 planner + 2 single-stage + 1 summary
        assert_eq!(written, 10);
        assert_eq!(store.len(), 10);

        let recorder = RecordingTransport::refusing();
        for config in providers() {
            for pipeline_mode in [PipelineMode::TwoStage, PipelineMode::SingleStage] {
                for map_mode in [MapMode::WithMaps, MapMode::WithoutMaps] {
                    let run = run_pipeline(
                        &scenario,
                        &config,
                        pipeline_mode,
                        map_mode,
                        &store,
                        IoMode::Replay,
                        &recorder,
                    )
                    .unwrap();
                    match pipeline_mode {
                        PipelineMode::TwoStage => {
                            assert!(run.parse.route().is_some(), "two-stage should be clean")
                        }
                        PipelineMode::SingleStage => {
                            assert!(run.parse.is_violation(), "single-stage mixes prose")
                        }
                    }
                }
            }
        }
        assert_eq!(recorder.calls(), 0);
    }

    #[test]
    fn s4_summary_is_prose_wrapped() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = toy_scenario(dir.path(), "S4");
        let store = TranscriptStore::open(dir.path().join("cassettes"));
        seed_synthetic_cassettes(std::slice::from_ref(&scenario), &providers()[..1], &store).unwrap();

        let recorder = RecordingTransport::refusing();
        let run = run_pipeline(
            &scenario,
            &providers()[0],
            PipelineMode::TwoStage,
            MapMode::WithMaps,
            &store,
            IoMode::Replay,
            &recorder,
        )
        .unwrap();
        assert!(run.parse.is_violation());
    }

    #[test]
    fn reseeding_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = toy_scenario(dir.path(), "T1");
        let cassette_dir = dir.path().join("cassettes");
        let store = TranscriptStore::open(&cassette_dir);
        seed_synthetic_cassettes(std::slice::from_ref(&scenario), &providers(), &store).unwrap();

        let snapshot = |d: &std::path::Path| {
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(d)
                .unwrap()
                .map(|e| {
                    let p = e.unwrap().path();
                    (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
                })
                .collect();
            files.sort();
            files
        };
        let first = snapshot(&cassette_dir);
        seed_synthetic_cassettes(std::slice::from_ref(&scenario), &providers(), &store).unwrap();
        let second = snapshot(&cassette_dir);
        assert_eq!(first, second);
    }
}
