//! The two-stage planning pipeline: planner prompt → free-text plan →
//! summary prompt → strict route JSON, with a transcript store that makes
//! every run recordable and replayable offline.

pub mod prompts;
pub mod provider;
pub mod synthetic;
pub mod transcript;
pub mod transport;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::route::{parse_route, ParseOutcome};
use crate::scenario::Scenario;

pub use prompts::{
    build_planner_prompt, build_summary_prompt, summary_system_text, template_digest, Attachment,
    MediaType, PromptBundle, PromptError, PLANNER_SYSTEM_TEXT, PROMPT_TEMPLATE_VERSION,
};
pub use provider::{
    build_request, load_provider_configs, parse_response_text, wrap_response_text, AdapterKind,
    ProviderConfig, ProviderError, RetryPolicy,
};
pub use transcript::{transcript_key, RequestSnapshot, StoreError, Transcript, TranscriptStore};
pub use transport::{
    HttpRequest, HttpTransport, RecordingTransport, ScriptedTransport, Transport, TransportError,
};

/// Whether invocations hit the network, hit it and persist transcripts, or
/// answer purely from stored transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IoMode {
    Live,
    Record,
    Replay,
}

/// Planner-then-summary, or one merged agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineMode {
    TwoStage,
    SingleStage,
}

impl PipelineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineMode::TwoStage => "two-stage",
            PipelineMode::SingleStage => "single-stage",
        }
    }
}

/// Whether knowledge-base map images are attached to the planner prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapMode {
    WithMaps,
    WithoutMaps,
}

impl MapMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MapMode::WithMaps => "with-maps",
            MapMode::WithoutMaps => "without-maps",
        }
    }
}

#[derive(Debug, Error)]
pub enum InvokeError {
    #[error("auth token environment variable {0} is not set")]
    Auth(String),
    #[error("no transcript for key {0} in the cassette store")]
    ReplayMiss(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// One provider invocation under an io mode.
///
/// Replay answers from the store and never touches the transport. Live sends
/// the request (retrying on rate limits and transient network failures per
/// the provider's retry policy). Record is live plus persisting the
/// transcript.
pub fn invoke(
    config: &ProviderConfig,
    bundle: &PromptBundle,
    store: &TranscriptStore,
    io_mode: IoMode,
    transport: &dyn Transport,
) -> Result<String, InvokeError> {
    let key = transcript_key(&config.name, &config.model_id, bundle);
    if io_mode == IoMode::Replay {
        return match store.get(&key)? {
            Some(transcript) => Ok(transcript.response_text),
            None => Err(InvokeError::ReplayMiss(key)),
        };
    }

    let token = std::env::var(&config.auth_token_env)
        .map_err(|_| InvokeError::Auth(config.auth_token_env.clone()))?;
    let request = build_request(config, bundle, &token);

    let mut backoff = std::time::Duration::from_millis(config.retry.initial_backoff_ms);
    let attempts = config.retry.max_attempts.max(1);
    let mut last_error = TransportError::Network("no attempts made".into());
    let mut body = None;
    for attempt in 0..attempts {
        match transport.execute(&request) {
            Ok(text) => {
                body = Some(text);
                break;
            }
            Err(TransportError::AuthRejected(message)) => {
                return Err(TransportError::AuthRejected(message).into());
            }
            Err(retryable) => {
                last_error = retryable;
                if attempt + 1 < attempts {
                    std::thread::sleep(backoff);
                    backoff *= 2;
                }
            }
        }
    }
    let body = body.ok_or(InvokeError::Transport(last_error))?;
    let text = parse_response_text(config.adapter, &body)?;

    if io_mode == IoMode::Record {
        store.put(&Transcript {
            key,
            request_snapshot: RequestSnapshot::of(&config.name, &config.model_id, bundle),
            response_text: text.clone(),
            recorded_at: chrono::Utc::now().to_rfc3339(),
        })?;
    }
    Ok(text)
}

/// The single-stage ablation bundle: planner and summary instructions merged,
/// in that order, over the planner's user prompt and attachments.
pub fn single_stage_bundle(
    scenario: &Scenario,
    map_mode: MapMode,
) -> Result<PromptBundle, PromptError> {
    let planner = build_planner_prompt(scenario, map_mode)?;
    Ok(PromptBundle {
        system_text: format!("{}\n\n{}", planner.system_text, summary_system_text()),
        user_text: planner.user_text,
        attachments: planner.attachments,
    })
}

/// Everything one pipeline run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub plan_text: String,
    pub summary_text: String,
    pub parse: ParseOutcome,
}

/// Run the pipeline for one scenario against one provider.
pub fn run_pipeline(
    scenario: &Scenario,
    config: &ProviderConfig,
    pipeline_mode: PipelineMode,
    map_mode: MapMode,
    store: &TranscriptStore,
    io_mode: IoMode,
    transport: &dyn Transport,
) -> Result<PipelineRun, InvokeError> {
    match pipeline_mode {
        PipelineMode::TwoStage => {
            let planner_bundle = build_planner_prompt(scenario, map_mode)?;
            let plan_text = invoke(config, &planner_bundle, store, io_mode, transport)?;
            let summary_bundle = build_summary_prompt(&plan_text)?;
            let summary_text = invoke(config, &summary_bundle, store, io_mode, transport)?;
            let parse = parse_route(&summary_text);
            Ok(PipelineRun {
                plan_text,
                summary_text,
                parse,
            })
        }
        PipelineMode::SingleStage => {
            let bundle = single_stage_bundle(scenario, map_mode)?;
            let text = invoke(config, &bundle, store, io_mode, transport)?;
            let parse = parse_route(&text);
            Ok(PipelineRun {
                plan_text: text.clone(),
                summary_text: text,
                parse,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disruption::DisruptionSpec;
    use crate::router::Objective;

    fn test_config(name: &str, token_env: &str) -> ProviderConfig {
        ProviderConfig {
            name: name.into(),
            endpoint: "https://api.example.invalid/v1".into(),
            model_id: "model-x".into(),
            auth_token_env: token_env.into(),
            adapter: AdapterKind::OpenaiChat,
            max_output_tokens: 256,
            temperature: 0.0,
            retry: RetryPolicy {
                max_attempts: 3,
                initial_backoff_ms: 1,
            },
        }
    }

    fn bundle(user: &str) -> PromptBundle {
        PromptBundle {
            system_text: "sys".into(),
            user_text: user.into(),
            attachments: vec![],
        }
    }

    #[test]
    fn replay_returns_stored_text_without_network() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path());
        let config = test_config("p", "DETOUR_TEST_UNSET_TOKEN");
        let b = bundle("hello");
        let key = transcript_key(&config.name, &config.model_id, &b);
        store
            .put(&Transcript {
                key,
                request_snapshot: RequestSnapshot::of(&config.name, &config.model_id, &b),
                response_text: "stored answer".into(),
                recorded_at: "2024-05-01T13:30:00-04:00".into(),
            })
            .unwrap();

        let recorder = RecordingTransport::refusing();
        let text = invoke(&config, &b, &store, IoMode::Replay, &recorder).unwrap();
        assert_eq!(text, "stored answer");
        assert_eq!(recorder.calls(), 0);
    }

    #[test]
    fn replay_miss_on_empty_store() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path());
        let config = test_config("p", "DETOUR_TEST_UNSET_TOKEN");
        let recorder = RecordingTransport::refusing();
        let result = invoke(&config, &bundle("hello"), &store, IoMode::Replay, &recorder);
        assert!(matches!(result, Err(InvokeError::ReplayMiss(_))));
        assert_eq!(recorder.calls(), 0);
    }

    #[test]
    fn missing_auth_token_fails_before_any_request() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path());
        let config = test_config("p", "DETOUR_TEST_DEFINITELY_UNSET");
        let recorder = RecordingTransport::refusing();
        let result = invoke(&config, &bundle("hello"), &store, IoMode::Live, &recorder);
        assert!(matches!(result, Err(InvokeError::Auth(_))));
        assert_eq!(recorder.calls(), 0);
    }

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path());
        let config = test_config("p", "DETOUR_TEST_TOKEN_RECORD");
        std::env::set_var("DETOUR_TEST_TOKEN_RECORD", "secret");

        let transport = ScriptedTransport::new(vec![Ok(wrap_response_text(
            AdapterKind::OpenaiChat,
            "live answer",
        ))]);
        let recorded = invoke(&config, &bundle("q"), &store, IoMode::Record, &transport).unwrap();
        assert_eq!(recorded, "live answer");
        assert_eq!(store.len(), 1);

        let recorder = RecordingTransport::refusing();
        let replayed = invoke(&config, &bundle("q"), &store, IoMode::Replay, &recorder).unwrap();
        assert_eq!(replayed, "live answer");
        assert_eq!(recorder.calls(), 0);
    }

    #[test]
    fn rate_limits_are_retried_then_surfaced() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::open(dir.path());
        let config = test_config("p", "DETOUR_TEST_TOKEN_RETRY");
        std::env::set_var("DETOUR_TEST_TOKEN_RETRY", "secret");

        // two rate limits, then success
        let transport = ScriptedTransport::new(vec![
            Err(TransportError::RateLimited),
            Err(TransportError::RateLimited),
            Ok(wrap_response_text(AdapterKind::OpenaiChat, "eventually")),
        ]);
        let text = invoke(&config, &bundle("q"), &store, IoMode::Live, &transport).unwrap();
        assert_eq!(text, "eventually");
        assert_eq!(transport.requests().len(), 3);

        // exhausted retries surface the transport error
        let transport = ScriptedTransport::new(vec![
            Err(TransportError::RateLimited),
            Err(TransportError::RateLimited),
            Err(TransportError::RateLimited),
        ]);
        let result = invoke(&config, &bundle("q"), &store, IoMode::Live, &transport);
        assert!(matches!(
            result,
            Err(InvokeError::Transport(TransportError::RateLimited))
        ));
    }

    fn toy_scenario(dir: &std::path::Path) -> Scenario {
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
        Scenario::new(
            "T1",
            "net.json",
            "A",
            "D",
            DisruptionSpec::default(),
            Objective::MinTime,
            "A to D please",
            vec![],
            dir,
        )
    }

    #[test]
    fn two_stage_replay_parses_a_clean_summary() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = toy_scenario(dir.path());
        let store = TranscriptStore::open(dir.path().join("cassettes"));
        let config = test_config("p", "DETOUR_TEST_UNSET_TOKEN");

        let planner_bundle = build_planner_prompt(&scenario, MapMode::WithMaps).unwrap();
        let plan_text = "Take the G line from A to D.";
        store
            .put(&Transcript {
                key: transcript_key(&config.name, &config.model_id, &planner_bundle),
                request_snapshot: RequestSnapshot::of(&config.name, &config.model_id, &planner_bundle),
                response_text: plan_text.into(),
                recorded_at: "2024-05-01T13:30:00-04:00".into(),
            })
            .unwrap();
        let summary_bundle = build_summary_prompt(plan_text).unwrap();
        store
            .put(&Transcript {
                key: transcript_key(&config.name, &config.model_id, &summary_bundle),
                request_snapshot: RequestSnapshot::of(&config.name, &config.model_id, &summary_bundle),
                response_text: r#"{"legs":[{"mode":"subway","line":"G","from":"A","to":"D"}]}"#.into(),
                recorded_at: "2024-05-01T13:30:00-04:00".into(),
            })
            .unwrap();

        let recorder = RecordingTransport::refusing();
        let run = run_pipeline(
            &scenario,
            &config,
            PipelineMode::TwoStage,
            MapMode::WithMaps,
            &store,
            IoMode::Replay,
            &recorder,
        )
        .unwrap();
        assert_eq!(run.plan_text, plan_text);
        let route = run.parse.route().expect("clean summary should parse");
        assert_eq!(route.legs.len(), 1);
        assert_eq!(recorder.calls(), 0);
    }

    #[test]
    fn planner_miss_short_circuits_before_summary() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = toy_scenario(dir.path());
        let store = TranscriptStore::open(dir.path().join("cassettes"));
        let config = test_config("p", "DETOUR_TEST_UNSET_TOKEN");
        let recorder = RecordingTransport::refusing();
        let result = run_pipeline(
            &scenario,
            &config,
            PipelineMode::TwoStage,
            MapMode::WithMaps,
            &store,
            IoMode::Replay,
            &recorder,
        );
        assert!(matches!(result, Err(InvokeError::ReplayMiss(_))));
        assert_eq!(recorder.calls(), 0);
        assert!(store.is_empty());
    }

    #[test]
    fn single_stage_prose_output_is_a_violation() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = toy_scenario(dir.path());
        let store = TranscriptStore::open(dir.path().join("cassettes"));
        let config = test_config("p", "DETOUR_TEST_UNSET_TOKEN");

        let bundle = single_stage_bundle(&scenario, MapMode::WithMaps).unwrap();
        assert!(bundle.system_text.contains("path-finding agent"));
        assert!(bundle.system_text.contains("route summary expert"));
        store
            .put(&Transcript {
                key: transcript_key(&config.name, &config.model_id, &bundle),
                request_snapshot: RequestSnapshot::of(&config.name, &config.model_id, &bundle),
                response_text:
                    "Here you go!\n{\"legs\":[{\"mode\":\"subway\",\"line\":\"G\",\"from\":\"A\",\"to\":\"D\"}]}"
                        .into(),
                recorded_at: "2024-05-01T13:30:00-04:00".into(),
            })
            .unwrap();

        let recorder = RecordingTransport::refusing();
        let run = run_pipeline(
            &scenario,
            &config,
            PipelineMode::SingleStage,
            MapMode::WithMaps,
            &store,
            IoMode::Replay,
            &recorder,
        )
        .unwrap();
        assert!(run.parse.is_violation());
        assert_eq!(run.plan_text, run.summary_text);
    }
}
