//! Provider configuration and the request/response adapters that normalize
//! the vendors' chat APIs behind one interface.

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::prompts::PromptBundle;
use super::transport::HttpRequest;

/// Which wire shape the provider's endpoint speaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdapterKind {
    OpenaiChat,
    AnthropicMessages,
    GeminiGenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff_ms: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub name: String,
    pub endpoint: String,
    pub model_id: String,
    /// Environment variable holding the API token; never stored in config.
    pub auth_token_env: String,
    pub adapter: AdapterKind,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    /// 0 for reproducibility unless overridden.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_max_output_tokens() -> u32 {
    1024
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider config error: {0}")]
    Config(String),
    #[error("unexpected {adapter:?} response shape: {message}")]
    BadResponse {
        adapter: AdapterKind,
        message: String,
    },
}

/// Parse a provider config file: a JSON array of provider objects.
pub fn load_provider_configs(text: &str) -> Result<Vec<ProviderConfig>, ProviderError> {
    serde_json::from_str(text).map_err(|e| ProviderError::Config(e.to_string()))
}

fn b64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

/// Shape a prompt bundle into the provider's wire format. The token is
/// placed where the vendor expects it (bearer header, x-api-key, or query
/// parameter).
pub fn build_request(config: &ProviderConfig, bundle: &PromptBundle, token: &str) -> HttpRequest {
    match config.adapter {
        AdapterKind::OpenaiChat => {
            let mut content = vec![json!({"type": "text", "text": bundle.user_text})];
            for attachment in &bundle.attachments {
                content.push(json!({
                    "type": "image_url",
                    "image_url": {
                        "url": format!(
                            "data:{};base64,{}",
                            attachment.media_type.as_str(),
                            b64(&attachment.bytes)
                        )
                    }
                }));
            }
            HttpRequest {
                url: config.endpoint.clone(),
                headers: vec![("Authorization".into(), format!("Bearer {token}"))],
                body: json!({
                    "model": config.model_id,
                    "temperature": config.temperature,
                    "max_tokens": config.max_output_tokens,
                    "messages": [
                        {"role": "system", "content": bundle.system_text},
                        {"role": "user", "content": content},
                    ],
                }),
            }
        }
        AdapterKind::AnthropicMessages => {
            let mut content = vec![json!({"type": "text", "text": bundle.user_text})];
            for attachment in &bundle.attachments {
                content.push(json!({
                    "type": "image",
                    "source": {
                        "type": "base64",
                        "media_type": attachment.media_type.as_str(),
                        "data": b64(&attachment.bytes),
                    }
                }));
            }
            HttpRequest {
                url: config.endpoint.clone(),
                headers: vec![
                    ("x-api-key".into(), token.to_string()),
                    ("anthropic-version".into(), "2023-06-01".into()),
                ],
                body: json!({
                    "model": config.model_id,
                    "temperature": config.temperature,
                    "max_tokens": config.max_output_tokens,
                    "system": bundle.system_text,
                    "messages": [{"role": "user", "content": content}],
                }),
            }
        }
        AdapterKind::GeminiGenerate => {
            let mut parts = vec![json!({"text": bundle.user_text})];
            for attachment in &bundle.attachments {
                parts.push(json!({
                    "inline_data": {
                        "mime_type": attachment.media_type.as_str(),
                        "data": b64(&attachment.bytes),
                    }
                }));
            }
            HttpRequest {
                url: format!("{}?key={token}", config.endpoint),
                headers: vec![],
                body: json!({
                    "systemInstruction": {"parts": [{"text": bundle.system_text}]},
                    "contents": [{"role": "user", "parts": parts}],
                    "generationConfig": {
                        "temperature": config.temperature,
                        "maxOutputTokens": config.max_output_tokens,
                    },
                }),
            }
        }
    }
}

/// Extract the generated text from a provider's raw response body.
pub fn parse_response_text(adapter: AdapterKind, body: &str) -> Result<String, ProviderError> {
    let bad = |message: &str| ProviderError::BadResponse {
        adapter,
        message: message.to_string(),
    };
    let value: Value =
        serde_json::from_str(body).map_err(|e| bad(&format!("not JSON: {e}")))?;
    match adapter {
        AdapterKind::OpenaiChat => value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| bad("missing choices[0].message.content")),
        AdapterKind::AnthropicMessages => {
            let content = value
                .pointer("/content")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing content array"))?;
            let text: String = content
                .iter()
                .filter_map(|block| block.get("text").and_then(Value::as_str))
                .collect();
            if text.is_empty() {
                Err(bad("no text blocks in content"))
            } else {
                Ok(text)
            }
        }
        AdapterKind::GeminiGenerate => {
            let parts = value
                .pointer("/candidates/0/content/parts")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing candidates[0].content.parts"))?;
            let text: String = parts
                .iter()
                .filter_map(|part| part.get("text").and_then(Value::as_str))
                .collect();
            if text.is_empty() {
                Err(bad("no text parts in candidate"))
            } else {
                Ok(text)
            }
        }
    }
}

/// Wrap plain text in the provider's response shape. The synthetic cassette
/// seeder and the scripted tests use this so recorded bodies look like what
/// the live path would have parsed.
pub fn wrap_response_text(adapter: AdapterKind, text: &str) -> String {
    let body = match adapter {
        AdapterKind::OpenaiChat => json!({
            "choices": [{"message": {"role": "assistant", "content": text}}]
        }),
        AdapterKind::AnthropicMessages => json!({
            "content": [{"type": "text", "text": text}]
        }),
        AdapterKind::GeminiGenerate => json!({
            "candidates": [{"content": {"parts": [{"text": text}]}}]
        }),
    };
    body.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::prompts::{Attachment, MediaType};

    fn config(adapter: AdapterKind) -> ProviderConfig {
        ProviderConfig {
            name: "test".into(),
            endpoint: "https://api.example.invalid/v1".into(),
            model_id: "model-x".into(),
            auth_token_env: "TEST_TOKEN".into(),
            adapter,
            max_output_tokens: 256,
            temperature: 0.0,
            retry: RetryPolicy::default(),
        }
    }

    fn bundle_with_image() -> PromptBundle {
        PromptBundle {
            system_text: "sys".into(),
            user_text: "user".into(),
            attachments: vec![Attachment {
                media_type: MediaType::Png,
                bytes: vec![1, 2, 3],
                caption: "map".into(),
            }],
        }
    }

    #[test]
    fn openai_request_shape() {
        let request = build_request(&config(AdapterKind::OpenaiChat), &bundle_with_image(), "tok");
        assert_eq!(request.headers[0].1, "Bearer tok");
        assert_eq!(request.body["model"], "model-x");
        assert_eq!(request.body["messages"][0]["role"], "system");
        let image = &request.body["messages"][1]["content"][1]["image_url"]["url"];
        assert!(image.as_str().unwrap().starts_with("data:image/png;base64,"));
    }

    #[test]
    fn anthropic_request_shape() {
        let request = build_request(
            &config(AdapterKind::AnthropicMessages),
            &bundle_with_image(),
            "tok",
        );
        assert!(request.headers.iter().any(|(k, v)| k == "x-api-key" && v == "tok"));
        assert_eq!(request.body["system"], "sys");
        assert_eq!(
            request.body["messages"][0]["content"][1]["source"]["media_type"],
            "image/png"
        );
    }

    #[test]
    fn gemini_request_shape() {
        let request = build_request(
            &config(AdapterKind::GeminiGenerate),
            &bundle_with_image(),
            "tok",
        );
        assert!(request.url.ends_with("?key=tok"));
        assert_eq!(
            request.body["systemInstruction"]["parts"][0]["text"],
            "sys"
        );
        assert_eq!(
            request.body["contents"][0]["parts"][1]["inline_data"]["mime_type"],
            "image/png"
        );
    }

    #[test]
    fn responses_round_trip_through_wrappers() {
        for adapter in [
            AdapterKind::OpenaiChat,
            AdapterKind::AnthropicMessages,
            AdapterKind::GeminiGenerate,
        ] {
            let body = wrap_response_text(adapter, "the route");
            assert_eq!(parse_response_text(adapter, &body).unwrap(), "the route");
        }
    }

    #[test]
    fn malformed_response_is_an_error() {
        assert!(parse_response_text(AdapterKind::OpenaiChat, "{}").is_err());
        assert!(parse_response_text(AdapterKind::OpenaiChat, "not json").is_err());
    }

    #[test]
    fn provider_file_parses() {
        let text = r#"[
          {"name": "gpt", "endpoint": "https://x.invalid/chat", "model_id": "gpt-4",
           "auth_token_env": "OPENAI_API_KEY", "adapter": "openai-chat"},
          {"name": "claude", "endpoint": "https://y.invalid/messages", "model_id": "claude-3-opus",
           "auth_token_env": "ANTHROPIC_API_KEY", "adapter": "anthropic-messages",
           "temperature": 0.0, "max_output_tokens": 2048}
        ]"#;
        let configs = load_provider_configs(text).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].retry.max_attempts, 3);
        assert_eq!(configs[1].max_output_tokens, 2048);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let text = r#"[{"name": "x", "endpoint": "e", "model_id": "m",
            "auth_token_env": "T", "adapter": "openai-chat", "surprise": 1}]"#;
        assert!(load_provider_configs(text).is_err());
    }
}
