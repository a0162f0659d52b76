//! Prompt construction for the two pipeline stages.
//!
//! The planner prompt states the agent's role, the safety-first rule
//! (including that passing through a marked station while staying on the
//! train counts as a safety risk), and the obligation to consult the
//! attached knowledge base. The summary prompt embeds the route grammar
//! verbatim and lists the accepted transportation terms with an explicit
//! walking example, which keeps summarizers from dropping walk steps.

use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::{AttachmentRole, Scenario};
use crate::route::ROUTE_GRAMMAR;

use super::MapMode;

/// Identifies the shipped prompt wording; bump when templates change.
pub const PROMPT_TEMPLATE_VERSION: &str = "v1";

pub const PLANNER_SYSTEM_TEXT: &str = "\
You are an alternative path-finding agent for public transit riders facing \
disruptions. Consult your knowledge base — the attached transit map images — \
every time before recommending anything; do not rely on memory of the city.

Consider safety first and then efficiency. Treat passing through any station \
the rider marked as dangerous or asked to avoid as a safety risk, even \
staying on the train without getting off there. Never use lines the rider \
reported as out of service.

Recommend one route. Describe it step by step, naming the transportation \
service and the boarding and alighting stations of every step, including \
walking connections.";

pub const SUMMARY_SYSTEM_TEXT_PREFIX: &str = "\
You are a route summary expert. Convert the route description you receive \
into a standardized summary: exactly one JSON object of this form, keys in \
this order:

";

pub const SUMMARY_SYSTEM_TEXT_SUFFIX: &str = "

Acceptable transportation service terms for \"mode\": subway, train, bus, \
walk, bike. Include every step of the plan — walking steps too, for example \
{\"mode\":\"walk\",\"from\":\"5 Av\",\"to\":\"Grand Central-42 St\"}.

No other texts should be generated: the output is consumed directly by a \
program.";

/// Instructions appended to every planner user prompt.
pub const USER_PROMPT_SUFFIX: &str = "\
Check the attached images and honor every constraint stated above. List each \
step of the route with its service and stations.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediaType {
    Png,
    Jpeg,
}

impl MediaType {
    pub fn as_str(&self) -> &'static str {
        match self {
            MediaType::Png => "image/png",
            MediaType::Jpeg => "image/jpeg",
        }
    }

    fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(MediaType::Png),
            "jpg" | "jpeg" => Some(MediaType::Jpeg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub media_type: MediaType,
    pub bytes: Vec<u8>,
    pub caption: String,
}

/// Everything one model invocation needs: system text, user text, and an
/// ordered list of image attachments.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub attachments: Vec<Attachment>,
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("attachment file {0} is missing or unreadable")]
    MissingAttachmentFile(PathBuf),
    #[error("attachment {0} is not a png or jpeg image")]
    UnsupportedMediaType(PathBuf),
    #[error("the planner produced an empty plan")]
    EmptyPlan,
}

/// Build the planner-stage prompt for a scenario. Map attachments are
/// included only in with-maps mode; user-query attachments (a marked danger
/// zone, bike availability snapshots) are included in both modes.
pub fn build_planner_prompt(
    scenario: &Scenario,
    map_mode: MapMode,
) -> Result<PromptBundle, PromptError> {
    let mut attachments = Vec::new();
    for role in [AttachmentRole::Map, AttachmentRole::User] {
        if role == AttachmentRole::Map && map_mode == MapMode::WithoutMaps {
            continue;
        }
        for reference in scenario.attachments.iter().filter(|a| a.role == role) {
            let path = scenario.attachment_path(reference);
            let media_type = MediaType::from_path(&path)
                .ok_or_else(|| PromptError::UnsupportedMediaType(path.clone()))?;
            let bytes = std::fs::read(&path)
                .map_err(|_| PromptError::MissingAttachmentFile(path.clone()))?;
            attachments.push(Attachment {
                media_type,
                bytes,
                caption: reference.caption.clone(),
            });
        }
    }
    Ok(PromptBundle {
        system_text: PLANNER_SYSTEM_TEXT.to_string(),
        user_text: format!("{}\n\n{}", scenario.query_text, USER_PROMPT_SUFFIX),
        attachments,
    })
}

/// The summary stage's system text, with the route grammar embedded verbatim.
pub fn summary_system_text() -> String {
    format!("{SUMMARY_SYSTEM_TEXT_PREFIX}{ROUTE_GRAMMAR}{SUMMARY_SYSTEM_TEXT_SUFFIX}")
}

/// Build the summary-stage prompt around a planner's free-text plan.
pub fn build_summary_prompt(plan_text: &str) -> Result<PromptBundle, PromptError> {
    if plan_text.trim().is_empty() {
        return Err(PromptError::EmptyPlan);
    }
    Ok(PromptBundle {
        system_text: summary_system_text(),
        user_text: plan_text.to_string(),
        attachments: Vec::new(),
    })
}

/// Digest of the shipped prompt wording, so experiment records can pin the
/// exact template in use.
pub fn template_digest() -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for part in [
        PROMPT_TEMPLATE_VERSION,
        PLANNER_SYSTEM_TEXT,
        &summary_system_text(),
        USER_PROMPT_SUFFIX,
    ] {
        hasher.update((part.len() as u64).to_be_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disruption::DisruptionSpec;
    use crate::router::Objective;
    use crate::scenario::AttachmentRef;
    use std::fs;

    fn scenario_with_attachments(dir: &std::path::Path, attachments: Vec<AttachmentRef>) -> Scenario {
        Scenario::new(
            "T1",
            "net.json",
            "A",
            "D",
            DisruptionSpec::default(),
            Objective::MinTime,
            "How do I get from A to D?",
            attachments,
            dir,
        )
    }

    fn write_png(dir: &std::path::Path, name: &str) {
        // tiny but valid-enough payload for prompt assembly
        fs::write(dir.join(name), b"\x89PNG\r\n\x1a\nfake").unwrap();
    }

    #[test]
    fn with_maps_attaches_maps_and_user_images() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "map.png");
        write_png(dir.path(), "danger.png");
        let scenario = scenario_with_attachments(
            dir.path(),
            vec![
                AttachmentRef {
                    path: "map.png".into(),
                    caption: "subway map".into(),
                    role: AttachmentRole::Map,
                },
                AttachmentRef {
                    path: "danger.png".into(),
                    caption: "danger zone".into(),
                    role: AttachmentRole::User,
                },
            ],
        );
        let bundle = build_planner_prompt(&scenario, MapMode::WithMaps).unwrap();
        assert_eq!(bundle.attachments.len(), 2);
        assert_eq!(bundle.attachments[0].caption, "subway map");
        assert!(bundle.user_text.contains("How do I get from A to D?"));
        assert!(bundle.system_text.contains("safety"));
        assert!(bundle.system_text.contains("staying on the train"));
    }

    #[test]
    fn without_maps_keeps_user_images_only() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "map.png");
        write_png(dir.path(), "danger.png");
        let scenario = scenario_with_attachments(
            dir.path(),
            vec![
                AttachmentRef {
                    path: "map.png".into(),
                    caption: "subway map".into(),
                    role: AttachmentRole::Map,
                },
                AttachmentRef {
                    path: "danger.png".into(),
                    caption: "danger zone".into(),
                    role: AttachmentRole::User,
                },
            ],
        );
        let bundle = build_planner_prompt(&scenario, MapMode::WithoutMaps).unwrap();
        assert_eq!(bundle.attachments.len(), 1);
        assert_eq!(bundle.attachments[0].caption, "danger zone");
    }

    #[test]
    fn no_attachments_without_maps_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = scenario_with_attachments(dir.path(), Vec::new());
        let bundle = build_planner_prompt(&scenario, MapMode::WithoutMaps).unwrap();
        assert!(bundle.attachments.is_empty());
    }

    #[test]
    fn missing_attachment_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = scenario_with_attachments(
            dir.path(),
            vec![AttachmentRef {
                path: "ghost.png".into(),
                caption: "missing".into(),
                role: AttachmentRole::Map,
            }],
        );
        assert!(matches!(
            build_planner_prompt(&scenario, MapMode::WithMaps),
            Err(PromptError::MissingAttachmentFile(_))
        ));
    }

    #[test]
    fn summary_prompt_embeds_the_grammar() {
        let bundle = build_summary_prompt("Take the G line from A to D.").unwrap();
        assert!(bundle.system_text.contains(ROUTE_GRAMMAR));
        assert!(bundle.system_text.contains("walk"));
        assert!(bundle.attachments.is_empty());
        assert_eq!(bundle.user_text, "Take the G line from A to D.");
    }

    #[test]
    fn empty_plan_is_rejected() {
        assert!(matches!(build_summary_prompt("  \n"), Err(PromptError::EmptyPlan)));
    }

    #[test]
    fn template_digest_is_stable() {
        assert_eq!(template_digest(), template_digest());
        assert_eq!(template_digest().len(), 64);
    }
}
