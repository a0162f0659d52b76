//! Scenario files: a network reference, an origin/destination pair, the
//! natural-language query fed to the planning pipeline, and the
//! machine-readable disruption spec the evaluation engine enforces.
//!
//! The prose and the spec describe the same disruption twice — the prose is
//! what the language models see, the spec is what the metrics check — and
//! keeping the two consistent is the scenario author's contract.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disruption::DisruptionSpec;
use crate::network::{load_network, NetworkError, TransitNetwork};
use crate::router::Objective;

/// How an attached image participates in prompts: `map` attachments form the
/// knowledge base and drop out in the without-maps ablation; `user`
/// attachments belong to the query itself and are always included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttachmentRole {
    Map,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachmentRef {
    /// Image path, relative to the scenario file.
    pub path: String,
    pub caption: String,
    pub role: AttachmentRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    /// Network document path, relative to the scenario file.
    pub network_ref: String,
    pub origin_name: String,
    pub dest_name: String,
    pub disruption: DisruptionSpec,
    pub objective: Objective,
    pub query_text: String,
    pub attachments: Vec<AttachmentRef>,
    pub take_home: String,
    base_dir: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    id: String,
    network: String,
    origin: String,
    dest: String,
    #[serde(default)]
    disruption: DisruptionSpec,
    #[serde(default = "default_objective")]
    objective: Objective,
    query: String,
    #[serde(default)]
    attachments: Vec<AttachmentRef>,
    #[serde(default)]
    take_home: String,
}

fn default_objective() -> Objective {
    Objective::MinTime
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("scenario {id}: network {path} cannot be loaded: {source}")]
    MissingNetwork {
        id: String,
        path: PathBuf,
        source: NetworkError,
    },
    #[error("scenario {id}: network file {path} is unreadable")]
    UnreadableNetwork { id: String, path: PathBuf },
    #[error("scenario {id}: attachment {path} is missing")]
    MissingAttachment { id: String, path: PathBuf },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Scenario {
    /// Absolute path of the referenced network document.
    pub fn network_path(&self) -> PathBuf {
        self.base_dir.join(&self.network_ref)
    }

    /// Absolute path of one attachment.
    pub fn attachment_path(&self, attachment: &AttachmentRef) -> PathBuf {
        self.base_dir.join(&attachment.path)
    }

    /// Load and validate the scenario's network document.
    pub fn load_network(&self) -> Result<TransitNetwork, ScenarioError> {
        let path = self.network_path();
        let text = std::fs::read_to_string(&path).map_err(|_| ScenarioError::UnreadableNetwork {
            id: self.id.clone(),
            path: path.clone(),
        })?;
        load_network(&text).map_err(|source| ScenarioError::MissingNetwork {
            id: self.id.clone(),
            path,
            source,
        })
    }

    /// Build a scenario in memory, rooted at `base_dir` for relative paths.
    /// Primarily useful for tests and embedding.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        network_ref: impl Into<String>,
        origin_name: impl Into<String>,
        dest_name: impl Into<String>,
        disruption: DisruptionSpec,
        objective: Objective,
        query_text: impl Into<String>,
        attachments: Vec<AttachmentRef>,
        base_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            id: id.into(),
            network_ref: network_ref.into(),
            origin_name: origin_name.into(),
            dest_name: dest_name.into(),
            disruption,
            objective,
            query_text: query_text.into(),
            attachments,
            take_home: String::new(),
            base_dir: base_dir.into(),
        }
    }
}

/// Load a single scenario file and validate its references.
pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let doc: ScenarioDoc = serde_json::from_str(&text).map_err(|e| ScenarioError::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let scenario = Scenario {
        id: doc.id,
        network_ref: doc.network,
        origin_name: doc.origin,
        dest_name: doc.dest,
        disruption: doc.disruption,
        objective: doc.objective,
        query_text: doc.query,
        attachments: doc.attachments,
        take_home: doc.take_home,
        base_dir,
    };

    scenario.load_network()?;
    for attachment in &scenario.attachments {
        let file = scenario.attachment_path(attachment);
        if !file.is_file() {
            return Err(ScenarioError::MissingAttachment {
                id: scenario.id.clone(),
                path: file,
            });
        }
    }
    Ok(scenario)
}

/// Load scenarios from a directory (every `*.json`, sorted by file name) or
/// from a single scenario file.
pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<Scenario>, ScenarioError> {
    let path = path.as_ref();
    if path.is_file() {
        return Ok(vec![load_scenario_file(path)?]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    files.iter().map(load_scenario_file).collect()
}
