//! Persisted request/response pairs ("cassettes") for deterministic replay.
//!
//! A transcript's key is a content digest of the provider name, model id,
//! and the canonical encoding of the prompt bundle — texts and raw
//! attachment bytes, length-prefixed in order. Nothing time-dependent goes
//! into the digest, so semantically identical bundles key identically across
//! runs and machines. Each transcript is one file in the cassette directory,
//! named by its hex digest, holding canonical JSON.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompts::PromptBundle;

/// Compute the replay key for one invocation.
pub fn transcript_key(provider_name: &str, model_id: &str, bundle: &PromptBundle) -> String {
    let mut hasher = Sha256::new();
    let mut push = |bytes: &[u8]| {
        hasher.update((bytes.len() as u64).to_be_bytes());
        hasher.update(bytes);
    };
    push(provider_name.as_bytes());
    push(model_id.as_bytes());
    push(bundle.system_text.as_bytes());
    push(bundle.user_text.as_bytes());
    push(&(bundle.attachments.len() as u64).to_be_bytes());
    for attachment in &bundle.attachments {
        push(attachment.media_type.as_str().as_bytes());
        push(attachment.caption.as_bytes());
        push(&attachment.bytes);
    }
    hex::encode(hasher.finalize())
}

/// What was sent, in reviewable form: attachment bytes are digested, not
/// inlined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSnapshot {
    pub provider: String,
    pub model_id: String,
    pub system_text: String,
    pub user_text: String,
    pub attachments: Vec<AttachmentSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentSnapshot {
    pub media_type: String,
    pub caption: String,
    pub sha256: String,
    pub bytes_len: u64,
}

impl RequestSnapshot {
    pub fn of(provider: &str, model_id: &str, bundle: &PromptBundle) -> Self {
        Self {
            provider: provider.to_string(),
            model_id: model_id.to_string(),
            system_text: bundle.system_text.clone(),
            user_text: bundle.user_text.clone(),
            attachments: bundle
                .attachments
                .iter()
                .map(|a| AttachmentSnapshot {
                    media_type: a.media_type.as_str().to_string(),
                    caption: a.caption.clone(),
                    sha256: hex::encode(Sha256::digest(&a.bytes)),
                    bytes_len: a.bytes.len() as u64,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub key: String,
    pub request_snapshot: RequestSnapshot,
    pub response_text: String,
    pub recorded_at: String,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cassette directory {0} is unusable: {1}")]
    Io(PathBuf, String),
    #[error("cassette {0} is corrupt: {1}")]
    Corrupt(PathBuf, String),
}

/// One file per transcript under a cassette directory. Reads are lock-free;
/// writes are serialized.
pub struct TranscriptStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl TranscriptStore {
    pub fn open(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, key: &str) -> PathBuf {
        self.dir.join(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.path_of(key).is_file()
    }

    pub fn get(&self, key: &str) -> Result<Option<Transcript>, StoreError> {
        let path = self.path_of(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(StoreError::Io(path, e.to_string())),
        };
        let transcript: Transcript =
            serde_json::from_str(&text).map_err(|e| StoreError::Corrupt(path, e.to_string()))?;
        Ok(Some(transcript))
    }

    pub fn put(&self, transcript: &Transcript) -> Result<(), StoreError> {
        let _guard = self.write_lock.lock().expect("store lock poisoned");
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| StoreError::Io(self.dir.clone(), e.to_string()))?;
        let path = self.path_of(&transcript.key);
        let json = serde_json::to_string(transcript).expect("transcript serialization cannot fail");
        std::fs::write(&path, json).map_err(|e| StoreError::Io(path, e.to_string()))?;
        Ok(())
    }

    /// Number of transcripts on disk.
    pub fn len(&self) -> usize {
        std::fs::read_dir(&self.dir)
            .map(|entries| entries.filter_map(Result::ok).filter(|e| e.path().is_file()).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
