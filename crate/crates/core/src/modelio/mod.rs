//! Contracts for the four external model roles (video generator, VLM judge,
//! embedder, grounder), deterministic in-process implementations, and HTTP
//! clients plus a local stub server speaking the same wire format.

mod embedder;
mod grounder;
pub mod http;
mod mock;
pub mod stub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BBox, Frame, VideoClip};

pub use embedder::{cosine, PatchHistogramEmbedder, EMBED_DIM};
pub use grounder::{HsvGrounder, StaticGrounder};
pub use http::{HttpConfig, HttpEmbedder, HttpGenerator, HttpGrounder, HttpJudge, JudgeAdapter};
pub use mock::{FnJudge, JudgeCall, OracleGenerator, ScriptedJudge};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClientError {
    /// Raised before any request is made (missing key, bad endpoint, ...).
    #[error("configuration error: {0}")]
    Config(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error("scripted judge exhausted after {0} replies")]
    Exhausted(usize),
    #[error("no sample matches the initial frame (hash {0})")]
    UnknownFrame(String),
    #[error("{0}")]
    Backend(String),
}

impl ClientError {
    /// Worth another attempt: transport failures, 5xx and 429.
    pub fn is_transient(&self) -> bool {
        match self {
            ClientError::Transport(_) => true,
            ClientError::Status { status, .. } => *status >= 500 || *status == 429,
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox,
    pub confidence: f64,
}

pub trait GeneratorClient: Send + Sync {
    fn generate(&self, initial: &Frame, prompt: &str, seed: u64) -> Result<VideoClip, ClientError>;

    /// Key into the harness resolution policy.
    fn model_name(&self) -> &str {
        "default"
    }
}

pub trait JudgeClient: Send + Sync {
    fn chat(&self, images: &[Frame], text: &str) -> Result<String, ClientError>;
}

pub trait Embedder: Send + Sync {
    fn embed(&self, crop: &Frame) -> Result<Vec<f64>, ClientError>;
}

pub trait Grounder: Send + Sync {
    fn ground(&self, frame: &Frame, label: &str) -> Result<Vec<Detection>, ClientError>;
}

impl<T: GeneratorClient + ?Sized> GeneratorClient for std::sync::Arc<T> {
    fn generate(&self, initial: &Frame, prompt: &str, seed: u64) -> Result<VideoClip, ClientError> {
        (**self).generate(initial, prompt, seed)
    }

    fn model_name(&self) -> &str {
        (**self).model_name()
    }
}

impl<T: JudgeClient + ?Sized> JudgeClient for std::sync::Arc<T> {
    fn chat(&self, images: &[Frame], text: &str) -> Result<String, ClientError> {
        (**self).chat(images, text)
    }
}
