//! JSON-over-HTTP clients. Every request is a POST of a JSON object;
//! images travel as base64-encoded PNG.
//!
//! | role      | request                                                          | reply                                   |
//! |-----------|------------------------------------------------------------------|-----------------------------------------|
//! | judge     | `{model, messages:[{role:"user", content:[{type:"text",text}, {type:"image",data}...]}]}` | text at `adapter.reply_pointer` |
//! | embedder  | `{model, image}`                                                 | `{embedding:[f64]}`                     |
//! | grounder  | `{model, image, label}`                                          | `{detections:[{bbox:{x,y,w,h},confidence}]}` |
//! | generator | `{model, image, prompt, seed}`                                   | `{fps, frames:[png...]}`                |

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::model::{Frame, VideoClip};

use super::{ClientError, Detection, Embedder, GeneratorClient, Grounder, JudgeClient};

/// Field mapping for chat backends that differ from the default shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeAdapter {
    /// JSON pointer to the reply text.
    pub reply_pointer: String,
    pub text_part_type: String,
    pub image_part_type: String,
    /// Key holding the base64 PNG inside an image part.
    pub image_field: String,
}

impl Default for JudgeAdapter {
    fn default() -> Self {
        JudgeAdapter {
            reply_pointer: "/choices/0/message/content".into(),
            text_part_type: "text".into(),
            image_part_type: "image".into(),
            image_field: "data".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token; empty disables auth.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub retries: u32,
    /// First backoff delay; doubles on every retry.
    pub backoff_base_ms: u64,
    pub max_in_flight: usize,
    pub adapter: JudgeAdapter,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: "TIVI_JUDGE_API_KEY".into(),
            timeout_secs: 120.0,
            retries: 3,
            backoff_base_ms: 1000,
            max_in_flight: 4,
            adapter: JudgeAdapter::default(),
        }
    }
}

impl HttpConfig {
    pub fn new(endpoint: &str, api_key_env: &str) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            api_key_env: api_key_env.into(),
            ..Default::default()
        }
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    max: usize,
    used: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(max: usize) -> Self {
        Gate {
            max: max.max(1),
            used: Mutex::new(0),
            cv: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut used = self.used.lock().unwrap();
            while *used >= self.max {
                used = self.cv.wait(used).unwrap();
            }
            *used += 1;
        }
        let out = f();
        *self.used.lock().unwrap() -= 1;
        self.cv.notify_one();
        out
    }
}

struct Core {
    cfg: HttpConfig,
    key: Option<String>,
    agent: ureq::Agent,
    gate: Gate,
}

impl Core {
    fn new(cfg: HttpConfig) -> Result<Self, ClientError> {
        if cfg.endpoint.trim().is_empty() {
            return Err(ClientError::Config("endpoint is empty".into()));
        }
        let key = if cfg.api_key_env.is_empty() {
            None
        } else {
            match std::env::var(&cfg.api_key_env) {
                Ok(k) if !k.is_empty() => Some(k),
                _ => return Err(ClientError::Config(format!("environment variable {} is not set", cfg.api_key_env))),
            }
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_secs.max(0.001))))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = Gate::new(cfg.max_in_flight);
        Ok(Core { cfg, key, agent, gate })
    }

    fn once(&self, body: &Value) -> Result<Value, ClientError> {
        let mut req = self.agent.post(&self.cfg.endpoint).header("Content-Type", "application/json");
        if let Some(k) = &self.key {
            req = req.header("Authorization", format!("Bearer {k}"));
        }
        let mut resp = req.send_json(body).map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(ClientError::Status { status, body: text });
        }
        serde_json::from_str(&text).map_err(|e| ClientError::Malformed(format!("{e}: {text}")))
    }

    fn post(&self, body: &Value) -> Result<Value, ClientError> {
        self.gate.run(|| {
            let mut attempt = 0;
            loop {
                match self.once(body) {
                    Err(e) if e.is_transient() && attempt < self.cfg.retries => {
                        let delay = self.cfg.backoff_base_ms.saturating_mul(1 << attempt.min(20));
                        std::thread::sleep(Duration::from_millis(delay));
                        attempt += 1;
                    }
                    other => return other,
                }
            }
        })
    }
}

pub fn encode_png(frame: &Frame) -> Result<String, ClientError> {
    let png = frame.to_png().map_err(|e| ClientError::Backend(e.to_string()))?;
    Ok(B64.encode(png))
}

pub fn decode_png(text: &str) -> Result<Frame, ClientError> {
    let bytes = B64.decode(text.as_bytes()).map_err(|e| ClientError::Malformed(e.to_string()))?;
    Frame::from_png(&bytes).map_err(|e| ClientError::Malformed(e.to_string()))
}

pub fn encode_chat(model: &str, text: &str, images: &[Frame], a: &JudgeAdapter) -> Result<Value, ClientError> {
    let mut content = vec![json!({"type": a.text_part_type, "text": text})];
    for f in images {
        let mut part = serde_json::Map::new();
        part.insert("type".into(), Value::String(a.image_part_type.clone()));
        part.insert(a.image_field.clone(), Value::String(encode_png(f)?));
        content.push(Value::Object(part));
    }
    Ok(json!({"model": model, "messages": [{"role": "user", "content": content}]}))
}

/// Inverse of [`encode_chat`]: concatenated text parts and decoded images.
pub fn decode_chat(body: &Value, a: &JudgeAdapter) -> Result<(String, Vec<Frame>), ClientError> {
    let parts = body
        .pointer("/messages/0/content")
        .and_then(Value::as_array)
        .ok_or_else(|| ClientError::Malformed("missing messages[0].content".into()))?;
    let mut text = String::new();
    let mut images = Vec::new();
    for p in parts {
        let ty = p.get("type").and_then(Value::as_str).unwrap_or_default();
        if ty == a.text_part_type {
            text.push_str(p.get("text").and_then(Value::as_str).unwrap_or_default());
        } else if ty == a.image_part_type {
            let data = p
                .get(&a.image_field)
                .and_then(Value::as_str)
                .ok_or_else(|| ClientError::Malformed("image part without data".into()))?;
            images.push(decode_png(data)?);
        }
    }
    Ok((text, images))
}

pub struct HttpJudge {
    core: Core,
}

impl HttpJudge {
    pub fn new(cfg: HttpConfig) -> Result<Self, ClientError> {
        Ok(HttpJudge { core: Core::new(cfg)? })
    }
}

impl JudgeClient for HttpJudge {
    fn chat(&self, images: &[Frame], text: &str) -> Result<String, ClientError> {
        let a = &self.core.cfg.adapter;
        let body = encode_chat(&self.core.cfg.model, text, images, a)?;
        let reply = self.core.post(&body)?;
        let text = reply
            .pointer(&a.reply_pointer)
            .and_then(Value::as_str)
            .ok_or_else(|| ClientError::Malformed(format!("no string at {}", a.reply_pointer)))?;
        if text.trim().is_empty() {
            return Err(ClientError::Malformed("empty reply".into()));
        }
        Ok(text.to_string())
    }
}

pub struct HttpEmbedder {
    core: Core,
}

impl HttpEmbedder {
    pub fn new(cfg: HttpConfig) -> Result<Self, ClientError> {
        Ok(HttpEmbedder { core: Core::new(cfg)? })
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, crop: &Frame) -> Result<Vec<f64>, ClientError> {
        let body = json!({"model": self.core.cfg.model, "image": encode_png(crop)?});
        let reply = self.core.post(&body)?;
        let v: Vec<f64> = reply
            .get("embedding")
            .cloned()
            .and_then(|v| serde_json::from_value(v).ok())
            .ok_or_else(|| ClientError::Malformed("missing embedding".into()))?;
        if v.is_empty() {
            return Err(ClientError::Malformed("empty embedding".into()));
        }
        Ok(v)
    }
}

pub struct HttpGrounder {
    core: Core,
}

impl HttpGrounder {
    pub fn new(cfg: HttpConfig) -> Result<Self, ClientError> {
        Ok(HttpGrounder { core: Core::new(cfg)? })
    }
}

impl Grounder for HttpGrounder {
    fn ground(&self, frame: &Frame, label: &str) -> Result<Vec<Detection>, ClientError> {
        let body = json!({"model": self.core.cfg.model, "image": encode_png(frame)?, "label": label});
        let reply = self.core.post(&body)?;
        let dets: Vec<Detection> = reply
            .get("detections")
            .cloned()
            .and_then(|v| serde_json::from_value(v).ok())
            .ok_or_else(|| ClientError::Malformed("missing detections".into()))?;
        let (w, h) = frame.dims();
        Ok(dets.into_iter().filter(|d| d.bbox.fits_in(w, h)).collect())
    }
}

pub struct HttpGenerator {
    core: Core,
}

impl HttpGenerator {
    pub fn new(cfg: HttpConfig) -> Result<Self, ClientError> {
        Ok(HttpGenerator { core: Core::new(cfg)? })
    }
}

impl GeneratorClient for HttpGenerator {
    fn generate(&self, initial: &Frame, prompt: &str, seed: u64) -> Result<VideoClip, ClientError> {
        let body = json!({
            "model": self.core.cfg.model,
            "image": encode_png(initial)?,
            "prompt": prompt,
            "seed": seed,
        });
        let reply = self.core.post(&body)?;
        let fps = reply.get("fps").and_then(Value::as_f64).unwrap_or(crate::taskgen::FPS);
        let frames = reply
            .get("frames")
            .and_then(Value::as_array)
            .ok_or_else(|| ClientError::Malformed("missing frames".into()))?
            .iter()
            .map(|f| f.as_str().ok_or_else(|| ClientError::Malformed("frame is not a string".into())).and_then(decode_png))
            .collect::<Result<Vec<_>, _>>()?;
        VideoClip::new(frames, fps).map_err(|e| ClientError::Malformed(e.to_string()))
    }

    fn model_name(&self) -> &str {
        &self.core.cfg.model
    }
}
