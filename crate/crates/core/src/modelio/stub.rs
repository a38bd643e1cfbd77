//! Local HTTP server speaking the wire format in [`super::http`]. Backs the
//! four endpoints with the in-process implementations so HTTP clients can be
//! exercised end to end without network access.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::{json, Value};
use tiny_http::{Header, Response, Server};

use super::http::{decode_chat, decode_png, encode_png, JudgeAdapter};
use super::{ClientError, Embedder, GeneratorClient, Grounder, HsvGrounder, PatchHistogramEmbedder};

pub struct StubOptions {
    /// Chat replies, cycled.
    pub chat_replies: Vec<String>,
    /// Answer this many requests (across all paths) with HTTP 500 first.
    pub fail_first: usize,
    /// Artificial latency per request.
    pub delay: Duration,
    pub generator: Option<Arc<dyn GeneratorClient>>,
    pub embedder: Arc<dyn Embedder>,
    pub grounder: Arc<dyn Grounder>,
    pub adapter: JudgeAdapter,
}

impl Default for StubOptions {
    fn default() -> Self {
        StubOptions {
            chat_replies: vec!["yes".into()],
            fail_first: 0,
            delay: Duration::ZERO,
            generator: None,
            embedder: Arc::new(PatchHistogramEmbedder),
            grounder: Arc::new(HsvGrounder::default()),
            adapter: JudgeAdapter::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StubRequest {
    pub path: String,
    pub authorization: Option<String>,
    /// Chat text or generation prompt.
    pub text: String,
    pub images: usize,
}

#[derive(Default)]
struct State {
    hits: AtomicUsize,
    chats: AtomicUsize,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    log: Mutex<Vec<StubRequest>>,
}

pub struct StubServer {
    addr: SocketAddr,
    server: Arc<Server>,
    state: Arc<State>,
    worker: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Binds `127.0.0.1:port`; port 0 picks a free one.
    pub fn start(port: u16, opts: StubOptions) -> std::io::Result<Self> {
        let server = Server::http(("127.0.0.1", port)).map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("server is not bound to an IP address"))?;
        let server = Arc::new(server);
        let state = Arc::new(State::default());
        let opts = Arc::new(opts);
        let worker = {
            let server = server.clone();
            let state = state.clone();
            std::thread::spawn(move || {
                let mut handlers = Vec::new();
                while let Ok(req) = server.recv() {
                    let state = state.clone();
                    let opts = opts.clone();
                    handlers.push(std::thread::spawn(move || handle(req, &state, &opts)));
                    handlers.retain(|h| !h.is_finished());
                }
                for h in handlers {
                    let _ = h.join();
                }
            })
        };
        Ok(StubServer {
            addr,
            server,
            state,
            worker: Some(worker),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}/{}", self.addr, path.trim_start_matches('/'))
    }

    pub fn hits(&self) -> usize {
        self.state.hits.load(Ordering::SeqCst)
    }

    /// Largest number of requests handled at the same time.
    pub fn peak_in_flight(&self) -> usize {
        self.state.peak.load(Ordering::SeqCst)
    }

    /// Successfully decoded requests, in arrival order.
    pub fn requests(&self) -> Vec<StubRequest> {
        self.state.log.lock().unwrap().clone()
    }

    /// Blocks the calling thread until the server is stopped.
    pub fn join(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn handle(mut req: tiny_http::Request, state: &State, opts: &StubOptions) {
    let n = state.hits.fetch_add(1, Ordering::SeqCst);
    let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.peak.fetch_max(now, Ordering::SeqCst);
    if !opts.delay.is_zero() {
        std::thread::sleep(opts.delay);
    }
    let path = req.url().split('?').next().unwrap_or_default().to_string();
    let authorization = req
        .headers()
        .iter()
        .find(|h| h.field.equiv("Authorization"))
        .map(|h| h.value.as_str().to_string());
    let mut raw = String::new();
    let read = req.as_reader().read_to_string(&mut raw);
    let (status, body) = if n < opts.fail_first {
        (500, json!({"error": "injected failure"}))
    } else if read.is_err() {
        (400, json!({"error": "unreadable body"}))
    } else {
        match serde_json::from_str::<Value>(&raw) {
            Err(e) => (400, json!({"error": e.to_string()})),
            Ok(v) => match route(&path, &v, state, opts) {
                Ok((entry, reply)) => {
                    state.log.lock().unwrap().push(StubRequest { authorization, ..entry });
                    (200, reply)
                }
                Err(RouteError::NotFound) => (404, json!({"error": format!("no endpoint {path}")})),
                Err(RouteError::Client(e)) => (400, json!({"error": e.to_string()})),
            },
        }
    };
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    let resp = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header);
    let _ = req.respond(resp);
    state.in_flight.fetch_sub(1, Ordering::SeqCst);
}

enum RouteError {
    NotFound,
    Client(ClientError),
}

impl From<ClientError> for RouteError {
    fn from(e: ClientError) -> Self {
        RouteError::Client(e)
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a str, ClientError> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| ClientError::Malformed(format!("missing `{key}`")))
}

fn route(path: &str, v: &Value, state: &State, opts: &StubOptions) -> Result<(StubRequest, Value), RouteError> {
    let entry = |text: &str, images: usize| StubRequest {
        path: path.to_string(),
        authorization: None,
        text: text.to_string(),
        images,
    };
    match path {
        "/chat" => {
            let (text, images) = decode_chat(v, &opts.adapter)?;
            let i = state.chats.fetch_add(1, Ordering::SeqCst);
            let reply = if opts.chat_replies.is_empty() {
                String::new()
            } else {
                opts.chat_replies[i % opts.chat_replies.len()].clone()
            };
            let body = json!({"choices": [{"message": {"role": "assistant", "content": reply}}]});
            Ok((entry(&text, images.len()), body))
        }
        "/embed" => {
            let img = decode_png(field(v, "image")?)?;
            let e = opts.embedder.embed(&img)?;
            Ok((entry("", 1), json!({"embedding": e})))
        }
        "/ground" => {
            let img = decode_png(field(v, "image")?)?;
            let label = field(v, "label")?;
            let dets = opts.grounder.ground(&img, label)?;
            Ok((entry(label, 1), json!({"detections": dets})))
        }
        "/generate" => {
            let img = decode_png(field(v, "image")?)?;
            let prompt = field(v, "prompt")?;
            let seed = v.get("seed").and_then(Value::as_u64).unwrap_or(0);
            let clip = match &opts.generator {
                Some(g) => g.generate(&img, prompt, seed)?,
                None => crate::model::VideoClip::new(vec![img.clone(); crate::taskgen::MIN_FRAMES], crate::taskgen::FPS)
                    .map_err(|e| ClientError::Backend(e.to_string()))?,
            };
            let frames = clip.frames().iter().map(encode_png).collect::<Result<Vec<_>, _>>()?;
            Ok((entry(prompt, 1), json!({"fps": clip.fps(), "frames": frames})))
        }
        _ => Err(RouteError::NotFound),
    }
}
