//! Completion, image and embedding providers behind one facade, with live,
//! record and replay modes.

mod cassette;
pub mod http;
mod retry;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use newsreel_core::digest::sha256_hex;
use newsreel_core::ImageRef;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub(crate) use cassette::write_atomic;
pub use cassette::{request_digest, Cassette, CassetteEntry};
pub use retry::{Attempt, RetryPolicy};

use crate::clock::Clock;
use crate::error::{Error, Result};

pub const EXTRACTION_TEMPERATURE: f64 = 0.2;
pub const CREATIVE_TEMPERATURE: f64 = 0.9;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 1024;
pub const DEFAULT_PARALLELISM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Completion,
    Image,
    Embedding,
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderKind::Completion => "completion",
            ProviderKind::Image => "image",
            ProviderKind::Embedding => "embedding",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Live,
    Record,
    Replay,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            _ => Err(Error::invalid("mode", "must be live, record, or replay")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    /// Pipeline step that issued the request.
    pub request_tag: String,
}

impl CompletionRequest {
    pub fn new(request_tag: impl Into<String>, prompt: impl Into<String>, temperature: f64) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            temperature,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            request_tag: request_tag.into(),
        }
    }

    /// Temperature by pipeline step: low for extraction, high elsewhere.
    pub fn for_step(request_tag: &str, prompt: impl Into<String>) -> Self {
        let temperature =
            if request_tag.starts_with("extract.") { EXTRACTION_TEMPERATURE } else { CREATIVE_TEMPERATURE };
        CompletionRequest::new(request_tag, prompt, temperature)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prompt.trim().is_empty() {
            return Err(Error::invalid("prompt", "must not be empty"));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::invalid("temperature", "must lie in [0, 2]"));
        }
        Ok(())
    }

    fn digest_fields(&self) -> Value {
        json!({ "prompt": self.prompt, "request_tag": self.request_tag, "temperature": self.temperature })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRequest {
    pub prompt: String,
    pub request_tag: String,
}

impl ImageRequest {
    pub fn new(request_tag: impl Into<String>, prompt: impl Into<String>) -> Self {
        ImageRequest { prompt: prompt.into(), request_tag: request_tag.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedImage {
    pub bytes: Vec<u8>,
    pub media_type: String,
}

impl GeneratedImage {
    pub fn image_ref(&self) -> ImageRef {
        ImageRef { digest: sha256_hex(&self.bytes), media_type: self.media_type.clone() }
    }
}

pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String>;
}

pub trait ImageBackend: Send + Sync {
    fn generate(&self, request: &ImageRequest) -> Result<GeneratedImage>;
}

pub trait EmbeddingBackend: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

#[derive(Clone, Default)]
pub struct Backends {
    pub completion: Option<Arc<dyn CompletionBackend>>,
    pub image: Option<Arc<dyn ImageBackend>>,
    pub embedding: Option<Arc<dyn EmbeddingBackend>>,
}

/// A completion prompt as sent, kept for `--dump-prompts` audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedPrompt {
    pub kind: ProviderKind,
    pub request_tag: String,
    pub prompt: String,
}

/// The provider facade shared by every pipeline step.
pub struct Providers {
    mode: Mode,
    backends: Backends,
    cassette: Option<Arc<Cassette>>,
    clock: Arc<Clock>,
    calls: AtomicU64,
    prompt_log: Mutex<Vec<LoggedPrompt>>,
    parallelism: usize,
}

impl fmt::Debug for Providers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Providers").field("mode", &self.mode).field("calls", &self.calls()).finish_non_exhaustive()
    }
}

impl Providers {
    /// Live and record modes need backends; record and replay need a
    /// cassette. Replay never touches a backend.
    pub fn new(mode: Mode, backends: Backends, cassette: Option<Cassette>) -> Result<Self> {
        if mode != Mode::Live && cassette.is_none() {
            return Err(Error::invalid("cassette", "required in record and replay modes"));
        }
        let backends = if mode == Mode::Replay { Backends::default() } else { backends };
        Ok(Providers {
            mode,
            backends,
            cassette: cassette.map(Arc::new),
            clock: Arc::new(Clock::System),
            calls: AtomicU64::new(0),
            prompt_log: Mutex::new(Vec::new()),
            parallelism: DEFAULT_PARALLELISM,
        })
    }

    pub fn replay(cassette: Cassette) -> Self {
        Providers::new(Mode::Replay, Backends::default(), Some(cassette))
            .expect("replay with a cassette is always valid")
    }

    pub fn with_clock(mut self, clock: Arc<Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }

    pub fn clock(&self) -> &Arc<Clock> {
        &self.clock
    }

    pub fn cassette(&self) -> Option<&Cassette> {
        self.cassette.as_deref()
    }

    /// Provider calls made so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn prompt_log(&self) -> Vec<LoggedPrompt> {
        self.prompt_log.lock().map(|l| l.clone()).unwrap_or_default()
    }

    /// Whether embeddings can be served in the current mode.
    pub fn embeddings_available(&self) -> bool {
        match self.mode {
            Mode::Replay => self.cassette.as_ref().is_some_and(|c| c.has_kind(ProviderKind::Embedding)),
            _ => self.backends.embedding.is_some(),
        }
    }

    fn log(&self, kind: ProviderKind, tag: &str, prompt: &str) {
        if let Ok(mut log) = self.prompt_log.lock() {
            log.push(LoggedPrompt { kind, request_tag: tag.to_string(), prompt: prompt.to_string() });
        }
    }

    fn cassette_or_err(&self) -> Result<&Cassette> {
        self.cassette.as_deref().ok_or_else(|| Error::invalid("cassette", "not loaded"))
    }

    fn record(&self, kind: ProviderKind, digest: String, request: Value, response: Value) -> Result<()> {
        if self.mode == Mode::Record {
            let entry = CassetteEntry {
                provider_kind: kind,
                request_digest: digest,
                request,
                response,
                // Wall time, so recording does not advance a logical clock.
                recorded_at: Clock::System.now(),
            };
            self.cassette_or_err()?.append(entry)?;
        }
        Ok(())
    }

    fn replayed(&self, kind: ProviderKind, tag: &str, digest: &str) -> Result<Value> {
        self.cassette_or_err()?.lookup(kind, digest).ok_or_else(|| Error::CassetteMiss {
            kind,
            tag: tag.to_string(),
            digest: digest.to_string(),
        })
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<String> {
        request.validate()?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.log(ProviderKind::Completion, &request.request_tag, &request.prompt);
        let digest = request_digest(ProviderKind::Completion, &request.digest_fields());
        let text = if self.mode == Mode::Replay {
            let response = self.replayed(ProviderKind::Completion, &request.request_tag, &digest)?;
            response["text"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::StorageCorrupt("completion entry has no text".into()))?
        } else {
            let backend = self
                .backends
                .completion
                .as_ref()
                .ok_or_else(|| Error::ProviderUnavailable("no completion backend configured".into()))?;
            let text = backend.complete(request)?;
            if !text.trim().is_empty() {
                let stored = serde_json::to_value(request).map_err(|e| Error::Format(e.to_string()))?;
                self.record(ProviderKind::Completion, digest, stored, json!({ "text": text }))?;
            }
            text
        };
        if text.trim().is_empty() {
            return Err(Error::EmptyCompletion(request.request_tag.clone()));
        }
        Ok(text)
    }

    pub fn generate_image(&self, request: &ImageRequest) -> Result<GeneratedImage> {
        if request.prompt.trim().is_empty() {
            return Err(Error::invalid("prompt", "must not be empty"));
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.log(ProviderKind::Image, &request.request_tag, &request.prompt);
        let fields = json!({ "prompt": request.prompt, "request_tag": request.request_tag });
        let digest = request_digest(ProviderKind::Image, &fields);
        if self.mode == Mode::Replay {
            let response = self.replayed(ProviderKind::Image, &request.request_tag, &digest)?;
            return self.cassette_or_err()?.read_image(&response);
        }
        let backend = self
            .backends
            .image
            .as_ref()
            .ok_or_else(|| Error::ProviderUnavailable("no image backend configured".into()))?;
        let image = backend.generate(request)?;
        if self.mode == Mode::Record {
            let response = self.cassette_or_err()?.write_image(&image)?;
            self.record(ProviderKind::Image, digest, fields, response)?;
        }
        Ok(image)
    }

    pub fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if text.trim().is_empty() {
            return Err(Error::invalid("text", "must not be empty"));
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let fields = json!({ "text": text });
        let digest = request_digest(ProviderKind::Embedding, &fields);
        if self.mode == Mode::Replay {
            let response = self.replayed(ProviderKind::Embedding, "embed", &digest)?;
            return serde_json::from_value(response["vector"].clone())
                .map_err(|e| Error::StorageCorrupt(format!("embedding entry: {e}")));
        }
        let backend = self
            .backends
            .embedding
            .as_ref()
            .ok_or_else(|| Error::ProviderUnavailable("no embedding backend configured".into()))?;
        let vector = backend.embed(text)?;
        self.record(ProviderKind::Embedding, digest, fields, json!({ "vector": vector }))?;
        Ok(vector)
    }
}

/// Per-run memo of embeddings so each distinct text is embedded once.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingCache {
    pub fn get(&mut self, providers: &Providers, text: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.vectors.get(text) {
            return Ok(v.clone());
        }
        let v = providers.embed(text)?;
        self.vectors.insert(text.to_string(), v.clone());
        Ok(v)
    }
}
