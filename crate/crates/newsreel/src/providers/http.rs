//! OpenAI-compatible HTTP backends.

use std::env;
use std::sync::Arc;
use std::time::Duration;

use base64::Engine;
use reqwest::blocking::{Client, Response};
use serde_json::{json, Value};

use super::retry::{classify_status, Attempt, RetryPolicy};
use super::{
    Backends, CompletionBackend, CompletionRequest, EmbeddingBackend, GeneratedImage, ImageBackend, ImageRequest,
};
use crate::error::{Error, Result};

pub const DEFAULT_COMPLETION_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_COMPLETION_MODEL: &str = "gpt-4";
pub const DEFAULT_IMAGE_MODEL: &str = "dall-e-2";
pub const DEFAULT_EMBEDDING_MODEL: &str = "text-embedding-3-small";

#[derive(Debug, Clone)]
pub struct Endpoint {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
}

impl Endpoint {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Endpoint { base_url: base_url.into().trim_end_matches('/').to_string(), api_key: None, model: model.into() }
    }

    pub fn with_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{path}", self.base_url)
    }
}

fn client() -> Result<Client> {
    Client::builder()
        .timeout(Duration::from_secs(120))
        .build()
        .map_err(|e| Error::ProviderUnavailable(format!("cannot build http client: {e}")))
}

/// Posts `body` under the retry policy and returns the decoded JSON reply.
fn post_json(client: &Client, endpoint: &Endpoint, path: &str, body: &Value, retry: &RetryPolicy) -> Result<Value> {
    let url = endpoint.url(path);
    retry.run(|| {
        let mut request = client.post(&url).json(body);
        if let Some(key) = &endpoint.api_key {
            request = request.bearer_auth(key);
        }
        match request.send() {
            Err(e) => Attempt::Transient(format!("{url}: {e}")),
            Ok(response) => classify(&url, response),
        }
    })
}

fn classify(url: &str, response: Response) -> Attempt<Value> {
    let status = response.status().as_u16();
    match classify_status(status) {
        Some(transient) => {
            let body = response.text().unwrap_or_default();
            let msg = format!("{url} returned {status}: {}", body.chars().take(200).collect::<String>());
            if transient {
                Attempt::Transient(msg)
            } else {
                Attempt::Rejected(msg)
            }
        }
        None => match response.json::<Value>() {
            Ok(v) => Attempt::Done(v),
            Err(e) => Attempt::Rejected(format!("{url} returned unreadable JSON: {e}")),
        },
    }
}

fn malformed(what: &str) -> Error {
    Error::ProviderUnavailable(format!("provider reply has no {what}"))
}

pub struct HttpCompletion {
    client: Client,
    endpoint: Endpoint,
    retry: RetryPolicy,
}

impl HttpCompletion {
    pub fn new(endpoint: Endpoint, retry: RetryPolicy) -> Result<Self> {
        Ok(HttpCompletion { client: client()?, endpoint, retry })
    }
}

impl CompletionBackend for HttpCompletion {
    fn complete(&self, request: &CompletionRequest) -> Result<String> {
        let body = json!({
            "model": self.endpoint.model,
            "messages": [{ "role": "user", "content": request.prompt }],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let reply = post_json(&self.client, &self.endpoint, "chat/completions", &body, &self.retry)?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| malformed("message content"))
    }
}

pub struct HttpImage {
    client: Client,
    endpoint: Endpoint,
    retry: RetryPolicy,
    pub size: String,
}

impl HttpImage {
    pub fn new(endpoint: Endpoint, retry: RetryPolicy) -> Result<Self> {
        Ok(HttpImage { client: client()?, endpoint, retry, size: "512x512".into() })
    }
}

impl ImageBackend for HttpImage {
    fn generate(&self, request: &ImageRequest) -> Result<GeneratedImage> {
        let body = json!({
            "model": self.endpoint.model,
            "prompt": request.prompt,
            "n": 1,
            "size": self.size,
            "response_format": "b64_json",
        });
        let reply = post_json(&self.client, &self.endpoint, "images/generations", &body, &self.retry)?;
        let encoded = reply["data"][0]["b64_json"].as_str().ok_or_else(|| malformed("b64_json image"))?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(encoded)
            .map_err(|e| Error::ProviderUnavailable(format!("image is not valid base64: {e}")))?;
        Ok(GeneratedImage { bytes, media_type: "image/png".into() })
    }
}

pub struct HttpEmbedding {
    client: Client,
    endpoint: Endpoint,
    retry: RetryPolicy,
}

impl HttpEmbedding {
    pub fn new(endpoint: Endpoint, retry: RetryPolicy) -> Result<Self> {
        Ok(HttpEmbedding { client: client()?, endpoint, retry })
    }
}

impl EmbeddingBackend for HttpEmbedding {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let body = json!({ "model": self.endpoint.model, "input": text });
        let reply = post_json(&self.client, &self.endpoint, "embeddings", &body, &self.retry)?;
        serde_json::from_value(reply["data"][0]["embedding"].clone()).map_err(|_| malformed("embedding vector"))
    }
}

fn var(name: &str) -> Option<String> {
    env::var(name).ok().filter(|v| !v.trim().is_empty())
}

impl Backends {
    /// Builds HTTP backends from the environment. Completion is always
    /// configured; image generation needs `IMAGE_BASE_URL` or
    /// `IMAGE_API_KEY`; embeddings need `EMBEDDING_BASE_URL` and reuse the
    /// completion key.
    ///
    /// Build these before starting an async runtime: the blocking client
    /// owns one of its own.
    pub fn from_env() -> Result<Self> {
        let retry = RetryPolicy::default();
        let completion_key = var("COMPLETION_API_KEY");
        let completion = Endpoint::new(
            var("COMPLETION_BASE_URL").unwrap_or_else(|| DEFAULT_COMPLETION_BASE_URL.into()),
            var("COMPLETION_MODEL").unwrap_or_else(|| DEFAULT_COMPLETION_MODEL.into()),
        )
        .with_key(completion_key.clone());
        let image_key = var("IMAGE_API_KEY");
        let image = match (var("IMAGE_BASE_URL"), &image_key) {
            (None, None) => None,
            (base, _) => {
                let endpoint =
                    Endpoint::new(base.unwrap_or_else(|| DEFAULT_COMPLETION_BASE_URL.into()), DEFAULT_IMAGE_MODEL)
                        .with_key(image_key.clone());
                Some(Arc::new(HttpImage::new(endpoint, retry)?) as Arc<dyn ImageBackend>)
            }
        };
        let embedding = match var("EMBEDDING_BASE_URL") {
            None => None,
            Some(base) => {
                let endpoint = Endpoint::new(base, DEFAULT_EMBEDDING_MODEL).with_key(completion_key);
                Some(Arc::new(HttpEmbedding::new(endpoint, retry)?) as Arc<dyn EmbeddingBackend>)
            }
        };
        Ok(Backends { completion: Some(Arc::new(HttpCompletion::new(completion, retry)?)), image, embedding })
    }
}
