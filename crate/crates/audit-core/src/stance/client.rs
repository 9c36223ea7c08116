//! Stance classifiers: the HTTP chat-completion client with disk caching,
//! plus the trait they all implement.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{render_prompt, StanceLabel5};
use crate::data_model::CommentRecord;
use crate::error::{Error, Result};

/// Anything that can label one comment given its video description.
pub trait StanceClassifier: Sync {
    fn classify_comment(&self, comment: &CommentRecord, video_description: &str) -> Result<StanceLabel5>;
}

/// Reads the stance already stored on the comment record. Used when labels
/// were produced by an earlier classification run (or a simulator).
pub struct LookupClassifier;

impl StanceClassifier for LookupClassifier {
    fn classify_comment(&self, comment: &CommentRecord, _video_description: &str) -> Result<StanceLabel5> {
        comment
            .stance
            .ok_or_else(|| Error::MissingStance(comment.comment_id.clone()))
    }
}

/// Configuration for the remote classifier.
#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub retry_backoff: Duration,
    pub cache_dir: Option<PathBuf>,
    pub timeout: Duration,
    pub concurrency: usize,
}

impl ClassifierConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> ClassifierConfig {
        ClassifierConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            temperature: 0.0,
            max_retries: 3,
            retry_backoff: Duration::from_millis(250),
            cache_dir: None,
            timeout: Duration::from_secs(30),
            concurrency: 4,
        }
    }

    /// Read endpoint, credentials, and model from `AUDIT_LLM_ENDPOINT`,
    /// `AUDIT_LLM_KEY`, and `AUDIT_LLM_MODEL`.
    pub fn from_env() -> Result<ClassifierConfig> {
        let endpoint = std::env::var("AUDIT_LLM_ENDPOINT")
            .map_err(|_| Error::Config("AUDIT_LLM_ENDPOINT not set".into()))?;
        let model = std::env::var("AUDIT_LLM_MODEL")
            .map_err(|_| Error::Config("AUDIT_LLM_MODEL not set".into()))?;
        let mut config = ClassifierConfig::new(endpoint, model);
        config.api_key = std::env::var("AUDIT_LLM_KEY").ok();
        Ok(config)
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    model: String,
    label: StanceLabel5,
}

/// HTTP classifier speaking the JSON chat-completion protocol, with
/// write-through disk caching keyed by hash(model, prompt) and bounded
/// retry/backoff on transport or server errors.
pub struct LlmClassifier {
    config: ClassifierConfig,
    http: reqwest::blocking::Client,
    cache_lock: Mutex<()>,
    requests_sent: AtomicU64,
}

impl LlmClassifier {
    pub fn new(config: ClassifierConfig) -> Result<LlmClassifier> {
        if config.temperature < 0.0 {
            return Err(Error::Config("temperature must be nonnegative".into()));
        }
        if let Some(dir) = &config.cache_dir {
            std::fs::create_dir_all(dir)?;
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::Classifier(format!("http client: {e}")))?;
        Ok(LlmClassifier { config, http, cache_lock: Mutex::new(()), requests_sent: AtomicU64::new(0) })
    }

    /// Number of HTTP requests actually sent (cache hits send none).
    pub fn requests_sent(&self) -> u64 {
        self.requests_sent.load(Ordering::SeqCst)
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    /// Classify raw comment text. Cache first, then the endpoint.
    pub fn classify_text(&self, comment_text: &str, video_description: &str) -> Result<StanceLabel5> {
        let prompt = render_prompt(comment_text, video_description)?;
        let key = cache_key(&self.config.model, &prompt);

        if let Some(label) = self.cache_get(&key)? {
            return Ok(label);
        }
        let raw = self.post_with_retries(&prompt)?;
        let label = StanceLabel5::parse_response(&raw).ok_or_else(|| {
            Error::Classifier(format!("unparseable response: {raw:?}"))
        })?;
        self.cache_put(&key, label)?;
        Ok(label)
    }

    fn cache_path(&self, key: &str) -> Option<PathBuf> {
        self.config.cache_dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    fn cache_get(&self, key: &str) -> Result<Option<StanceLabel5>> {
        let Some(path) = self.cache_path(key) else { return Ok(None) };
        let _guard = self.cache_lock.lock().expect("cache lock");
        match std::fs::read(&path) {
            Ok(bytes) => {
                let entry: CacheEntry = serde_json::from_slice(&bytes)?;
                Ok(Some(entry.label))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn cache_put(&self, key: &str, label: StanceLabel5) -> Result<()> {
        let Some(path) = self.cache_path(key) else { return Ok(()) };
        let _guard = self.cache_lock.lock().expect("cache lock");
        let entry = CacheEntry { model: self.config.model.clone(), label };
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec(&entry)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn post_with_retries(&self, prompt: &str) -> Result<String> {
        let request = ChatRequest {
            model: &self.config.model,
            messages: vec![ChatMessage { role: "user", content: prompt }],
            temperature: self.config.temperature,
        };
        let mut last_error = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.config.retry_backoff * 2u32.pow(attempt - 1));
            }
            self.requests_sent.fetch_add(1, Ordering::SeqCst);
            let mut builder = self.http.post(&self.config.endpoint).json(&request);
            if let Some(key) = &self.config.api_key {
                builder = builder.bearer_auth(key);
            }
            match builder.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let body: ChatResponse = response
                            .json()
                            .map_err(|e| Error::Classifier(format!("bad response body: {e}")))?;
                        let content = body
                            .choices
                            .into_iter()
                            .next()
                            .map(|c| c.message.content)
                            .ok_or_else(|| Error::Classifier("response had no choices".into()))?;
                        return Ok(content);
                    }
                    if status.is_server_error() {
                        last_error = format!("server error {status}");
                        continue;
                    }
                    return Err(Error::Classifier(format!("request rejected: {status}")));
                }
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            }
        }
        Err(Error::Classifier(format!(
            "gave up after {} attempt(s): {last_error}",
            self.config.max_retries + 1
        )))
    }
}

impl StanceClassifier for LlmClassifier {
    fn classify_comment(&self, comment: &CommentRecord, video_description: &str) -> Result<StanceLabel5> {
        let text = comment
            .text
            .as_deref()
            .ok_or_else(|| Error::Classifier(format!("comment {} has no text", comment.comment_id)))?;
        self.classify_text(text, video_description)
    }
}

fn cache_key(model: &str, prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0u8]);
    hasher.update(prompt.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
