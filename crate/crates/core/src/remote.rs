//! Client for an external translation service.
//!
//! Lets a real NMT model stand in for the lexical translator. The service is
//! expected to answer one endpoint:
//!
//! ```text
//! POST <endpoint>
//! Content-Type: application/json
//!
//! {"source": "aa", "target": "bb", "sentences": ["...", "..."]}
//! ```
//!
//! with
//!
//! ```text
//! 200 OK
//! {"translations": ["...", "..."]}
//! ```
//!
//! `translations` must have one entry per input sentence, in order. Inputs
//! are sent in chunks of at most `batch_size`. Any non-2xx status, malformed
//! body or count mismatch is a [`Error::Remote`].

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::translator::TranslationBackend;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Directions the service supports. Empty means "all".
    #[serde(default)]
    pub directions: Vec<Edge>,
}

fn default_timeout() -> f64 {
    30.0
}

fn default_batch() -> usize {
    64
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            timeout_secs: default_timeout(),
            batch_size: default_batch(),
            directions: Vec::new(),
        }
    }

    /// Reads `GD_REMOTE_ENDPOINT`, `GD_REMOTE_TIMEOUT` and
    /// `GD_REMOTE_BATCH_SIZE`. Values override `self`; returns `None` if no
    /// endpoint is configured anywhere.
    pub fn from_env(base: Option<RemoteConfig>, lookup: impl Fn(&str) -> Option<String>) -> Result<Option<Self>> {
        let mut cfg = match (base, lookup("GD_REMOTE_ENDPOINT")) {
            (_, Some(ep)) => RemoteConfig { endpoint: ep, ..RemoteConfig::new("") },
            (Some(b), None) => b,
            (None, None) => return Ok(None),
        };
        if let Some(t) = lookup("GD_REMOTE_TIMEOUT") {
            cfg.timeout_secs =
                t.trim().parse().map_err(|_| Error::config("GD_REMOTE_TIMEOUT", format!("cannot parse `{t}`")))?;
        }
        if let Some(b) = lookup("GD_REMOTE_BATCH_SIZE") {
            cfg.batch_size =
                b.trim().parse().map_err(|_| Error::config("GD_REMOTE_BATCH_SIZE", format!("cannot parse `{b}`")))?;
        }
        cfg.validate()?;
        Ok(Some(cfg))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return Err(Error::config("remote.endpoint", "must be an http(s) URL"));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(Error::config("remote.timeout_secs", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("remote.batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Request<'a> {
    source: &'a str,
    target: &'a str,
    sentences: &'a [String],
}

#[derive(Deserialize)]
struct Response {
    translations: Vec<String>,
}

pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .build()
            .into();
        Ok(RemoteBackend { config, agent })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn call(&self, src: &str, tgt: &str, batch: &[String]) -> Result<Vec<String>> {
        let body = Request { source: src, target: tgt, sentences: batch };
        let mut resp = self
            .agent
            .post(&self.config.endpoint)
            .send_json(&body)
            .map_err(|e| Error::Remote(format!("{}: {e}", self.config.endpoint)))?;
        let parsed: Response =
            resp.body_mut().read_json().map_err(|e| Error::Remote(format!("bad response body: {e}")))?;
        if parsed.translations.len() != batch.len() {
            return Err(Error::Remote(format!(
                "sent {} sentences, got {} translations",
                batch.len(),
                parsed.translations.len()
            )));
        }
        Ok(parsed.translations)
    }
}

impl TranslationBackend for RemoteBackend {
    fn has_direction(&self, src: &str, tgt: &str) -> bool {
        self.config.directions.is_empty()
            || self.config.directions.iter().any(|e| e.src.as_str() == src && e.tgt.as_str() == tgt)
    }

    fn translate(&self, src: &str, tgt: &str, sentences: &[String]) -> Result<Vec<String>> {
        if !self.has_direction(src, tgt) {
            return Err(Error::UntrainedDirection { src: src.to_string(), tgt: tgt.to_string(), hop: None });
        }
        let mut out = Vec::with_capacity(sentences.len());
        for chunk in sentences.chunks(self.config.batch_size) {
            out.extend(self.call(src, tgt, chunk)?);
        }
        Ok(out)
    }
}
