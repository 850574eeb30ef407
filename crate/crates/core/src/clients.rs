//! Pluggable JSON clients for external models.
//!
//! Every external call is one JSON request object in, one JSON response
//! object out. A [`Transport`] moves the objects; [`JsonClient`] maps the typed
//! client traits onto requests. Requests carry an `op` field:
//!
//! | op                  | request fields                        | response             |
//! |---------------------|---------------------------------------|----------------------|
//! | `judge`             | node_id, label, concept, country      | `{"keep": bool}`     |
//! | `complete`          | concept, country                      | `{"labels": [str]}`  |
//! | `popularity`        | label, gl                             | `{"count": u64}`     |
//! | `concept_check`     | image_id, concept                     | `{"verdict": bool}`  |
//! | `culture_check`     | image_id, concept, culture            | `{"verdict": bool}`  |
//! | `attribute_country` | image_id, concept                     | `{"country": str?}`  |
//! | `retrieve`          | image_id, concept, country, k         | `{"candidates": [str]}` |
//! | `select_artifact`   | image_id, concept, candidates         | `{"artifact_id": str?}` |
//!
//! [`CannedTransport`] answers from `<dir>/<key>.json`, where the key is the
//! SHA-256 of the request serialized as compact JSON with sorted keys (see
//! [`request_key`]). [`StdioTransport`] spawns a program per request, writes the
//! request line to its stdin and reads one response line from stdout.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::concept::Concept;
use crate::extraction::{ArtifactRecord, PopularityClient, RefinementClient};
use crate::pipeline::{ImageRef, MapperClient, RetrieverClient};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("no canned response {key} for request {request}")]
    MissingCanned { key: String, request: String },
}

impl ClientError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ClientError::Transport(_))
    }
}

pub trait Transport: Send + Sync {
    fn call(&self, request: &Value) -> Result<Value, ClientError>;

    /// Identifies the backing endpoint in report provenance.
    fn describe(&self) -> String;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn call(&self, request: &Value) -> Result<Value, ClientError> {
        (**self).call(request)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Hex SHA-256 of the compact, key-sorted serialization of `request`.
pub fn request_key(request: &Value) -> String {
    // serde_json maps are BTreeMaps, so keys serialize sorted
    let text = serde_json::to_string(request).expect("JSON values always serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Answers requests from canned response files keyed by [`request_key`].
#[derive(Debug, Clone)]
pub struct CannedTransport {
    dir: PathBuf,
}

impl CannedTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CannedTransport { dir: dir.into() }
    }

    pub fn path_for(&self, request: &Value) -> PathBuf {
        self.dir.join(format!("{}.json", request_key(request)))
    }

    /// Writes a canned response for `request`; used to author fixtures.
    pub fn record(&self, request: &Value, response: &Value) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.path_for(request);
        let body = json!({ "request": request, "response": response });
        std::fs::write(&path, serde_json::to_string_pretty(&body)? + "\n")?;
        Ok(path)
    }
}

impl Transport for CannedTransport {
    fn call(&self, request: &Value) -> Result<Value, ClientError> {
        let path = self.path_for(request);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ClientError::MissingCanned {
                    key: request_key(request),
                    request: request.to_string(),
                })
            }
            Err(e) => return Err(ClientError::Transport(format!("{}: {e}", path.display()))),
        };
        let stored: Value = serde_json::from_str(&text)
            .map_err(|e| ClientError::Protocol(format!("{}: {e}", path.display())))?;
        // files hold either {"request", "response"} or the bare response
        match stored {
            Value::Object(mut map) if map.contains_key("response") => {
                Ok(map.remove("response").unwrap_or(Value::Null))
            }
            other => Ok(other),
        }
    }

    fn describe(&self) -> String {
        format!("canned:{}", self.dir.display())
    }
}

/// Spawns `program args...` per request: one JSON line in, one JSON line out.
#[derive(Debug, Clone)]
pub struct StdioTransport {
    program: String,
    args: Vec<String>,
}

impl StdioTransport {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        StdioTransport {
            program: program.into(),
            args,
        }
    }
}

impl Transport for StdioTransport {
    fn call(&self, request: &Value) -> Result<Value, ClientError> {
        let transport =
            |e: std::io::Error| ClientError::Transport(format!("{}: {e}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(transport)?;
        {
            let mut stdin = child.stdin.take().expect("stdin is piped");
            writeln!(stdin, "{request}").map_err(transport)?;
        }
        let mut line = String::new();
        {
            let stdout = child.stdout.take().expect("stdout is piped");
            BufReader::new(stdout)
                .read_line(&mut line)
                .map_err(transport)?;
        }
        let status = child.wait().map_err(transport)?;
        if !status.success() {
            return Err(ClientError::Transport(format!(
                "{} exited with {status}",
                self.program
            )));
        }
        serde_json::from_str(line.trim()).map_err(|e| ClientError::Protocol(e.to_string()))
    }

    fn describe(&self) -> String {
        let mut s = format!("stdio:{}", self.program);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s
    }
}

/// Retries retryable transport failures with a short linear backoff.
/// Requests are idempotent lookups, so replaying them is safe.
#[derive(Debug, Clone)]
pub struct Retrying<T> {
    inner: T,
    attempts: u32,
    backoff: Duration,
}

impl<T> Retrying<T> {
    pub fn new(inner: T, attempts: u32) -> Self {
        Retrying {
            inner,
            attempts: attempts.max(1),
            backoff: Duration::from_millis(50),
        }
    }

    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }
}

impl<T: Transport> Transport for Retrying<T> {
    fn call(&self, request: &Value) -> Result<Value, ClientError> {
        let mut attempt = 1;
        loop {
            match self.inner.call(request) {
                Err(e) if e.is_retryable() && attempt < self.attempts => {
                    log::warn!("attempt {attempt} failed: {e}; retrying");
                    std::thread::sleep(self.backoff * attempt);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}

/// Parses `canned:<dir>` or `stdio:<program> [args...]`.
pub fn transport_from_spec(spec: &str) -> Result<Box<dyn Transport>, ClientError> {
    if let Some(dir) = spec.strip_prefix("canned:") {
        if !Path::new(dir).is_dir() {
            return Err(ClientError::Transport(format!(
                "canned directory {dir} does not exist"
            )));
        }
        Ok(Box::new(CannedTransport::new(dir)))
    } else if let Some(cmd) = spec.strip_prefix("stdio:") {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| ClientError::Transport("empty stdio command".into()))?;
        Ok(Box::new(Retrying::new(
            StdioTransport::new(program, parts.collect()),
            3,
        )))
    } else {
        Err(ClientError::Transport(format!(
            "client spec `{spec}` must start with canned: or stdio:"
        )))
    }
}

/// Implements every client trait over a JSON transport.
#[derive(Debug, Clone)]
pub struct JsonClient<T> {
    transport: T,
}

impl<T: Transport> JsonClient<T> {
    pub fn new(transport: T) -> Self {
        JsonClient { transport }
    }

    pub fn describe(&self) -> String {
        self.transport.describe()
    }

    fn ask<R: DeserializeOwned>(&self, request: Value) -> Result<R, ClientError> {
        let response = self.transport.call(&request)?;
        serde_json::from_value(response)
            .map_err(|e| ClientError::Protocol(format!("{e} (request {request})")))
    }
}

#[derive(Deserialize)]
struct Keep {
    keep: bool,
}
#[derive(Deserialize)]
struct Labels {
    labels: Vec<String>,
}
#[derive(Deserialize)]
struct Count {
    count: u64,
}
#[derive(Deserialize)]
struct Verdict {
    verdict: bool,
}
#[derive(Deserialize)]
struct CountryAnswer {
    country: Option<String>,
}
#[derive(Deserialize)]
struct Candidates {
    candidates: Vec<String>,
}
#[derive(Deserialize)]
struct Selection {
    artifact_id: Option<String>,
}

impl<T: Transport> RefinementClient for JsonClient<T> {
    fn judge(&self, record: &ArtifactRecord) -> Result<bool, ClientError> {
        let r: Keep = self.ask(json!({
            "op": "judge",
            "node_id": record.node_id,
            "label": record.label,
            "concept": record.concept,
            "country": record.country,
        }))?;
        Ok(r.keep)
    }

    fn complete(&self, concept: Concept, country: &str) -> Result<Vec<String>, ClientError> {
        let r: Labels =
            self.ask(json!({"op": "complete", "concept": concept, "country": country}))?;
        Ok(r.labels)
    }
}

impl<T: Transport> PopularityClient for JsonClient<T> {
    fn count(&self, label: &str, country_geo: &str) -> Result<u64, ClientError> {
        let r: Count = self.ask(json!({"op": "popularity", "label": label, "gl": country_geo}))?;
        Ok(r.count)
    }
}

impl<T: Transport> MapperClient for JsonClient<T> {
    fn concept_check(&self, image: &ImageRef, concept: Concept) -> Result<bool, ClientError> {
        let r: Verdict = self.ask(json!({
            "op": "concept_check", "image_id": image.image_id, "concept": concept,
        }))?;
        Ok(r.verdict)
    }

    fn culture_check(
        &self,
        image: &ImageRef,
        concept: Concept,
        culture: &str,
    ) -> Result<bool, ClientError> {
        let r: Verdict = self.ask(json!({
            "op": "culture_check", "image_id": image.image_id, "concept": concept, "culture": culture,
        }))?;
        Ok(r.verdict)
    }

    fn attribute_country(
        &self,
        image: &ImageRef,
        concept: Concept,
    ) -> Result<Option<String>, ClientError> {
        let r: CountryAnswer = self.ask(json!({
            "op": "attribute_country", "image_id": image.image_id, "concept": concept,
        }))?;
        Ok(r.country)
    }

    fn select_artifact(
        &self,
        image: &ImageRef,
        concept: Concept,
        candidates: &[String],
    ) -> Result<Option<String>, ClientError> {
        let r: Selection = self.ask(json!({
            "op": "select_artifact", "image_id": image.image_id, "concept": concept,
            "candidates": candidates,
        }))?;
        Ok(r.artifact_id)
    }
}

impl<T: Transport> RetrieverClient for JsonClient<T> {
    fn retrieve(
        &self,
        image: &ImageRef,
        concept: Concept,
        country: &str,
        k: usize,
    ) -> Result<Vec<String>, ClientError> {
        let r: Candidates = self.ask(json!({
            "op": "retrieve", "image_id": image.image_id, "concept": concept,
            "country": country, "k": k,
        }))?;
        Ok(r.candidates)
    }
}

/// Maps `f` over `items` on at most `parallel` threads, preserving order.
pub fn run_bounded<T, R, F>(parallel: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let parallel = parallel.max(1);
    if parallel == 1 || items.len() < 2 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    match rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
    {
        Ok(pool) => pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()),
        Err(_) => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Like [`run_bounded`] for fallible work, but stops scheduling items after the
/// first failure. Returns the lowest-index error seen together with its index.
pub fn try_run_bounded<T, R, E, F>(parallel: usize, items: &[T], f: F) -> Result<Vec<R>, (usize, E)>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(usize, &T) -> Result<R, E> + Sync + Send,
{
    use std::sync::atomic::{AtomicBool, Ordering};
    let failed = AtomicBool::new(false);
    let outcomes = run_bounded(parallel, items, |i, t| {
        if failed.load(Ordering::Relaxed) {
            return None;
        }
        let r = f(i, t);
        if r.is_err() {
            failed.store(true, Ordering::Relaxed);
        }
        Some(r)
    });
    let mut out = Vec::with_capacity(items.len());
    let mut skipped = false;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err((i, e)),
            None => skipped = true,
        }
    }
    debug_assert!(!skipped, "items are only skipped after a failure");
    Ok(out)
}
