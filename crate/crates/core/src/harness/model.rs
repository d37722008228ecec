use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::{approx_tokens, sha256_hex};

/// Sampling temperature for answer generation.
pub const GENERATION_TEMPERATURE: f64 = 1.0;
/// Sampling temperature for verification queries.
pub const VERIFICATION_TEMPERATURE: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: u64,
    pub response_tokens: u64,
}

impl Completion {
    /// A completion whose token counts come from the approximate tokenizer.
    pub fn approximate(prompt: &str, text: String) -> Self {
        Self {
            prompt_tokens: approx_tokens(prompt),
            response_tokens: approx_tokens(&text),
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ModelError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("scripted responses exhausted")]
    ScriptExhausted,
    #[error("replay mismatch at call {index}: recorded prompt hash {expected}, got {actual}")]
    ReplayMismatch { index: usize, expected: String, actual: String },
    #[error("recording ended after {0} calls")]
    ReplayExhausted(usize),
    #[error("storage error: {0}")]
    Storage(String),
}

/// One chat session. Each call sends a single user message.
pub trait ChatModel {
    fn complete(&mut self, prompt: &str, temperature: f64) -> Result<Completion, ModelError>;
}

impl<M: ChatModel + ?Sized> ChatModel for &mut M {
    fn complete(&mut self, prompt: &str, temperature: f64) -> Result<Completion, ModelError> {
        (**self).complete(prompt, temperature)
    }
}

impl<M: ChatModel + ?Sized> ChatModel for alloc::boxed::Box<M> {
    fn complete(&mut self, prompt: &str, temperature: f64) -> Result<Completion, ModelError> {
        (**self).complete(prompt, temperature)
    }
}

/// Returns canned responses in order, then [`ModelError::ScriptExhausted`].
#[derive(Debug, Clone, Default)]
pub struct ScriptedModel {
    responses: VecDeque<String>,
}

impl ScriptedModel {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.responses.len()
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&mut self, prompt: &str, _temperature: f64) -> Result<Completion, ModelError> {
        let text = self.responses.pop_front().ok_or(ModelError::ScriptExhausted)?;
        Ok(Completion::approximate(prompt, text))
    }
}

/// A recorded exchange, keyed by the stream it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    /// Instance id plus role, e.g. `g24-0007/generator`.
    pub stream: String,
    /// Position within the stream, from 0.
    pub index: usize,
    /// SHA-256 of the prompt, lowercase hex.
    pub prompt_hash: String,
    pub prompt: String,
    pub temperature: f64,
    /// Absent when the call failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion: Option<Completion>,
    /// Why the call failed, so a replay fails the same way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ModelError>,
}

/// Receives every exchange made through a [`RecordingModel`].
pub trait RecordSink {
    fn append(&self, entry: RecordEntry) -> Result<(), ModelError>;
}

/// Wraps a model and appends every call, failed or not, to a sink.
pub struct RecordingModel<M, S> {
    inner: M,
    sink: S,
    stream: String,
    index: usize,
}

impl<M: ChatModel, S: RecordSink> RecordingModel<M, S> {
    pub fn new(inner: M, sink: S, stream: impl Into<String>) -> Self {
        Self {
            inner,
            sink,
            stream: stream.into(),
            index: 0,
        }
    }
}

impl<M: ChatModel, S: RecordSink> ChatModel for RecordingModel<M, S> {
    fn complete(&mut self, prompt: &str, temperature: f64) -> Result<Completion, ModelError> {
        let result = self.inner.complete(prompt, temperature);
        self.sink.append(RecordEntry {
            stream: self.stream.clone(),
            index: self.index,
            prompt_hash: sha256_hex(prompt),
            prompt: prompt.into(),
            temperature,
            completion: result.as_ref().ok().cloned(),
            error: result.as_ref().err().cloned(),
        })?;
        self.index += 1;
        result
    }
}

/// Serves one stream's recorded completions strictly in order, checking
/// each prompt against the recorded hash.
#[derive(Debug, Clone)]
pub struct ReplayModel {
    entries: Vec<RecordEntry>,
    next: usize,
}

impl ReplayModel {
    /// `entries` must all belong to one stream; they are ordered by index.
    pub fn new(mut entries: Vec<RecordEntry>) -> Self {
        entries.sort_by_key(|e| e.index);
        Self { entries, next: 0 }
    }
}

impl ChatModel for ReplayModel {
    fn complete(&mut self, prompt: &str, _temperature: f64) -> Result<Completion, ModelError> {
        let entry = self.entries.get(self.next).ok_or(ModelError::ReplayExhausted(self.next))?;
        let actual = sha256_hex(prompt);
        if actual != entry.prompt_hash {
            return Err(ModelError::ReplayMismatch {
                index: self.next,
                expected: entry.prompt_hash.clone(),
                actual,
            });
        }
        self.next += 1;
        match (&entry.completion, &entry.error) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(e)) => Err(e.clone()),
            (None, None) => Err(ModelError::Storage("recorded entry has neither completion nor error".into())),
        }
    }
}
