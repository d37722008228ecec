//! HTTP chat-completion client with retries, a concurrency bound and a
//! per-minute rate limit.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use backprompt_core::harness::{ChatModel, Completion, ModelError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

fn default_api_key_env() -> String {
    "OPENAI_API_KEY".into()
}
fn default_timeout() -> u64 {
    120
}
fn default_retries() -> u32 {
    5
}
fn default_backoff_base() -> u64 {
    1_000
}
fn default_backoff_cap() -> u64 {
    30_000
}
fn default_concurrency() -> usize {
    4
}

/// One OpenAI-style `/chat/completions` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model_name: String,
    /// When set, replaces the per-call temperature chosen by the harness
    /// (1.0 for generation, 0.0 for verification).
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_base")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_cap")]
    pub backoff_cap_ms: u64,
    /// Upper bound on requests in flight across all workers.
    #[serde(default = "default_concurrency")]
    pub max_concurrent: usize,
    #[serde(default)]
    pub requests_per_minute: Option<u32>,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model_name: model_name.into(),
            temperature: None,
            max_output_tokens: None,
            api_key_env: default_api_key_env(),
            request_timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_base_ms: default_backoff_base(),
            backoff_cap_ms: default_backoff_cap(),
            max_concurrent: default_concurrency(),
            requests_per_minute: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayConfigError {
    #[error("environment variable {0} with the API key is not set")]
    MissingApiKey(String),
    #[error("temperature must be a finite number >= 0, got {0}")]
    Temperature(f64),
    #[error("max_concurrent must be at least 1")]
    Concurrency,
}

/// Delay before retry number `attempt` (0-based): `base * 2^attempt`,
/// capped, then scaled into `[d/2, d)` by `jitter` in `[0, 1)`.
pub fn backoff_delay(attempt: u32, base: Duration, cap: Duration, jitter: f64) -> Duration {
    let full = base.saturating_mul(1u32.checked_shl(attempt).unwrap_or(u32::MAX)).min(cap);
    full / 2 + full.mul_f64(jitter.clamp(0.0, 1.0) / 2.0)
}

/// Counting semaphore over a mutex and condition variable.
struct Slots {
    free: Mutex<usize>,
    ready: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.ready.wait(free).expect("slot lock");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.ready.notify_one();
    }
}

enum Attempt {
    Done(Completion),
    Retry(String, Option<Duration>),
    Fatal(String),
}

/// A live endpoint shared by every worker of a run.
pub struct LiveEndpoint {
    config: EndpointConfig,
    api_key: String,
    agent: ureq::Agent,
    slots: Slots,
    window: Mutex<VecDeque<Instant>>,
    jitter: Mutex<ChaCha8Rng>,
}

impl std::fmt::Debug for LiveEndpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiveEndpoint").field("config", &self.config).finish_non_exhaustive()
    }
}

impl LiveEndpoint {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: EndpointConfig, seed: u64) -> Result<Self, GatewayConfigError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| GatewayConfigError::MissingApiKey(config.api_key_env.clone()))?;
        Self::with_key(config, key, seed)
    }

    pub fn with_key(config: EndpointConfig, api_key: String, seed: u64) -> Result<Self, GatewayConfigError> {
        if let Some(t) = config.temperature {
            if !t.is_finite() || t < 0.0 {
                return Err(GatewayConfigError::Temperature(t));
            }
        }
        if config.max_concurrent == 0 {
            return Err(GatewayConfigError::Concurrency);
        }
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.request_timeout_secs))
            .build();
        Ok(Self {
            slots: Slots {
                free: Mutex::new(config.max_concurrent),
                ready: Condvar::new(),
            },
            window: Mutex::new(VecDeque::new()),
            jitter: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
            agent,
            api_key,
            config,
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Block until one more request fits in the last-minute window.
    fn wait_for_rate(&self) {
        let Some(limit) = self.config.requests_per_minute.filter(|&l| l > 0) else {
            return;
        };
        let minute = Duration::from_secs(60);
        loop {
            let mut w = self.window.lock().expect("rate lock");
            let now = Instant::now();
            while w.front().is_some_and(|t| now.duration_since(*t) >= minute) {
                w.pop_front();
            }
            if w.len() < limit as usize {
                w.push_back(now);
                return;
            }
            let wait = minute - now.duration_since(w[0]);
            drop(w);
            std::thread::sleep(wait);
        }
    }

    fn attempt(&self, prompt: &str, temperature: f64) -> Attempt {
        let mut body = json!({
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature.unwrap_or(temperature),
        });
        if let Some(max) = self.config.max_output_tokens {
            body["max_tokens"] = json!(max);
        }
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        self.wait_for_rate();
        let _slot = self.slots.acquire();
        let result = self
            .agent
            .post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .set("Content-Type", "application/json")
            .send_string(&body.to_string());
        match result {
            Ok(resp) => match resp.into_string() {
                Ok(text) => match serde_json::from_str::<Value>(&text) {
                    Ok(v) => parse_response(prompt, &v).map_or_else(Attempt::Fatal, Attempt::Done),
                    Err(e) => Attempt::Fatal(format!("response is not JSON: {e}")),
                },
                Err(e) => Attempt::Retry(format!("reading response: {e}"), None),
            },
            Err(ureq::Error::Status(code, resp)) => {
                let retry_after = resp
                    .header("retry-after")
                    .and_then(|s| s.trim().parse::<u64>().ok())
                    .map(Duration::from_secs);
                let text = resp.into_string().unwrap_or_default();
                let msg = format!("HTTP {code}: {}", text.chars().take(300).collect::<String>());
                if code == 408 || code == 409 || code == 429 || code >= 500 {
                    Attempt::Retry(msg, retry_after)
                } else {
                    Attempt::Fatal(msg)
                }
            }
            Err(ureq::Error::Transport(t)) => Attempt::Retry(t.to_string(), None),
        }
    }

    /// One completion, retrying transient failures up to `max_retries` times.
    pub fn complete(&self, prompt: &str, temperature: f64) -> Result<Completion, ModelError> {
        let base = Duration::from_millis(self.config.backoff_base_ms);
        let cap = Duration::from_millis(self.config.backoff_cap_ms);
        let mut attempt = 0;
        loop {
            match self.attempt(prompt, temperature) {
                Attempt::Done(c) => return Ok(c),
                Attempt::Fatal(msg) => return Err(ModelError::Transport(msg)),
                Attempt::Retry(msg, hint) => {
                    if attempt >= self.config.max_retries {
                        return Err(ModelError::Transport(format!(
                            "{msg} (gave up after {} attempts)",
                            attempt + 1
                        )));
                    }
                    let jitter = self.jitter.lock().expect("jitter lock").gen::<f64>();
                    let mut delay = backoff_delay(attempt, base, cap, jitter);
                    if let Some(h) = hint {
                        delay = delay.max(h.min(cap));
                    }
                    std::thread::sleep(delay);
                    attempt += 1;
                }
            }
        }
    }
}

fn parse_response(prompt: &str, v: &Value) -> Result<Completion, String> {
    let text = v["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| "response has no choices[0].message.content".to_string())?
        .to_string();
    let approx = Completion::approximate(prompt, text.clone());
    let usage = &v["usage"];
    Ok(Completion {
        prompt_tokens: usage["prompt_tokens"].as_u64().unwrap_or(approx.prompt_tokens),
        response_tokens: usage["completion_tokens"].as_u64().unwrap_or(approx.response_tokens),
        text,
    })
}

/// A per-instance handle on a shared [`LiveEndpoint`].
pub struct LiveModel<'a>(pub &'a LiveEndpoint);

impl ChatModel for LiveModel<'_> {
    fn complete(&mut self, prompt: &str, temperature: f64) -> Result<Completion, ModelError> {
        self.0.complete(prompt, temperature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_and_caps() {
        let (b, c) = (Duration::from_secs(1), Duration::from_secs(30));
        assert_eq!(backoff_delay(0, b, c, 0.0), Duration::from_millis(500));
        assert_eq!(backoff_delay(1, b, c, 0.0), Duration::from_secs(1));
        assert_eq!(backoff_delay(2, b, c, 0.999_999).as_millis(), 3999);
        assert_eq!(backoff_delay(10, b, c, 0.0), Duration::from_secs(15));
        assert!(backoff_delay(40, b, c, 0.999) < c);
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let mut cfg = EndpointConfig::new("http://127.0.0.1:9", "m");
        cfg.api_key_env = "BACKPROMPT_TEST_UNSET_KEY_VARIABLE".into();
        let err = LiveEndpoint::from_env(cfg, 0).unwrap_err();
        assert!(err.to_string().contains("BACKPROMPT_TEST_UNSET_KEY_VARIABLE"));
    }

    #[test]
    fn usage_falls_back_to_approximation() {
        let v = json!({"choices": [{"message": {"content": "a b"}}]});
        let c = parse_response("x y z", &v).unwrap();
        assert_eq!((c.prompt_tokens, c.response_tokens), (3, 2));
        let v = json!({"choices": [{"message": {"content": "a"}}], "usage": {"prompt_tokens": 11, "completion_tokens": 7}});
        let c = parse_response("x", &v).unwrap();
        assert_eq!((c.prompt_tokens, c.response_tokens), (11, 7));
    }
}
