use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, CompletionRequest, GeneratorBackend, DEFAULT_MAX_RETRIES, DEFAULT_TIMEOUT};

pub const TOKEN_ENV: &str = "ANIMLAYOUT_BACKEND_TOKEN";

#[derive(Serialize)]
struct WireRequest<'a> {
    system: &'a str,
    prompt: &'a str,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

/// Completion endpoint speaking `{"system","prompt","max_tokens"}` → `{"text"}`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub name: String,
    pub endpoint: String,
    pub token: Option<String>,
    pub max_tokens: u32,
    pub timeout: Duration,
    pub max_retries: u32,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, token: Option<String>) -> Self {
        Self::with_timeout(endpoint, token, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(endpoint: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            name: "http".into(),
            endpoint: endpoint.into(),
            token,
            max_tokens: 4096,
            timeout,
            max_retries: DEFAULT_MAX_RETRIES,
            agent,
        }
    }

    /// Reads the bearer token from `ANIMLAYOUT_BACKEND_TOKEN` when set.
    pub fn from_env(endpoint: impl Into<String>) -> Self {
        Self::new(endpoint, std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()))
    }
}

impl GeneratorBackend for HttpBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let body = WireRequest {
            system: &request.system,
            prompt: &request.user,
            max_tokens: self.max_tokens,
        };
        let mut call = self.agent.post(&self.endpoint);
        if let Some(token) = &self.token {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = call.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => BackendError::Timeout(self.timeout),
            other => BackendError::Unavailable(other.to_string()),
        })?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => BackendError::Timeout(self.timeout),
            other => BackendError::Protocol(other.to_string()),
        })?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Rejected { status, body: text });
        }
        let parsed: WireResponse =
            serde_json::from_str(&text).map_err(|e| BackendError::Protocol(format!("{e}: {text:.200}")))?;
        Ok(parsed.text)
    }

    fn timeout(&self) -> Duration {
        self.timeout
    }

    fn max_retries(&self) -> u32 {
        self.max_retries
    }
}
