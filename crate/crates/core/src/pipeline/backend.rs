use std::fmt;
use std::time::Duration;

use serde::Serialize;

use crate::st::StStage;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);
pub const DEFAULT_MAX_RETRIES: u32 = 2;

/// The three generation stages, run in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenStage {
    Banner,
    Mainground,
    Animation,
}

impl GenStage {
    pub const ALL: [GenStage; 3] = [GenStage::Banner, GenStage::Mainground, GenStage::Animation];

    pub fn as_str(self) -> &'static str {
        match self {
            GenStage::Banner => "banner",
            GenStage::Mainground => "mainground",
            GenStage::Animation => "animation",
        }
    }

    pub fn st_stage(self) -> StStage {
        match self {
            GenStage::Banner => StStage::Banner,
            GenStage::Mainground => StStage::Mainground,
            GenStage::Animation => StStage::Animation,
        }
    }
}

impl fmt::Display for GenStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which call of a stage a request belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Free-text reasoning (UT).
    Reasoning,
    /// Structured output (ST) conditioned on the reasoning.
    Structured,
    /// Reasoning and structured output in one completion.
    Combined,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Reasoning => "ut",
            Phase::Structured => "st",
            Phase::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletionRequest {
    pub stage: GenStage,
    pub phase: Phase,
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend timed out after {0:?}")]
    Timeout(Duration),
    #[error("backend returned HTTP {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Protocol(String),
}

/// Opaque text-in/text-out generator.
pub trait GeneratorBackend: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError>;

    fn timeout(&self) -> Duration {
        DEFAULT_TIMEOUT
    }

    fn max_retries(&self) -> u32 {
        DEFAULT_MAX_RETRIES
    }
}

impl<T: GeneratorBackend + ?Sized> GeneratorBackend for &T {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }

    fn timeout(&self) -> Duration {
        (**self).timeout()
    }

    fn max_retries(&self) -> u32 {
        (**self).max_retries()
    }
}
