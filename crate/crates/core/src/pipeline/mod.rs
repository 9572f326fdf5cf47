//! Three-stage generation: banners, then foreground and background, then animation.
//!
//! Each stage first asks its backend for free-text reasoning (UT) and then for the
//! structured output (ST) with that reasoning in context. Structurally broken output is
//! retried up to the backend's `max_retries`; the assembled document is validated once
//! more against the requested elements.

mod backend;
mod extract;
mod http;
mod mock;
mod template;

pub use backend::*;
pub use extract::{balanced_braces, extract_json_block};
pub use http::{HttpBackend, TOKEN_ENV};
pub use mock::{prompt_hash, MockBackend, MOCK_DURATION};
pub use template::{fill, placeholders, StageTemplate, Templates, DEFAULT_REASONING};

use serde::Serialize;

use crate::st::{
    serialize_document, serialize_foreground, serialize_st, Animation, Background, Banner, Canvas, LayoutObject,
    ParseContext, StFragment, StStage, VideoSt,
};
use crate::validate::{validate_stage_with, Failure, FailureKind, PromptSpec, ValidationReport};

/// Separates reasoning from structured output in single-call mode.
pub const COMBINED_DELIMITER: &str = "### STRUCTURED";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{stage} stage failed after {} attempt(s): {}", trace.attempts(*stage), summarize(report))]
    StageFailed {
        stage: GenStage,
        report: ValidationReport,
        trace: Box<GenerationTrace>,
    },
    #[error("{stage} stage backend call failed")]
    Backend {
        stage: GenStage,
        #[source]
        source: BackendError,
        trace: Box<GenerationTrace>,
    },
    #[error("{stage} stage needs {{{placeholder}}} but the context does not provide it")]
    MissingContext { stage: GenStage, placeholder: String },
    #[error("no JSON object found in completion")]
    NoJsonFound,
    #[error("{stage} template: {message}")]
    Template { stage: GenStage, message: String },
}

impl PipelineError {
    /// The trace collected before the failure, when there is one.
    pub fn trace(&self) -> Option<&GenerationTrace> {
        match self {
            PipelineError::StageFailed { trace, .. } | PipelineError::Backend { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

fn summarize(report: &ValidationReport) -> String {
    match report.failures.first() {
        Some(f) => format!("{:?} at {}: {}", f.kind, f.path, f.message),
        None => "no failures".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningMode {
    /// Separate UT and ST completions.
    #[default]
    TwoCall,
    /// One completion with reasoning, the delimiter line, then JSON.
    SingleCall,
}

/// Values available to template placeholders.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageContext {
    pub banner_prompt: Option<String>,
    pub mainground_prompt: Option<String>,
    pub banner_st: Option<String>,
    pub mainground_st: Option<String>,
}

impl StageContext {
    fn value(&self, name: &str) -> Option<&str> {
        match name {
            "banner_prompt" => self.banner_prompt.as_deref(),
            "mainground_prompt" => self.mainground_prompt.as_deref(),
            "banner_st" => self.banner_st.as_deref(),
            "mainground_st" => self.mainground_st.as_deref(),
            _ => None,
        }
    }
}

/// One backend call, successful or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallRecord {
    pub attempt: u32,
    pub phase: Phase,
    pub system: String,
    pub user: String,
    pub response: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutput {
    pub ut_text: String,
    /// Full text of the completion that carried the structured output.
    pub raw_response: String,
    /// The extracted JSON payload.
    pub st_text: String,
    /// User prompt of the structured call.
    pub user_prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageTrace {
    pub stage: GenStage,
    pub system_prompt: String,
    pub user_prompt: String,
    pub ut_text: String,
    pub raw_st_text: String,
    pub report: ValidationReport,
    pub attempts: u32,
    pub calls: Vec<CallRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GenerationTrace {
    pub stages: Vec<StageTrace>,
    /// Validation of the assembled document; absent when a stage failed.
    pub final_report: Option<ValidationReport>,
}

impl GenerationTrace {
    pub fn attempts(&self, stage: GenStage) -> u32 {
        self.stages.iter().find(|s| s.stage == stage).map_or(0, |s| s.attempts)
    }

    /// The report that decides whether this generation counts as a failure.
    pub fn report(&self) -> Option<&ValidationReport> {
        self.final_report
            .as_ref()
            .or_else(|| self.stages.last().map(|s| &s.report))
    }

    pub fn ok(&self) -> bool {
        self.report().is_some_and(|r| r.ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub document: VideoSt,
    pub trace: GenerationTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryDecision {
    Retry,
    Abort,
}

/// Retry a failed attempt only for purely structural failures and while
/// `attempt <= max_retries` (attempts are numbered from 1).
pub fn retry_policy(report: &ValidationReport, attempt: u32, max_retries: u32) -> RetryDecision {
    let structural = !report.ok && report.failures.iter().all(|f| f.kind.is_structural());
    if structural && attempt <= max_retries {
        RetryDecision::Retry
    } else {
        RetryDecision::Abort
    }
}

/// Runs the UT call and then the ST call of one stage, appending every call to `log`.
pub fn run_stage(
    stage: GenStage,
    ctx: &StageContext,
    backend: &dyn GeneratorBackend,
    template: &StageTemplate,
    mode: ReasoningMode,
    attempt: u32,
    log: &mut Vec<CallRecord>,
) -> Result<StageOutput, PipelineError> {
    for section in [&template.context, &template.reasoning, &template.format] {
        if let Some(p) = placeholders(section).into_iter().find(|p| *p != "ut" && ctx.value(p).is_none()) {
            return Err(PipelineError::MissingContext {
                stage,
                placeholder: p.to_string(),
            });
        }
    }
    let system = template.system_prompt();
    let lookup = |ut: Option<&str>| {
        let ut = ut.map(str::to_string);
        move |name: &str| {
            if name == "ut" {
                ut.clone()
            } else {
                ctx.value(name).map(str::to_string)
            }
        }
    };
    let context = fill(&template.context, lookup(None));
    let reasoning = fill(&template.reasoning, lookup(None));
    let mut call = |phase: Phase, user: String| -> Result<(String, String), PipelineError> {
        let request = CompletionRequest {
            stage,
            phase,
            system: system.clone(),
            user,
        };
        let result = backend.complete(&request);
        log.push(CallRecord {
            attempt,
            phase,
            system: request.system.clone(),
            user: request.user.clone(),
            response: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(|e| e.to_string()),
        });
        match result {
            Ok(text) => Ok((request.user, text)),
            Err(source) => Err(PipelineError::Backend {
                stage,
                source,
                trace: Box::default(),
            }),
        }
    };
    match mode {
        ReasoningMode::TwoCall => {
            let (_, ut_text) = call(Phase::Reasoning, format!("{context}\n\n{reasoning}"))?;
            let format = fill(&template.format, lookup(Some(&ut_text)));
            let (user_prompt, raw) = call(Phase::Structured, format!("{context}\n\n{format}"))?;
            let st_text = extract_json_block(&raw)?;
            Ok(StageOutput {
                ut_text,
                raw_response: raw,
                st_text,
                user_prompt,
            })
        }
        ReasoningMode::SingleCall => {
            let format = fill(&template.format, lookup(Some("(the notes you wrote above)")));
            let user = format!(
                "{context}\n\n{reasoning}\n\nAfter your notes, write a line containing only {COMBINED_DELIMITER} and then the structured output.\n\n{format}"
            );
            let (user_prompt, raw) = call(Phase::Combined, user)?;
            let (ut_text, rest) = match raw.find(COMBINED_DELIMITER) {
                Some(i) => (raw[..i].trim().to_string(), &raw[i + COMBINED_DELIMITER.len()..]),
                None => (raw.trim().to_string(), raw.as_str()),
            };
            let st_text = extract_json_block(rest)?;
            Ok(StageOutput {
                ut_text,
                raw_response: raw.clone(),
                st_text,
                user_prompt,
            })
        }
    }
}

/// One backend per stage.
#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub banner: &'a dyn GeneratorBackend,
    pub mainground: &'a dyn GeneratorBackend,
    pub animation: &'a dyn GeneratorBackend,
}

impl<'a> Backends<'a> {
    pub fn uniform(backend: &'a dyn GeneratorBackend) -> Self {
        Self {
            banner: backend,
            mainground: backend,
            animation: backend,
        }
    }

    pub fn get(&self, stage: GenStage) -> &'a dyn GeneratorBackend {
        match stage {
            GenStage::Banner => self.banner,
            GenStage::Mainground => self.mainground,
            GenStage::Animation => self.animation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerateOptions {
    pub canvas: Canvas,
    pub mode: ReasoningMode,
}

/// Runs one stage with retries, returning its decoded fragment.
fn stage_with_retries(
    stage: GenStage,
    ctx: &StageContext,
    backend: &dyn GeneratorBackend,
    template: &StageTemplate,
    opts: &GenerateOptions,
    parse_ctx: &ParseContext,
    trace: &mut GenerationTrace,
) -> Result<StFragment, PipelineError> {
    let max_retries = backend.max_retries();
    let mut calls = Vec::new();
    let mut attempt = 1;
    loop {
        let outcome = run_stage(stage, ctx, backend, template, opts.mode, attempt, &mut calls);
        let (output, report, fragment) = match outcome {
            Ok(out) => {
                let (report, fragment) = validate_stage_with(&out.st_text, stage.st_stage(), None, parse_ctx);
                (Some(out), report, fragment)
            }
            Err(PipelineError::NoJsonFound) => {
                let failure = Failure {
                    kind: FailureKind::JsonParse,
                    path: "$".into(),
                    message: "no JSON object in completion".into(),
                };
                (None, ValidationReport::new(stage.st_stage(), vec![failure]), None)
            }
            Err(PipelineError::Backend { source, .. }) => {
                trace.stages.push(StageTrace {
                    stage,
                    system_prompt: template.system_prompt(),
                    user_prompt: calls.last().map(|c| c.user.clone()).unwrap_or_default(),
                    ut_text: String::new(),
                    raw_st_text: String::new(),
                    report: ValidationReport::new(stage.st_stage(), vec![]),
                    attempts: attempt,
                    calls,
                });
                return Err(PipelineError::Backend {
                    stage,
                    source,
                    trace: Box::new(std::mem::take(trace)),
                });
            }
            Err(other) => return Err(other),
        };
        let last_response = calls.last().and_then(|c| c.response.clone()).unwrap_or_default();
        let stage_trace = StageTrace {
            stage,
            system_prompt: template.system_prompt(),
            user_prompt: output
                .as_ref()
                .map(|o| o.user_prompt.clone())
                .unwrap_or_else(|| calls.last().map(|c| c.user.clone()).unwrap_or_default()),
            ut_text: output.as_ref().map(|o| o.ut_text.clone()).unwrap_or_default(),
            raw_st_text: output.map(|o| o.raw_response).unwrap_or(last_response),
            report: report.clone(),
            attempts: attempt,
            calls: calls.clone(),
        };
        if let (true, Some(fragment)) = (report.ok, fragment) {
            trace.stages.push(stage_trace);
            return Ok(fragment);
        }
        match retry_policy(&report, attempt, max_retries) {
            RetryDecision::Retry => {
                log::info!("{stage} attempt {attempt} failed ({}); retrying", summarize(&report));
                attempt += 1;
            }
            RetryDecision::Abort => {
                trace.stages.push(stage_trace);
                return Err(PipelineError::StageFailed {
                    stage,
                    report,
                    trace: Box::new(std::mem::take(trace)),
                });
            }
        }
    }
}

/// Banner stage from `p_b`, foreground/background stage from `p_m` and the banners,
/// animation stage from the foreground alone; then the assembled document is validated
/// against `spec`.
pub fn generate(
    p_b: &str,
    p_m: &str,
    backends: Backends<'_>,
    templates: &Templates,
    spec: Option<&PromptSpec>,
    opts: &GenerateOptions,
) -> Result<Generation, PipelineError> {
    let mut trace = GenerationTrace::default();
    let parse_ctx = ParseContext {
        canvas: opts.canvas,
        foreground_len: None,
    };

    let ctx = StageContext {
        banner_prompt: Some(p_b.to_string()),
        ..StageContext::default()
    };
    let banners: Vec<Banner> = match stage_with_retries(
        GenStage::Banner,
        &ctx,
        backends.banner,
        &templates.banner,
        opts,
        &parse_ctx,
        &mut trace,
    )? {
        StFragment::Banner(b) => b,
        other => unreachable!("banner stage decoded as {:?}", other.stage()),
    };

    let ctx = StageContext {
        mainground_prompt: Some(p_m.to_string()),
        banner_st: Some(serialize_st(&StFragment::Banner(banners.clone()))),
        ..StageContext::default()
    };
    let (foreground, background): (Vec<LayoutObject>, Background) = match stage_with_retries(
        GenStage::Mainground,
        &ctx,
        backends.mainground,
        &templates.mainground,
        opts,
        &parse_ctx,
        &mut trace,
    )? {
        StFragment::Mainground { foreground, background } => (foreground, background),
        other => unreachable!("mainground stage decoded as {:?}", other.stage()),
    };

    let ctx = StageContext {
        mainground_st: Some(serialize_foreground(&foreground)),
        ..StageContext::default()
    };
    let animation_ctx = ParseContext {
        canvas: opts.canvas,
        foreground_len: Some(foreground.len()),
    };
    let animation: Animation = match stage_with_retries(
        GenStage::Animation,
        &ctx,
        backends.animation,
        &templates.animation,
        opts,
        &animation_ctx,
        &mut trace,
    )? {
        StFragment::Animation(a) => a,
        other => unreachable!("animation stage decoded as {:?}", other.stage()),
    };

    let document = VideoSt {
        canvas: opts.canvas,
        banners,
        foreground,
        background,
        animation,
    };
    let (report, _) = validate_stage_with(&serialize_document(&document), StStage::Full, spec, &parse_ctx);
    if !report.ok {
        log::warn!("assembled document failed validation: {}", summarize(&report));
    }
    trace.final_report = Some(report);
    Ok(Generation { document, trace })
}
