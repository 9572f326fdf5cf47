//! Structural validation of generated ST text and the failure-rate metric.

use serde::Serialize;

use crate::st::{
    parse_st_with, LayoutObject, ObjectClass, ParseContext, StError, StFragment, StStage, ViolationKind,
};

/// Failure taxonomy, in classification priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    JsonParse,
    MissingKey,
    WrongHierarchy,
    MissingRequestedElement,
    InvariantBreach,
}

impl FailureKind {
    pub const ALL: [FailureKind; 5] = [
        FailureKind::JsonParse,
        FailureKind::MissingKey,
        FailureKind::WrongHierarchy,
        FailureKind::MissingRequestedElement,
        FailureKind::InvariantBreach,
    ];

    /// Kinds that indicate malformed structure rather than wrong content.
    pub fn is_structural(self) -> bool {
        matches!(
            self,
            FailureKind::JsonParse | FailureKind::MissingKey | FailureKind::WrongHierarchy
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub stage: StStage,
    pub failures: Vec<Failure>,
}

impl ValidationReport {
    pub fn new(stage: StStage, failures: Vec<Failure>) -> Self {
        Self {
            ok: failures.is_empty(),
            stage,
            failures,
        }
    }

    /// The highest-priority failure kind, if any.
    pub fn primary_kind(&self) -> Option<FailureKind> {
        self.failures.iter().map(|f| f.kind).min()
    }
}

/// An on-screen element the user prompt asked for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequestedElement {
    pub class: ObjectClass,
    /// Substring the element's raw text must contain (text class only).
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PromptSpec {
    requested_elements: Vec<RequestedElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidateError {
    #[error("failure rate of an empty report list is undefined")]
    EmptyInput,
    #[error("requested element #{0} has an empty text substring")]
    EmptySubstring(usize),
}

impl PromptSpec {
    pub fn new(requested_elements: Vec<RequestedElement>) -> Result<Self, ValidateError> {
        if let Some(i) = requested_elements
            .iter()
            .position(|e| e.text.as_deref().is_some_and(|t| t.trim().is_empty()))
        {
            return Err(ValidateError::EmptySubstring(i));
        }
        Ok(Self { requested_elements })
    }

    /// Text elements for every quoted string in the prompt.
    ///
    /// Recognizes `"…"`, `“…”` and `` ``…'' `` quoting. Trailing `,.;:` inside the
    /// quotes is dropped since English punctuation conventionally sits there.
    pub fn from_prompt(prompt: &str) -> Self {
        let requested_elements = quoted_strings(prompt)
            .into_iter()
            .map(|text| RequestedElement {
                class: ObjectClass::Text,
                text: Some(text),
            })
            .collect();
        Self { requested_elements }
    }

    pub fn elements(&self) -> &[RequestedElement] {
        &self.requested_elements
    }

    pub fn is_empty(&self) -> bool {
        self.requested_elements.is_empty()
    }

    pub fn push(&mut self, element: RequestedElement) -> Result<(), ValidateError> {
        if element.text.as_deref().is_some_and(|t| t.trim().is_empty()) {
            return Err(ValidateError::EmptySubstring(self.requested_elements.len()));
        }
        self.requested_elements.push(element);
        Ok(())
    }

    pub fn merged(mut self, other: PromptSpec) -> Self {
        self.requested_elements.extend(other.requested_elements);
        self
    }
}

pub fn quoted_strings(prompt: &str) -> Vec<String> {
    const PAIRS: [(&str, &str); 3] = [("``", "''"), ("\u{201c}", "\u{201d}"), ("\"", "\"")];
    let mut out = Vec::new();
    let mut rest = prompt;
    loop {
        let next = PAIRS
            .iter()
            .filter_map(|(open, close)| rest.find(open).map(|i| (i, *open, *close)))
            .min_by_key(|(i, open, _)| (*i, std::cmp::Reverse(open.len())));
        let Some((start, open, close)) = next else { break };
        let body_start = start + open.len();
        let Some(len) = rest[body_start..].find(close) else { break };
        let body = rest[body_start..body_start + len]
            .trim()
            .trim_end_matches([',', '.', ';', ':'])
            .trim();
        if !body.is_empty() {
            out.push(body.to_string());
        }
        rest = &rest[body_start + len + close.len()..];
    }
    out
}

/// Parses `text` as the given stage with the default canvas and checks requested elements.
pub fn validate_stage(text: &str, stage: StStage, spec: Option<&PromptSpec>) -> ValidationReport {
    validate_stage_with(text, stage, spec, &ParseContext::default()).0
}

/// Like [`validate_stage`], also returning the decoded fragment when it parsed.
pub fn validate_stage_with(
    text: &str,
    stage: StStage,
    spec: Option<&PromptSpec>,
    ctx: &ParseContext,
) -> (ValidationReport, Option<StFragment>) {
    let fragment = match parse_st_with(text, stage, ctx) {
        Ok(f) => f,
        Err(e) => return (ValidationReport::new(stage, parse_failures(&e)), None),
    };
    let failures = spec
        .map(|s| missing_elements(&fragment, s))
        .unwrap_or_default();
    (ValidationReport::new(stage, failures), Some(fragment))
}

fn parse_failures(err: &StError) -> Vec<Failure> {
    match err {
        StError::JsonSyntax { .. } => vec![Failure {
            kind: FailureKind::JsonParse,
            path: "$".into(),
            message: err.to_string(),
        }],
        StError::SchemaViolation(vs) => vs
            .iter()
            .map(|v| Failure {
                kind: match v.kind {
                    ViolationKind::MissingKey => FailureKind::MissingKey,
                    ViolationKind::WrongHierarchy => FailureKind::WrongHierarchy,
                    ViolationKind::Invariant => FailureKind::InvariantBreach,
                },
                path: v.path.clone(),
                message: v.message.clone(),
            })
            .collect(),
    }
}

fn fragment_objects(fragment: &StFragment) -> Vec<&LayoutObject> {
    match fragment {
        StFragment::Banner(banners) => banners.iter().flat_map(|b| &b.objects).collect(),
        StFragment::Mainground { foreground, .. } => foreground.iter().collect(),
        StFragment::Animation(_) => Vec::new(),
        StFragment::Full(doc) => doc
            .banners
            .iter()
            .flat_map(|b| &b.objects)
            .chain(&doc.foreground)
            .collect(),
    }
}

fn element_present(objects: &[&LayoutObject], wanted: &RequestedElement) -> bool {
    let needle = wanted.text.as_deref().map(str::to_lowercase);
    objects.iter().any(|o| {
        o.class() == wanted.class
            && match (&needle, o.attrs()) {
                (None, _) => true,
                (Some(n), Some(a)) => a.raw_text.to_lowercase().contains(n.as_str()),
                (Some(_), None) => false,
            }
    })
}

fn missing_elements(fragment: &StFragment, spec: &PromptSpec) -> Vec<Failure> {
    // Animation fragments carry no objects to check.
    if matches!(fragment, StFragment::Animation(_)) {
        return Vec::new();
    }
    let objects = fragment_objects(fragment);
    spec.elements()
        .iter()
        .filter(|e| !element_present(&objects, e))
        .map(|e| Failure {
            kind: FailureKind::MissingRequestedElement,
            path: "$".into(),
            message: match &e.text {
                Some(t) => format!("missing requested {} element containing {t:?}", e.class.as_str()),
                None => format!("missing requested {} element", e.class.as_str()),
            },
        })
        .collect()
}

/// Fraction of reports that are not ok.
pub fn failure_rate(reports: &[ValidationReport]) -> Result<f64, ValidateError> {
    if reports.is_empty() {
        return Err(ValidateError::EmptyInput);
    }
    let failed = reports.iter().filter(|r| !r.ok).count();
    Ok(failed as f64 / reports.len() as f64)
}
