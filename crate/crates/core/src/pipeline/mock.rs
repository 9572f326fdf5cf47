//! Deterministic offline backend.
//!
//! Responses are looked up, in order, among in-memory overrides and files in a canned
//! directory, keyed by `(stage, phase, hash of the user prompt)` and then by
//! `(stage, phase)` alone. Anything not found is produced by a rule generator that emits
//! a small valid ST for the request, reading the client prompt from `<prompt>` tags and
//! the foreground from the context JSON.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::backend::{
    BackendError, CompletionRequest, GenStage, GeneratorBackend, Phase, DEFAULT_MAX_RETRIES, DEFAULT_TIMEOUT,
};
use super::extract::balanced_braces;
use super::COMBINED_DELIMITER;
use crate::st::{
    serialize_st, Animation, BBox, Background, Banner, BannerPosition, Canvas, Color, Keyframe, LayoutObject,
    ObjectAnimation, StFragment, TextboxColor,
};
use crate::validate::quoted_strings;

pub const MOCK_DURATION: u32 = 50;

/// First 16 hex digits of the SHA-256 of a user prompt.
pub fn prompt_hash(user: &str) -> String {
    let mut h = hex::encode(Sha256::digest(user.as_bytes()));
    h.truncate(16);
    h
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    stage: GenStage,
    phase: Phase,
    hash: Option<String>,
}

#[derive(Debug)]
pub struct MockBackend {
    pub name: String,
    pub canned_dir: Option<PathBuf>,
    pub canvas: Canvas,
    pub max_retries: u32,
    overrides: BTreeMap<Key, String>,
    calls: Mutex<Vec<CompletionRequest>>,
}

impl Default for MockBackend {
    fn default() -> Self {
        Self {
            name: "mock".into(),
            canned_dir: None,
            canvas: Canvas::default(),
            max_retries: DEFAULT_MAX_RETRIES,
            overrides: BTreeMap::new(),
            calls: Mutex::new(Vec::new()),
        }
    }
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_canned_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.canned_dir = Some(dir.into());
        self
    }

    /// Fixed response for every call of `(stage, phase)`.
    pub fn with_response(mut self, stage: GenStage, phase: Phase, text: impl Into<String>) -> Self {
        self.overrides.insert(Key { stage, phase, hash: None }, text.into());
        self
    }

    /// Fixed response for `(stage, phase)` when the user prompt is exactly `user`.
    pub fn with_response_for(mut self, stage: GenStage, phase: Phase, user: &str, text: impl Into<String>) -> Self {
        let hash = Some(prompt_hash(user));
        self.overrides.insert(Key { stage, phase, hash }, text.into());
        self
    }

    /// Requests received so far, in order.
    pub fn calls(&self) -> Vec<CompletionRequest> {
        self.calls.lock().expect("mock call log poisoned").clone()
    }

    fn canned(&self, req: &CompletionRequest, hash: &str) -> Result<Option<String>, BackendError> {
        let specific = Key {
            stage: req.stage,
            phase: req.phase,
            hash: Some(hash.to_string()),
        };
        let generic = Key { hash: None, ..specific.clone() };
        if let Some(t) = self.overrides.get(&specific).or_else(|| self.overrides.get(&generic)) {
            return Ok(Some(t.clone()));
        }
        let Some(dir) = &self.canned_dir else { return Ok(None) };
        let (s, p) = (req.stage.as_str(), req.phase.as_str());
        for file in [format!("{s}_{p}_{hash}.txt"), format!("{s}_{p}.txt")] {
            let path = dir.join(file);
            match std::fs::read_to_string(&path) {
                Ok(t) => return Ok(Some(t)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(BackendError::Unavailable(format!("{}: {e}", path.display()))),
            }
        }
        Ok(None)
    }
}

impl GeneratorBackend for MockBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.calls.lock().expect("mock call log poisoned").push(request.clone());
        let hash = prompt_hash(&request.user);
        if let Some(t) = self.canned(request, &hash)? {
            log::debug!("mock {}/{}: canned response", request.stage, request.phase.as_str());
            return Ok(t);
        }
        Ok(rule_response(request, &self.canvas))
    }

    fn timeout(&self) -> Duration {
        DEFAULT_TIMEOUT
    }

    fn max_retries(&self) -> u32 {
        self.max_retries
    }
}

/// Text between the first `<prompt>` and `</prompt>`, or the whole input.
fn client_prompt(user: &str) -> &str {
    user.find("<prompt>")
        .and_then(|s| {
            let body = &user[s + "<prompt>".len()..];
            body.find("</prompt>").map(|e| &body[..e])
        })
        .unwrap_or(user)
        .trim()
}

fn rule_response(req: &CompletionRequest, canvas: &Canvas) -> String {
    let fragment = match req.stage {
        GenStage::Banner => StFragment::Banner(rule_banners(client_prompt(&req.user), canvas)),
        GenStage::Mainground => {
            let (foreground, background) = rule_mainground(client_prompt(&req.user), canvas);
            StFragment::Mainground { foreground, background }
        }
        GenStage::Animation => StFragment::Animation(rule_animation(&foreground_boxes(&req.user), canvas)),
    };
    let reasoning = describe(&fragment);
    let json = format!("```json\n{}\n```", serialize_st(&fragment));
    match req.phase {
        Phase::Reasoning => reasoning,
        Phase::Structured => json,
        Phase::Combined => format!("{reasoning}\n{COMBINED_DELIMITER}\n{json}"),
    }
}

fn describe(fragment: &StFragment) -> String {
    let mut lines = vec![format!("Plan for the {} stage:", fragment.stage())];
    match fragment {
        StFragment::Banner(banners) if banners.is_empty() => lines.push("- no banners".into()),
        StFragment::Banner(banners) => {
            for b in banners {
                lines.push(format!("- a {} banner in {} holding {} object(s)", b.position.as_str(), b.color, b.objects.len()));
                for o in &b.objects {
                    match o.attrs() {
                        Some(a) => lines.push(format!("  - text \"{}\"", a.raw_text)),
                        None => lines.push("  - the logo".into()),
                    }
                }
            }
        }
        StFragment::Mainground { foreground, background } => {
            for o in foreground {
                match o.attrs() {
                    Some(a) => lines.push(format!("- text \"{}\" in {}", a.raw_text, a.text_color)),
                    None => lines.push("- the logo".into()),
                }
            }
            match background {
                Background::SolidColor(c) => lines.push(format!("- a flat {c} background")),
                Background::Image { caption } => lines.push(format!("- a background image: {caption}")),
            }
        }
        StFragment::Animation(a) => {
            for t in &a.tracks {
                let first = t.keyframes.first().map_or(0, |k| k.frame);
                let last = t.keyframes.last().map_or(0, |k| k.frame);
                lines.push(format!("- object {} enters at frame {first} and settles by frame {last}", t.object_index));
            }
        }
        StFragment::Full(_) => {}
    }
    lines.join("\n")
}

fn mentions_logo(prompt: &str) -> bool {
    prompt.to_lowercase().contains("logo")
}

fn rule_banners(prompt: &str, canvas: &Canvas) -> Vec<Banner> {
    let lower = prompt.to_lowercase();
    if lower.contains("no banner") || prompt.is_empty() {
        return Vec::new();
    }
    let mentioned = |words: &[&str]| words.iter().any(|w| lower.contains(w));
    let mut positions: Vec<BannerPosition> = BannerPosition::ALL
        .into_iter()
        .filter(|p| match p {
            BannerPosition::Bottom => mentioned(&["bottom"]),
            BannerPosition::TopLeft => mentioned(&["top left", "top-left", "top_left"]),
            BannerPosition::TopRight => mentioned(&["top right", "top-right", "top_right"]),
        })
        .collect();
    if positions.is_empty() {
        positions.push(BannerPosition::Bottom);
    }
    let (w, h) = (f64::from(canvas.width), f64::from(canvas.height));
    let side_w = (w * 0.3125).round();
    let mut banners: Vec<Banner> = positions
        .iter()
        .map(|&position| {
            let (bbox, color) = match position {
                BannerPosition::Bottom => (BBox::new(0.0, h - 100.0, w, 100.0), Color::rgb(0x1A, 0x3C, 0x8F)),
                BannerPosition::TopLeft => (BBox::new(0.0, 0.0, side_w, 90.0), Color::rgb(0x8F, 0x1A, 0x1A)),
                BannerPosition::TopRight => (BBox::new(w - side_w, 0.0, side_w, 90.0), Color::rgb(0x1A, 0x8F, 0x4A)),
            };
            Banner {
                position,
                bbox,
                color,
                objects: Vec::new(),
            }
        })
        .collect();

    // object kinds per banner, laid out left to right afterwards
    let mut contents: Vec<Vec<Option<String>>> = vec![Vec::new(); banners.len()];
    if mentions_logo(prompt) {
        contents[0].push(None);
    }
    for (k, text) in quoted_strings(prompt).into_iter().enumerate() {
        contents[k % banners.len()].push(Some(text));
    }
    for (banner, items) in banners.iter_mut().zip(contents) {
        let slots = row_slots(&banner.bbox, items.len());
        banner.objects = items
            .into_iter()
            .zip(slots)
            .map(|(item, slot)| match item {
                Some(text) => LayoutObject::text(slot, text, Color::WHITE, TextboxColor::Transparent),
                None => LayoutObject::logo(slot),
            })
            .collect();
    }
    banners
}

/// `k` equal slots in a row inside `outer`, with 10 px margins.
fn row_slots(outer: &BBox, k: usize) -> Vec<BBox> {
    if k == 0 {
        return Vec::new();
    }
    let m = 10.0;
    let slot_w = ((outer.w - m * (k as f64 + 1.0)) / k as f64).floor().max(1.0);
    let slot_h = (outer.h - 2.0 * m).max(1.0);
    (0..k)
        .map(|i| BBox::new(outer.x1 + m + i as f64 * (slot_w + m), outer.y1 + m, slot_w, slot_h))
        .collect()
}

fn rule_mainground(prompt: &str, canvas: &Canvas) -> (Vec<LayoutObject>, Background) {
    let (w, h) = (f64::from(canvas.width), f64::from(canvas.height));
    let mut texts = quoted_strings(prompt);
    let logo = mentions_logo(prompt);
    if texts.is_empty() && !logo {
        let words: Vec<&str> = prompt
            .split_whitespace()
            .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
            .filter(|t| !t.is_empty())
            .take(4)
            .collect();
        texts.push(if words.is_empty() { "Welcome".to_string() } else { words.join(" ") });
    }
    let k = texts.len() + usize::from(logo);
    let (x0, y0) = (160.0, 140.0);
    let (rw, rh) = (w - 320.0, h - 300.0);
    let gap = 20.0;
    let slot_h = ((rh - gap * (k as f64 - 1.0)) / k as f64).min(200.0).floor().max(1.0);
    let mut foreground = Vec::with_capacity(k);
    let mut slot = 0usize;
    let mut next_y = || {
        let y = y0 + slot as f64 * (slot_h + gap);
        slot += 1;
        y
    };
    if logo {
        let y = next_y();
        foreground.push(LayoutObject::logo(BBox::new(((w - slot_h) / 2.0).floor(), y, slot_h, slot_h)));
    }
    for (i, text) in texts.into_iter().enumerate() {
        let y = next_y();
        let (fg, bg) = if i % 2 == 0 {
            (Color::WHITE, TextboxColor::Solid(Color::BLACK))
        } else {
            (Color::rgb(0xFF, 0xD7, 0x00), TextboxColor::Transparent)
        };
        foreground.push(LayoutObject::text(BBox::new(x0, y, rw, slot_h), text, fg, bg));
    }
    let lower = prompt.to_lowercase();
    let background = if ["photo", "image", "picture"].iter().any(|w| lower.contains(w)) {
        Background::Image {
            caption: prompt.to_string(),
        }
    } else {
        const PALETTE: [Color; 5] = [
            Color::rgb(0x20, 0x20, 0x20),
            Color::rgb(0x0B, 0x3D, 0x2E),
            Color::rgb(0x3D, 0x0B, 0x2E),
            Color::rgb(0x2E, 0x3D, 0x0B),
            Color::rgb(0x10, 0x20, 0x40),
        ];
        let pick = Sha256::digest(prompt.as_bytes())[0] as usize % PALETTE.len();
        Background::SolidColor(PALETTE[pick])
    };
    (foreground, background)
}

/// Foreground boxes from the first `{"foreground": [...]}` object in the text.
fn foreground_boxes(user: &str) -> Vec<BBox> {
    for (at, _) in user.match_indices("\"foreground\"") {
        let Some(open) = user[..at].rfind('{') else { continue };
        let Some(block) = balanced_braces(&user[open..]) else { continue };
        let Ok(value) = serde_json::from_str::<serde_json::Value>(block) else { continue };
        let Some(items) = value.get("foreground").and_then(|v| v.as_array()) else { continue };
        return items
            .iter()
            .filter_map(|o| {
                let b = o.get("bbox")?.as_array()?;
                let v: Vec<f64> = b.iter().filter_map(|x| x.as_f64()).collect();
                (v.len() == 4).then(|| BBox::new(v[0], v[1], v[2], v[3]))
            })
            .collect();
    }
    Vec::new()
}

fn rule_animation(boxes: &[BBox], canvas: &Canvas) -> Animation {
    let h = f64::from(canvas.height);
    let tracks = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let start = (5 * i as u32).min(25);
            let end = start + 20;
            let from = match i % 3 {
                0 => BBox::new(b.x1 - b.x1.min(200.0), b.y1, b.w, b.h),
                1 => BBox::new(b.x1, b.y1 + (h - b.y2()).clamp(0.0, 120.0), b.w, b.h),
                _ => BBox::new(
                    (b.x1 + b.w / 4.0).floor(),
                    (b.y1 + b.h / 4.0).floor(),
                    (b.w / 2.0).floor(),
                    (b.h / 2.0).floor(),
                ),
            };
            ObjectAnimation {
                object_index: i,
                keyframes: vec![Keyframe::new(start, from), Keyframe::new(end, *b)],
            }
        })
        .collect();
    Animation {
        duration: MOCK_DURATION,
        tracks,
    }
}
