//! JSON encoding of ST documents and stage fragments.
//!
//! Decoding walks a `serde_json::Value` by hand so that every schema problem is
//! reported with a JSONPath-like location and classified as a missing key, a
//! structural (hierarchy/type) problem, or an invariant breach. All problems found
//! in one pass are collected; containment checks against the canvas run only once
//! the structure decoded cleanly.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{Map, Number, Value};

use super::types::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    MissingKey,
    /// Unknown key, wrong JSON type, or wrong array shape.
    WrongHierarchy,
    /// A value of the right type that breaks a domain rule.
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StError {
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    JsonSyntax { line: usize, column: usize, message: String },
    #[error("schema violation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    SchemaViolation(Vec<SchemaViolation>),
}

impl StError {
    pub fn violations(&self) -> &[SchemaViolation] {
        match self {
            StError::SchemaViolation(v) => v,
            StError::JsonSyntax { .. } => &[],
        }
    }
}

/// Facts a fragment is checked against that the fragment itself does not carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseContext {
    /// Canvas for containment checks of stage fragments (full documents carry their own).
    pub canvas: Canvas,
    /// Number of foreground objects animation tracks may refer to, when known.
    pub foreground_len: Option<usize>,
}

pub fn parse_st(text: &str, expected: StStage) -> Result<StFragment, StError> {
    parse_st_with(text, expected, &ParseContext::default())
}

pub fn parse_document(text: &str) -> Result<VideoSt, StError> {
    match parse_st(text, StStage::Full)? {
        StFragment::Full(doc) => Ok(doc),
        _ => unreachable!("full stage decodes to a full document"),
    }
}

pub fn parse_st_with(text: &str, expected: StStage, ctx: &ParseContext) -> Result<StFragment, StError> {
    let value: Value = serde_json::from_str(text).map_err(|e| StError::JsonSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut dec = Decoder::default();
    let fragment = dec.fragment(&value, expected, ctx);
    if let Some(fragment) = fragment.filter(|_| dec.errors.is_empty()) {
        check_fragment(&fragment, ctx, &mut dec);
        if dec.errors.is_empty() {
            return Ok(fragment);
        }
    }
    Err(StError::SchemaViolation(dec.errors))
}

const ROOT: &str = "$";

#[derive(Default)]
struct Decoder {
    errors: Vec<SchemaViolation>,
}

impl Decoder {
    fn push(&mut self, kind: ViolationKind, path: &str, message: impl Into<String>) {
        self.errors.push(SchemaViolation {
            kind,
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        match v {
            Value::Object(m) => Some(m),
            other => {
                self.push(
                    ViolationKind::WrongHierarchy,
                    path,
                    format!("expected object, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn array<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Vec<Value>> {
        match v {
            Value::Array(a) => Some(a),
            other => {
                self.push(
                    ViolationKind::WrongHierarchy,
                    path,
                    format!("expected array, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn string<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a str> {
        match v {
            Value::String(s) => Some(s),
            other => {
                self.push(
                    ViolationKind::WrongHierarchy,
                    path,
                    format!("expected string, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Number(n) => n.as_f64(),
            other => {
                self.push(
                    ViolationKind::WrongHierarchy,
                    path,
                    format!("expected number, found {}", type_name(other)),
                );
                None
            }
        }
    }

    /// Non-negative integer that fits `u32`.
    fn uint(&mut self, v: &Value, path: &str) -> Option<u32> {
        let x = self.number(v, path)?;
        match v.as_u64().and_then(|n| u32::try_from(n).ok()) {
            Some(n) => Some(n),
            None => {
                self.push(
                    ViolationKind::Invariant,
                    path,
                    format!("expected a non-negative integer, found {x}"),
                );
                None
            }
        }
    }

    /// Reports missing required keys first, then keys outside `required ∪ optional`.
    fn keys(&mut self, map: &Map<String, Value>, path: &str, required: &[&str], optional: &[&str]) -> bool {
        let before = self.errors.len();
        for key in required {
            if !map.contains_key(*key) {
                self.push(ViolationKind::MissingKey, path, format!("missing key: {key}"));
            }
        }
        for key in map.keys() {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                self.push(ViolationKind::WrongHierarchy, path, format!("unknown key: {key}"));
            }
        }
        self.errors.len() == before
    }

    fn fragment(&mut self, v: &Value, stage: StStage, ctx: &ParseContext) -> Option<StFragment> {
        let map = self.object(v, ROOT)?;
        match stage {
            StStage::Banner => {
                self.keys(map, ROOT, &["banners"], &[]);
                let banners = self.banners(map.get("banners")?, &path_key(ROOT, "banners"))?;
                Some(StFragment::Banner(banners))
            }
            StStage::Mainground => {
                self.keys(map, ROOT, &["foreground", "background"], &[]);
                let fg = map.get("foreground").and_then(|v| self.objects(v, &path_key(ROOT, "foreground")));
                let bg = map.get("background").and_then(|v| self.background(v, &path_key(ROOT, "background")));
                Some(StFragment::Mainground {
                    foreground: fg?,
                    background: bg?,
                })
            }
            StStage::Animation => self.animation_body(map, ROOT, ctx.foreground_len).map(StFragment::Animation),
            StStage::Full => self.document(map).map(StFragment::Full),
        }
    }

    fn document(&mut self, map: &Map<String, Value>) -> Option<VideoSt> {
        self.keys(map, ROOT, &["banners", "foreground", "background", "animation"], &["canvas"]);
        let canvas = match map.get("canvas") {
            Some(v) => self.canvas(v, &path_key(ROOT, "canvas")),
            None => Some(Canvas::default()),
        };
        let banners = map.get("banners").and_then(|v| self.banners(v, &path_key(ROOT, "banners")));
        let foreground = map.get("foreground").and_then(|v| self.objects(v, &path_key(ROOT, "foreground")));
        let background = map.get("background").and_then(|v| self.background(v, &path_key(ROOT, "background")));
        let fg_len = foreground.as_ref().map(Vec::len);
        let animation = map.get("animation").and_then(|v| {
            let path = path_key(ROOT, "animation");
            let m = self.object(v, &path)?;
            self.animation_body(m, &path, fg_len)
        });
        Some(VideoSt {
            canvas: canvas?,
            banners: banners?,
            foreground: foreground?,
            background: background?,
            animation: animation?,
        })
    }

    fn canvas(&mut self, v: &Value, path: &str) -> Option<Canvas> {
        let m = self.object(v, path)?;
        self.keys(m, path, &["width", "height", "fps"], &[]);
        let mut dim = |key: &str| {
            let p = path_key(path, key);
            let n = self.uint(m.get(key)?, &p)?;
            if n == 0 {
                self.push(ViolationKind::Invariant, &p, format!("{key} must be at least 1"));
                return None;
            }
            Some(n)
        };
        let (width, height, fps) = (dim("width"), dim("height"), dim("fps"));
        Some(Canvas {
            width: width?,
            height: height?,
            fps: fps?,
        })
    }

    fn bbox(&mut self, v: &Value, path: &str) -> Option<BBox> {
        let arr = self.array(v, path)?;
        if arr.len() != 4 {
            self.push(
                ViolationKind::WrongHierarchy,
                path,
                format!("bbox must have 4 elements [x1, y1, w, h], found {}", arr.len()),
            );
            return None;
        }
        let mut out = [0.0; 4];
        let mut ok = true;
        for (i, item) in arr.iter().enumerate() {
            match self.number(item, &path_index(path, i)) {
                Some(x) => out[i] = x,
                None => ok = false,
            }
        }
        if !ok {
            return None;
        }
        let b = BBox::from_array(out);
        if !b.is_well_formed() {
            self.push(ViolationKind::Invariant, path, "bbox width and height must be finite and non-negative");
            return None;
        }
        Some(b)
    }

    fn color(&mut self, v: &Value, path: &str) -> Option<Color> {
        let s = self.string(v, path)?;
        match s.parse() {
            Ok(c) => Some(c),
            Err(e) => {
                self.push(ViolationKind::Invariant, path, e.to_string());
                None
            }
        }
    }

    fn objects(&mut self, v: &Value, path: &str) -> Option<Vec<LayoutObject>> {
        let arr = self.array(v, path)?;
        let decoded: Vec<_> = arr
            .iter()
            .enumerate()
            .map(|(i, item)| self.layout_object(item, &path_index(path, i)))
            .collect();
        decoded.into_iter().collect()
    }

    fn layout_object(&mut self, v: &Value, path: &str) -> Option<LayoutObject> {
        let m = self.object(v, path)?;
        let class_path = path_key(path, "class");
        let class = match m.get("class") {
            None => {
                self.keys(m, path, &["class", "bbox"], &["text", "text_color", "textbox_color"]);
                return None;
            }
            Some(c) => {
                let s = self.string(c, &class_path)?;
                match s {
                    "text" => ObjectClass::Text,
                    "logo" => ObjectClass::Logo,
                    other => {
                        self.push(
                            ViolationKind::Invariant,
                            &class_path,
                            format!("unknown object class {other:?} (expected \"text\" or \"logo\")"),
                        );
                        return None;
                    }
                }
            }
        };
        match class {
            ObjectClass::Text => {
                self.keys(m, path, &["class", "bbox", "text", "text_color", "textbox_color"], &[]);
            }
            ObjectClass::Logo => {
                self.keys(m, path, &["class", "bbox"], &[]);
            }
        }
        let bbox = m.get("bbox").and_then(|b| self.bbox(b, &path_key(path, "bbox")));
        let kind = match class {
            ObjectClass::Logo => Some(ObjectKind::Logo),
            ObjectClass::Text => {
                let text = m.get("text").and_then(|t| {
                    let p = path_key(path, "text");
                    let s = self.string(t, &p)?;
                    if s.trim().is_empty() {
                        self.push(ViolationKind::Invariant, &p, "text must not be empty");
                        return None;
                    }
                    Some(s.to_string())
                });
                let text_color = m.get("text_color").and_then(|c| self.color(c, &path_key(path, "text_color")));
                let textbox_color = m.get("textbox_color").and_then(|c| {
                    let p = path_key(path, "textbox_color");
                    match c {
                        Value::String(s) if s == "transparent" => Some(TextboxColor::Transparent),
                        other => self.color(other, &p).map(TextboxColor::Solid),
                    }
                });
                Some(ObjectKind::Text(TextAttrs {
                    raw_text: text?,
                    text_color: text_color?,
                    textbox_color: textbox_color?,
                }))
            }
        };
        Some(LayoutObject { bbox: bbox?, kind: kind? })
    }

    fn banners(&mut self, v: &Value, path: &str) -> Option<Vec<Banner>> {
        let arr = self.array(v, path)?;
        let decoded: Vec<_> = arr
            .iter()
            .enumerate()
            .map(|(i, item)| self.banner(item, &path_index(path, i)))
            .collect();
        decoded.into_iter().collect()
    }

    fn banner(&mut self, v: &Value, path: &str) -> Option<Banner> {
        let m = self.object(v, path)?;
        self.keys(m, path, &["position", "bbox", "color", "objects"], &[]);
        let position = m.get("position").and_then(|p| {
            let pp = path_key(path, "position");
            let s = self.string(p, &pp)?;
            let pos = BannerPosition::parse(s);
            if pos.is_none() {
                self.push(
                    ViolationKind::Invariant,
                    &pp,
                    format!("unknown banner position {s:?} (expected \"bottom\", \"top_left\" or \"top_right\")"),
                );
            }
            pos
        });
        let bbox = m.get("bbox").and_then(|b| self.bbox(b, &path_key(path, "bbox")));
        let color = m.get("color").and_then(|c| self.color(c, &path_key(path, "color")));
        let objects = m.get("objects").and_then(|o| self.objects(o, &path_key(path, "objects")));
        Some(Banner {
            position: position?,
            bbox: bbox?,
            color: color?,
            objects: objects?,
        })
    }

    fn background(&mut self, v: &Value, path: &str) -> Option<Background> {
        let m = self.object(v, path)?;
        let kind_path = path_key(path, "kind");
        let Some(kind) = m.get("kind") else {
            self.keys(m, path, &["kind"], &["color", "caption"]);
            return None;
        };
        match self.string(kind, &kind_path)? {
            "solid_color" => {
                self.keys(m, path, &["kind", "color"], &[]);
                let c = self.color(m.get("color")?, &path_key(path, "color"))?;
                Some(Background::SolidColor(c))
            }
            "image" => {
                self.keys(m, path, &["kind", "caption"], &[]);
                let p = path_key(path, "caption");
                let caption = self.string(m.get("caption")?, &p)?;
                if caption.trim().is_empty() {
                    self.push(ViolationKind::Invariant, &p, "caption must not be empty");
                    return None;
                }
                Some(Background::Image {
                    caption: caption.to_string(),
                })
            }
            other => {
                self.push(
                    ViolationKind::Invariant,
                    &kind_path,
                    format!("unknown background kind {other:?} (expected \"solid_color\" or \"image\")"),
                );
                None
            }
        }
    }

    fn animation_body(&mut self, m: &Map<String, Value>, path: &str, fg_len: Option<usize>) -> Option<Animation> {
        self.keys(m, path, &["duration", "tracks"], &[]);
        let duration = m.get("duration").and_then(|d| {
            let p = path_key(path, "duration");
            let n = self.uint(d, &p)?;
            if n == 0 {
                self.push(ViolationKind::Invariant, &p, "duration must be at least 1 frame");
                return None;
            }
            Some(n)
        });
        let tracks_path = path_key(path, "tracks");
        let tracks = m.get("tracks").and_then(|t| {
            let arr = self.array(t, &tracks_path)?;
            let decoded: Vec<_> = arr
                .iter()
                .enumerate()
                .map(|(i, item)| self.track(item, &path_index(&tracks_path, i), duration))
                .collect();
            decoded.into_iter().collect::<Option<Vec<_>>>()
        })?;
        let mut seen = BTreeSet::new();
        for (i, t) in tracks.iter().enumerate() {
            let p = path_key(&path_index(&tracks_path, i), "object_index");
            if !seen.insert(t.object_index) {
                self.push(
                    ViolationKind::Invariant,
                    &p,
                    format!("duplicate track for object {}", t.object_index),
                );
            }
            if let Some(n) = fg_len {
                if t.object_index >= n {
                    self.push(
                        ViolationKind::Invariant,
                        &p,
                        format!("object_index {} out of range for {n} foreground objects", t.object_index),
                    );
                }
            }
        }
        Some(Animation {
            duration: duration?,
            tracks,
        })
    }

    fn track(&mut self, v: &Value, path: &str, duration: Option<u32>) -> Option<ObjectAnimation> {
        let m = self.object(v, path)?;
        self.keys(m, path, &["object_index", "keyframes"], &[]);
        let object_index = m
            .get("object_index")
            .and_then(|i| self.uint(i, &path_key(path, "object_index")));
        let kf_path = path_key(path, "keyframes");
        let keyframes = m.get("keyframes").and_then(|k| {
            let arr = self.array(k, &kf_path)?;
            if arr.is_empty() {
                self.push(ViolationKind::Invariant, &kf_path, "a track needs at least one keyframe");
                return None;
            }
            let decoded: Vec<_> = arr
                .iter()
                .enumerate()
                .map(|(i, item)| self.keyframe(item, &path_index(&kf_path, i)))
                .collect();
            decoded.into_iter().collect::<Option<Vec<_>>>()
        });
        let keyframes = keyframes?;
        for (i, pair) in keyframes.windows(2).enumerate() {
            if pair[1].frame <= pair[0].frame {
                self.push(
                    ViolationKind::Invariant,
                    &path_key(&path_index(&kf_path, i + 1), "frame"),
                    format!("keyframe frames must strictly increase ({} after {})", pair[1].frame, pair[0].frame),
                );
            }
        }
        if let Some(l) = duration {
            for (i, k) in keyframes.iter().enumerate() {
                if k.frame >= l {
                    self.push(
                        ViolationKind::Invariant,
                        &path_key(&path_index(&kf_path, i), "frame"),
                        format!("keyframe frame {} must be below duration {l}", k.frame),
                    );
                }
            }
        }
        Some(ObjectAnimation {
            object_index: object_index? as usize,
            keyframes,
        })
    }

    fn keyframe(&mut self, v: &Value, path: &str) -> Option<Keyframe> {
        let m = self.object(v, path)?;
        self.keys(m, path, &["frame", "bbox"], &[]);
        let frame = m.get("frame").and_then(|f| self.uint(f, &path_key(path, "frame")));
        let bbox = m.get("bbox").and_then(|b| self.bbox(b, &path_key(path, "bbox")));
        Some(Keyframe {
            frame: frame?,
            bbox: bbox?,
        })
    }
}

/// Containment and cross-element rules that need the fully decoded structure.
fn check_fragment(fragment: &StFragment, ctx: &ParseContext, dec: &mut Decoder) {
    match fragment {
        StFragment::Banner(banners) => check_banners(banners, &ctx.canvas, dec),
        StFragment::Mainground { foreground, .. } => check_objects(foreground, &ctx.canvas, "$.foreground", dec),
        StFragment::Animation(a) => check_animation(a, &ctx.canvas, "$", dec),
        StFragment::Full(doc) => {
            check_banners(&doc.banners, &doc.canvas, dec);
            check_objects(&doc.foreground, &doc.canvas, "$.foreground", dec);
            check_animation(&doc.animation, &doc.canvas, "$.animation", dec);
        }
    }
}

fn outside_canvas(dec: &mut Decoder, path: &str, b: &BBox, canvas: &Canvas) {
    dec.push(
        ViolationKind::Invariant,
        path,
        format!(
            "bbox {:?} lies outside the {}x{} canvas",
            b.to_array(),
            canvas.width,
            canvas.height
        ),
    );
}

fn check_banners(banners: &[Banner], canvas: &Canvas, dec: &mut Decoder) {
    let mut positions = BTreeSet::new();
    for (i, banner) in banners.iter().enumerate() {
        let path = path_index("$.banners", i);
        if !positions.insert(banner.position) {
            dec.push(
                ViolationKind::Invariant,
                &path_key(&path, "position"),
                format!("duplicate banner position {}", banner.position.as_str()),
            );
        }
        if !banner.bbox.is_within_canvas(canvas) {
            outside_canvas(dec, &path_key(&path, "bbox"), &banner.bbox, canvas);
        }
        for (j, o) in banner.objects.iter().enumerate() {
            if !o.bbox.is_within(&banner.bbox) {
                dec.push(
                    ViolationKind::Invariant,
                    &path_key(&path_index(&path_key(&path, "objects"), j), "bbox"),
                    format!(
                        "object bbox {:?} is not inside its banner bbox {:?}",
                        o.bbox.to_array(),
                        banner.bbox.to_array()
                    ),
                );
            }
        }
    }
}

fn check_objects(objects: &[LayoutObject], canvas: &Canvas, path: &str, dec: &mut Decoder) {
    for (i, o) in objects.iter().enumerate() {
        if !o.bbox.is_within_canvas(canvas) {
            outside_canvas(dec, &path_key(&path_index(path, i), "bbox"), &o.bbox, canvas);
        }
    }
}

fn check_animation(a: &Animation, canvas: &Canvas, path: &str, dec: &mut Decoder) {
    for (i, t) in a.tracks.iter().enumerate() {
        for (j, k) in t.keyframes.iter().enumerate() {
            if !k.bbox.is_within_canvas(canvas) {
                let p = format!("{path}.tracks[{i}].keyframes[{j}].bbox");
                outside_canvas(dec, &p, &k.bbox, canvas);
            }
        }
    }
}

fn path_key(parent: &str, key: &str) -> String {
    format!("{parent}.{key}")
}

fn path_index(parent: &str, i: usize) -> String {
    format!("{parent}[{i}]")
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

// ---------------------------------------------------------------------------
// Encoding

/// Canonical JSON text: keys sorted, integral numbers printed without a fraction,
/// other numbers in shortest round-trip form, two-space indentation.
pub fn serialize_st(fragment: &StFragment) -> String {
    let value = match fragment {
        StFragment::Banner(b) => banners_fragment_value(b),
        StFragment::Mainground { foreground, background } => mainground_value(foreground, background),
        StFragment::Animation(a) => animation_value(a),
        StFragment::Full(doc) => document_value(doc),
    };
    serde_json::to_string_pretty(&value).expect("serializing a JSON value cannot fail")
}

pub fn serialize_document(doc: &VideoSt) -> String {
    serde_json::to_string_pretty(&document_value(doc)).expect("serializing a JSON value cannot fail")
}

/// `{"foreground": [...]}`, the context handed to the animation stage.
pub fn serialize_foreground(objects: &[LayoutObject]) -> String {
    let mut m = Map::new();
    m.insert("foreground".into(), Value::Array(objects.iter().map(object_value).collect()));
    serde_json::to_string_pretty(&Value::Object(m)).expect("serializing a JSON value cannot fail")
}

fn num(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        Value::from(x as i64)
    } else {
        Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    }
}

fn bbox_value(b: &BBox) -> Value {
    Value::Array(b.to_array().iter().map(|&x| num(x)).collect())
}

fn object_value(o: &LayoutObject) -> Value {
    let mut m = Map::new();
    m.insert("class".into(), Value::from(o.class().as_str()));
    m.insert("bbox".into(), bbox_value(&o.bbox));
    if let ObjectKind::Text(a) = &o.kind {
        m.insert("text".into(), Value::from(a.raw_text.clone()));
        m.insert("text_color".into(), Value::from(a.text_color.to_string()));
        m.insert("textbox_color".into(), Value::from(a.textbox_color.to_string()));
    }
    Value::Object(m)
}

fn banner_value(b: &Banner) -> Value {
    let mut m = Map::new();
    m.insert("position".into(), Value::from(b.position.as_str()));
    m.insert("bbox".into(), bbox_value(&b.bbox));
    m.insert("color".into(), Value::from(b.color.to_string()));
    m.insert("objects".into(), Value::Array(b.objects.iter().map(object_value).collect()));
    Value::Object(m)
}

fn banners_value(banners: &[Banner]) -> Value {
    Value::Array(banners.iter().map(banner_value).collect())
}

fn banners_fragment_value(banners: &[Banner]) -> Value {
    let mut m = Map::new();
    m.insert("banners".into(), banners_value(banners));
    Value::Object(m)
}

fn background_value(bg: &Background) -> Value {
    let mut m = Map::new();
    match bg {
        Background::SolidColor(c) => {
            m.insert("kind".into(), Value::from("solid_color"));
            m.insert("color".into(), Value::from(c.to_string()));
        }
        Background::Image { caption } => {
            m.insert("kind".into(), Value::from("image"));
            m.insert("caption".into(), Value::from(caption.clone()));
        }
    }
    Value::Object(m)
}

fn mainground_value(fg: &[LayoutObject], bg: &Background) -> Value {
    let mut m = Map::new();
    m.insert("foreground".into(), Value::Array(fg.iter().map(object_value).collect()));
    m.insert("background".into(), background_value(bg));
    Value::Object(m)
}

fn animation_value(a: &Animation) -> Value {
    let tracks = a
        .tracks
        .iter()
        .map(|t| {
            let keyframes = t
                .keyframes
                .iter()
                .map(|k| {
                    let mut m = Map::new();
                    m.insert("frame".into(), Value::from(k.frame));
                    m.insert("bbox".into(), bbox_value(&k.bbox));
                    Value::Object(m)
                })
                .collect();
            let mut m = Map::new();
            m.insert("object_index".into(), Value::from(t.object_index));
            m.insert("keyframes".into(), Value::Array(keyframes));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("duration".into(), Value::from(a.duration));
    m.insert("tracks".into(), Value::Array(tracks));
    Value::Object(m)
}

fn document_value(doc: &VideoSt) -> Value {
    let mut m = Map::new();
    m.insert("banners".into(), banners_value(&doc.banners));
    m.insert("foreground".into(), Value::Array(doc.foreground.iter().map(object_value).collect()));
    m.insert("background".into(), background_value(&doc.background));
    m.insert("animation".into(), animation_value(&doc.animation));
    m.insert(
        "canvas".into(),
        serde_json::to_value(doc.canvas).expect("canvas serializes"),
    );
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAINGROUND: &str = r##"{
        "foreground": [
            {"class": "text", "bbox": [100, 200, 800, 120], "text": "Consult Now!",
             "text_color": "#FFFFFF", "textbox_color": "transparent"}
        ],
        "background": {"kind": "image", "caption": "a house with trees and mountains"}
    }"##;

    fn sample_doc() -> VideoSt {
        VideoSt {
            canvas: Canvas::default(),
            banners: vec![Banner {
                position: BannerPosition::Bottom,
                bbox: BBox::new(0.0, 980.0, 1920.0, 100.0),
                color: Color::rgb(0, 0, 255),
                objects: vec![LayoutObject::text(
                    BBox::new(20.0, 990.0, 600.5, 80.0),
                    "JOE's Sandwich",
                    Color::WHITE,
                    TextboxColor::Solid(Color::rgb(10, 20, 30)),
                )],
            }],
            foreground: vec![
                LayoutObject::logo(BBox::new(1700.0, 40.0, 160.0, 160.0)),
                LayoutObject::text(BBox::new(0.0, 0.0, 1920.0, 1080.0), "Healthy", Color::BLACK, TextboxColor::Transparent),
            ],
            background: Background::SolidColor(Color::rgb(0xFF, 0xEE, 0x00)),
            animation: Animation {
                duration: 50,
                tracks: vec![ObjectAnimation {
                    object_index: 1,
                    keyframes: vec![
                        Keyframe::new(0, BBox::new(0.0, 0.0, 0.0, 0.0)),
                        Keyframe::new(49, BBox::new(0.0, 0.0, 1920.0, 1080.0)),
                    ],
                }],
            },
        }
    }

    fn schema_kinds(err: &StError) -> Vec<ViolationKind> {
        err.violations().iter().map(|v| v.kind).collect()
    }

    #[test]
    fn minimal_mainground_parses() {
        let frag = parse_st(MAINGROUND, StStage::Mainground).unwrap();
        let StFragment::Mainground { foreground, background } = frag else {
            panic!("wrong fragment");
        };
        assert_eq!(foreground.len(), 1);
        assert_eq!(foreground[0].class(), ObjectClass::Text);
        assert_eq!(foreground[0].attrs().unwrap().raw_text, "Consult Now!");
        assert!(matches!(background, Background::Image { .. }));
    }

    #[test]
    fn unbalanced_brace_is_syntax_error() {
        assert!(matches!(parse_st("{", StStage::Full), Err(StError::JsonSyntax { .. })));
    }

    #[test]
    fn banners_parsed_as_animation_reports_missing_duration_first() {
        let err = parse_st(r#"{"banners": []}"#, StStage::Animation).unwrap_err();
        let v = err.violations();
        assert_eq!(v[0].kind, ViolationKind::MissingKey);
        assert_eq!(v[0].message, "missing key: duration");
        assert!(v.iter().any(|x| x.message == "unknown key: banners"));
    }

    #[test]
    fn document_round_trip_and_boundary_box() {
        let doc = sample_doc();
        let text = serialize_document(&doc);
        let back = parse_document(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.foreground[1].bbox, BBox::new(0.0, 0.0, 1920.0, 1080.0));
        // canonical text is a fixed point
        assert_eq!(serialize_document(&back), text);
    }

    #[test]
    fn key_order_does_not_change_canonical_text() {
        let a = r##"{"foreground":[],"background":{"kind":"solid_color","color":"#112233"}}"##;
        let b = r##"{"background":{"color":"#112233","kind":"solid_color"},"foreground":[]}"##;
        let fa = serialize_st(&parse_st(a, StStage::Mainground).unwrap());
        let fb = serialize_st(&parse_st(b, StStage::Mainground).unwrap());
        assert_eq!(fa, fb);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = r##"{"foreground":[],"background":{"kind":"solid_color","color":"#112233"},"extra":1}"##;
        let err = parse_st(text, StStage::Mainground).unwrap_err();
        assert_eq!(schema_kinds(&err), vec![ViolationKind::WrongHierarchy]);
        assert_eq!(err.violations()[0].path, "$");
    }

    #[test]
    fn logo_with_text_attrs_is_rejected() {
        let text = r##"{"foreground":[{"class":"logo","bbox":[0,0,1,1],"text":"x"}],
                       "background":{"kind":"solid_color","color":"#112233"}}"##;
        let err = parse_st(text, StStage::Mainground).unwrap_err();
        assert_eq!(err.violations()[0].path, "$.foreground[0]");
        assert_eq!(err.violations()[0].message, "unknown key: text");
    }

    #[test]
    fn text_without_attrs_reports_missing_keys() {
        let text = r##"{"foreground":[{"class":"text","bbox":[0,0,1,1]}],
                       "background":{"kind":"solid_color","color":"#112233"}}"##;
        let err = parse_st(text, StStage::Mainground).unwrap_err();
        assert_eq!(schema_kinds(&err), vec![ViolationKind::MissingKey; 3]);
    }

    #[test]
    fn out_of_canvas_box_is_an_invariant_breach() {
        let text = r##"{"foreground":[{"class":"logo","bbox":[1900,0,21,10]}],
                       "background":{"kind":"solid_color","color":"#112233"}}"##;
        let err = parse_st(text, StStage::Mainground).unwrap_err();
        assert_eq!(schema_kinds(&err), vec![ViolationKind::Invariant]);
        assert_eq!(err.violations()[0].path, "$.foreground[0].bbox");
        // a custom canvas admits it
        let ctx = ParseContext {
            canvas: Canvas { width: 3840, height: 2160, fps: 30 },
            foreground_len: None,
        };
        assert!(parse_st_with(text, StStage::Mainground, &ctx).is_ok());
    }

    #[test]
    fn banner_object_must_stay_inside_banner() {
        let text = r##"{"banners":[{"position":"bottom","bbox":[0,980,1920,100],"color":"#0000FF",
            "objects":[{"class":"logo","bbox":[0,970,50,50]}]}]}"##;
        let err = parse_st(text, StStage::Banner).unwrap_err();
        assert_eq!(err.violations()[0].path, "$.banners[0].objects[0].bbox");
    }

    #[test]
    fn duplicate_banner_positions_rejected() {
        let b = r##"{"position":"top_left","bbox":[0,0,10,10],"color":"#000000","objects":[]}"##;
        let text = format!(r#"{{"banners":[{b},{b}]}}"#);
        let err = parse_st(&text, StStage::Banner).unwrap_err();
        assert_eq!(err.violations()[0].path, "$.banners[1].position");
    }

    #[test]
    fn bad_enum_values_are_invariant_breaches() {
        let text = r##"{"banners":[{"position":"middle","bbox":[0,0,10,10],"color":"#000000","objects":[]}]}"##;
        let err = parse_st(text, StStage::Banner).unwrap_err();
        assert_eq!(schema_kinds(&err), vec![ViolationKind::Invariant]);
    }

    #[test]
    fn keyframe_rules() {
        let cases = [
            (r#"{"duration":10,"tracks":[{"object_index":0,"keyframes":[]}]}"#, "at least one keyframe"),
            (
                r#"{"duration":10,"tracks":[{"object_index":0,"keyframes":[{"frame":3,"bbox":[0,0,1,1]},{"frame":3,"bbox":[0,0,1,1]}]}]}"#,
                "strictly increase",
            ),
            (r#"{"duration":10,"tracks":[{"object_index":0,"keyframes":[{"frame":10,"bbox":[0,0,1,1]}]}]}"#, "below duration"),
            (r#"{"duration":10,"tracks":[{"object_index":0,"keyframes":[{"frame":2.5,"bbox":[0,0,1,1]}]}]}"#, "non-negative integer"),
            (r#"{"duration":0,"tracks":[]}"#, "at least 1 frame"),
            (
                r#"{"duration":10,"tracks":[{"object_index":0,"keyframes":[{"frame":0,"bbox":[0,0,1,1]}]},{"object_index":0,"keyframes":[{"frame":0,"bbox":[0,0,1,1]}]}]}"#,
                "duplicate track",
            ),
        ];
        for (text, needle) in cases {
            let err = parse_st(text, StStage::Animation).unwrap_err();
            assert!(
                err.violations().iter().any(|v| v.message.contains(needle)),
                "{text}: {err}"
            );
        }
    }

    #[test]
    fn track_index_checked_against_foreground() {
        let text = r#"{"duration":10,"tracks":[{"object_index":2,"keyframes":[{"frame":0,"bbox":[0,0,1,1]}]}]}"#;
        assert!(parse_st(text, StStage::Animation).is_ok());
        let ctx = ParseContext {
            foreground_len: Some(2),
            ..Default::default()
        };
        let err = parse_st_with(text, StStage::Animation, &ctx).unwrap_err();
        assert!(err.violations()[0].message.contains("out of range"));
    }

    #[test]
    fn bbox_shape_and_sign() {
        let wrong_len = r##"{"foreground":[{"class":"logo","bbox":[0,0,1]}],"background":{"kind":"solid_color","color":"#112233"}}"##;
        let err = parse_st(wrong_len, StStage::Mainground).unwrap_err();
        assert_eq!(schema_kinds(&err), vec![ViolationKind::WrongHierarchy]);
        let negative = r##"{"foreground":[{"class":"logo","bbox":[0,0,-1,1]}],"background":{"kind":"solid_color","color":"#112233"}}"##;
        let err = parse_st(negative, StStage::Mainground).unwrap_err();
        assert_eq!(schema_kinds(&err), vec![ViolationKind::Invariant]);
    }

    #[test]
    fn canvas_defaults_when_absent() {
        let text = r##"{"banners":[],"foreground":[],"background":{"kind":"solid_color","color":"#000000"},
                       "animation":{"duration":1,"tracks":[]}}"##;
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.canvas, Canvas::default());
        assert!(serialize_document(&doc).contains("\"canvas\""));
    }

    #[test]
    fn non_integral_coordinates_survive_round_trip() {
        let mut doc = sample_doc();
        doc.foreground[0].bbox = BBox::new(0.1 + 0.2, 1.0 / 3.0, 12.345678901234567, 1e-7);
        let back = parse_document(&serialize_document(&doc)).unwrap();
        assert_eq!(back, doc);
    }
}
