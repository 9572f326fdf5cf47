use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Axis-aligned box `[x1, y1, w, h]` in canvas pixels, `(x1, y1)` being the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x1: f64, y1: f64, w: f64, h: f64) -> Self {
        Self { x1, y1, w, h }
    }

    pub fn x2(&self) -> f64 {
        self.x1 + self.w
    }

    pub fn y2(&self) -> f64 {
        self.y1 + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.w, self.h]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Finite fields and non-negative size.
    pub fn is_well_formed(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite()) && self.w >= 0.0 && self.h >= 0.0
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let iw = self.x2().min(other.x2()) - self.x1.max(other.x1);
        let ih = self.y2().min(other.y2()) - self.y1.max(other.y1);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }

    /// True when `self` lies fully inside `outer` (no tolerance).
    pub fn is_within(&self, outer: &BBox) -> bool {
        self.x1 >= outer.x1
            && self.y1 >= outer.y1
            && self.x2() <= outer.x2()
            && self.y2() <= outer.y2()
    }

    pub fn is_within_canvas(&self, canvas: &Canvas) -> bool {
        self.x1 >= 0.0
            && self.y1 >= 0.0
            && self.x2() <= f64::from(canvas.width)
            && self.y2() <= f64::from(canvas.height)
    }

    pub fn scaled(&self, sx: f64, sy: f64) -> BBox {
        BBox::new(self.x1 * sx, self.y1 * sy, self.w * sx, self.h * sy)
    }
}

/// Intersection over union. Zero-area unions yield 0.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const BLACK: Color = Color::rgb(0, 0, 0);
    pub const WHITE: Color = Color::rgb(255, 255, 255);
    pub const MID_GRAY: Color = Color::rgb(0x80, 0x80, 0x80);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn to_array(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expected a 7-character \"#RRGGBB\" color, got {0:?}")]
pub struct ColorParseError(pub String);

impl FromStr for Color {
    type Err = ColorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ColorParseError(s.to_string());
        let hex = s.strip_prefix('#').ok_or_else(err)?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| err());
        Ok(Color::rgb(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TextboxColor {
    Solid(Color),
    Transparent,
}

impl fmt::Display for TextboxColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextboxColor::Solid(c) => c.fmt(f),
            TextboxColor::Transparent => f.write_str("transparent"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Text,
    Logo,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 2] = [ObjectClass::Text, ObjectClass::Logo];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Text => "text",
            ObjectClass::Logo => "logo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextAttrs {
    pub raw_text: String,
    pub text_color: Color,
    pub textbox_color: TextboxColor,
}

/// Class-specific payload of a layout object. Text carries its attributes; logos carry none.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectKind {
    Text(TextAttrs),
    Logo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutObject {
    pub bbox: BBox,
    pub kind: ObjectKind,
}

impl LayoutObject {
    pub fn text(bbox: BBox, raw_text: impl Into<String>, text_color: Color, textbox_color: TextboxColor) -> Self {
        Self {
            bbox,
            kind: ObjectKind::Text(TextAttrs {
                raw_text: raw_text.into(),
                text_color,
                textbox_color,
            }),
        }
    }

    pub fn logo(bbox: BBox) -> Self {
        Self { bbox, kind: ObjectKind::Logo }
    }

    pub fn class(&self) -> ObjectClass {
        match self.kind {
            ObjectKind::Text(_) => ObjectClass::Text,
            ObjectKind::Logo => ObjectClass::Logo,
        }
    }

    pub fn attrs(&self) -> Option<&TextAttrs> {
        match &self.kind {
            ObjectKind::Text(a) => Some(a),
            ObjectKind::Logo => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BannerPosition {
    Bottom,
    TopLeft,
    TopRight,
}

impl BannerPosition {
    pub const ALL: [BannerPosition; 3] = [BannerPosition::Bottom, BannerPosition::TopLeft, BannerPosition::TopRight];

    pub fn as_str(self) -> &'static str {
        match self {
            BannerPosition::Bottom => "bottom",
            BannerPosition::TopLeft => "top_left",
            BannerPosition::TopRight => "top_right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Banner {
    pub position: BannerPosition,
    pub bbox: BBox,
    pub color: Color,
    pub objects: Vec<LayoutObject>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Background {
    SolidColor(Color),
    Image { caption: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub frame: u32,
    pub bbox: BBox,
}

impl Keyframe {
    pub const fn new(frame: u32, bbox: BBox) -> Self {
        Self { frame, bbox }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectAnimation {
    pub object_index: usize,
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Animation {
    /// Total duration in frames.
    pub duration: u32,
    pub tracks: Vec<ObjectAnimation>,
}

impl Animation {
    pub fn track_for(&self, object_index: usize) -> Option<&ObjectAnimation> {
        self.tracks.iter().find(|t| t.object_index == object_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pub fps: u32,
}

impl Default for Canvas {
    fn default() -> Self {
        Self { width: 1920, height: 1080, fps: 30 }
    }
}

/// A complete animated layout: banners, foreground, background and animation on a canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSt {
    pub canvas: Canvas,
    pub banners: Vec<Banner>,
    pub foreground: Vec<LayoutObject>,
    pub background: Background,
    pub animation: Animation,
}

/// Which part of the document a piece of text encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StStage {
    Banner,
    Mainground,
    Animation,
    Full,
}

impl StStage {
    pub fn as_str(self) -> &'static str {
        match self {
            StStage::Banner => "banner",
            StStage::Mainground => "mainground",
            StStage::Animation => "animation",
            StStage::Full => "full",
        }
    }
}

impl fmt::Display for StStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Decoded output of one generation stage, or a full document.
#[derive(Debug, Clone, PartialEq)]
pub enum StFragment {
    Banner(Vec<Banner>),
    Mainground {
        foreground: Vec<LayoutObject>,
        background: Background,
    },
    Animation(Animation),
    Full(VideoSt),
}

impl StFragment {
    pub fn stage(&self) -> StStage {
        match self {
            StFragment::Banner(_) => StStage::Banner,
            StFragment::Mainground { .. } => StStage::Mainground,
            StFragment::Animation(_) => StStage::Animation,
            StFragment::Full(_) => StStage::Full,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_examples() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&BBox::new(0.0, 0.0, 1.0, 1.0), &BBox::new(5.0, 5.0, 1.0, 1.0)), 0.0);
        // intersection 2, union 6
        let b = BBox::new(1.0, 0.0, 2.0, 2.0);
        assert!((iou(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iou_zero_area() {
        let z = BBox::new(1.0, 1.0, 0.0, 5.0);
        assert_eq!(iou(&z, &z), 0.0);
        assert_eq!(iou(&z, &BBox::new(0.0, 0.0, 3.0, 3.0)), 0.0);
    }

    #[test]
    fn touching_boxes_do_not_intersect() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        let b = BBox::new(2.0, 0.0, 2.0, 2.0);
        assert_eq!(a.intersection_area(&b), 0.0);
    }

    #[test]
    fn color_round_trip() {
        let c: Color = "#0a1BfF".parse().unwrap();
        assert_eq!(c, Color::rgb(0x0a, 0x1b, 0xff));
        assert_eq!(c.to_string(), "#0A1BFF");
        for bad in ["0A1BFF", "#0A1BF", "#0A1BFFF", "#GG0000", "", "#+1+1+1"] {
            assert!(bad.parse::<Color>().is_err(), "{bad}");
        }
    }

    #[test]
    fn banner_position_names() {
        for p in BannerPosition::ALL {
            assert_eq!(BannerPosition::parse(p.as_str()), Some(p));
        }
        assert_eq!(BannerPosition::parse("top-left"), None);
    }
}
