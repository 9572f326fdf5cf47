//! Binary-coverage glyph rasterization.

use std::path::PathBuf;

use font8x8::UnicodeFonts;

use super::frame::{Frame, PixelRect};
use super::RenderError;
use crate::st::Color;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FontSource {
    /// Built-in 8×8 bitmap font, nearest-neighbour scaled.
    #[default]
    Embedded,
    /// TrueType/OpenType file; coverage ≥ 50% counts as ink.
    File(PathBuf),
}

pub enum RasterFont {
    Embedded,
    Outline(Box<fontdue::Font>),
}

impl std::fmt::Debug for RasterFont {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RasterFont::Embedded => f.write_str("RasterFont::Embedded"),
            RasterFont::Outline(_) => f.write_str("RasterFont::Outline"),
        }
    }
}

fn bitmap_glyph(c: char) -> [u8; 8] {
    font8x8::BASIC_FONTS
        .get(c)
        .or_else(|| font8x8::LATIN_FONTS.get(c))
        .or_else(|| font8x8::GREEK_FONTS.get(c))
        .or_else(|| font8x8::MISC_FONTS.get(c))
        .or_else(|| font8x8::BOX_FONTS.get(c))
        .or_else(|| font8x8::BASIC_FONTS.get('?'))
        .unwrap_or([0; 8])
}

impl RasterFont {
    pub fn load(source: &FontSource) -> Result<Self, RenderError> {
        match source {
            FontSource::Embedded => Ok(RasterFont::Embedded),
            FontSource::File(path) => {
                let bytes = std::fs::read(path).map_err(|e| RenderError::Font(format!("{}: {e}", path.display())))?;
                let font = fontdue::Font::from_bytes(bytes, fontdue::FontSettings::default())
                    .map_err(|e| RenderError::Font(format!("{}: {e}", path.display())))?;
                Ok(RasterFont::Outline(Box::new(font)))
            }
        }
    }

    /// Ink width of a single line at `px`.
    pub fn line_width(&self, text: &str, px: u32) -> u32 {
        match self {
            RasterFont::Embedded => text.chars().count() as u32 * px,
            RasterFont::Outline(font) => {
                let w: f32 = text.chars().map(|c| font.metrics(c, px as f32).advance_width).sum();
                w.ceil() as u32
            }
        }
    }

    pub fn line_height(&self, px: u32) -> u32 {
        match self {
            RasterFont::Embedded => px,
            RasterFont::Outline(font) => match font.horizontal_line_metrics(px as f32) {
                Some(m) => (m.ascent - m.descent).ceil() as u32,
                None => px,
            },
        }
    }

    /// Draws one line with its top-left corner at `(x, y)`, writing only inside `clip`.
    pub fn draw_line(&self, frame: &mut Frame, text: &str, px: u32, x: i64, y: i64, clip: PixelRect, color: Color) {
        let mut plot = |gx: i64, gy: i64| {
            if clip.contains(gx, gy) {
                frame.put(gx, gy, color);
            }
        };
        match self {
            RasterFont::Embedded => {
                let px = i64::from(px);
                for (n, c) in text.chars().enumerate() {
                    let glyph = bitmap_glyph(c);
                    let left = x + n as i64 * px;
                    for j in 0..px {
                        let row = glyph[(j * 8 / px) as usize];
                        if row == 0 {
                            continue;
                        }
                        for i in 0..px {
                            if row & (1 << (i * 8 / px)) != 0 {
                                plot(left + i, y + j);
                            }
                        }
                    }
                }
            }
            RasterFont::Outline(font) => {
                let size = px as f32;
                let ascent = font.horizontal_line_metrics(size).map_or(size, |m| m.ascent);
                let baseline = y + ascent.round() as i64;
                let mut pen = x as f32;
                for c in text.chars() {
                    let (m, coverage) = font.rasterize(c, size);
                    let gx0 = pen.round() as i64 + i64::from(m.xmin);
                    let gy0 = baseline - i64::from(m.ymin) - m.height as i64;
                    for (k, &v) in coverage.iter().enumerate() {
                        if v >= 128 {
                            plot(gx0 + (k % m.width) as i64, gy0 + (k / m.width) as i64);
                        }
                    }
                    pen += m.advance_width;
                }
            }
        }
    }
}
