//! Fitting a string into a box: largest integer pixel size within 90% of the box,
//! wrapping at spaces when a single line would be smaller than 8 px.

use super::font::RasterFont;
use super::frame::PixelRect;

pub const FILL_RATIO: f64 = 0.9;
pub const WRAP_BELOW_PX: u32 = 8;
pub const MIN_PX: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedLine {
    pub text: String,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextPlan {
    pub px: u32,
    pub lines: Vec<PlacedLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("text does not fit a {width}x{height} px box at {MIN_PX} px")]
pub struct Unrenderable {
    pub width: i64,
    pub height: i64,
}

/// Largest `px` in `1..=hi` satisfying a predicate that holds for a prefix of sizes.
fn largest(hi: u32, fits: impl Fn(u32) -> bool) -> Option<u32> {
    let (mut lo, mut hi) = (1u32, hi);
    if hi == 0 || !fits(1) {
        return None;
    }
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some(lo)
}

/// Greedy word wrap; `None` when a single word is wider than `max_w`.
fn wrap(font: &RasterFont, text: &str, px: u32, max_w: f64) -> Option<Vec<String>> {
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        if f64::from(font.line_width(word, px)) > max_w {
            return None;
        }
        let candidate = if current.is_empty() {
            word.to_string()
        } else {
            format!("{current} {word}")
        };
        if f64::from(font.line_width(&candidate, px)) <= max_w {
            current = candidate;
        } else {
            lines.push(std::mem::replace(&mut current, word.to_string()));
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    Some(lines)
}

pub fn fit_text(text: &str, area: PixelRect, font: &RasterFont) -> Result<TextPlan, Unrenderable> {
    let unrenderable = Unrenderable {
        width: area.width(),
        height: area.height(),
    };
    if area.is_empty() {
        return Err(unrenderable);
    }
    let text = text.trim();
    if text.is_empty() {
        return Ok(TextPlan { px: 0, lines: vec![] });
    }
    let max_w = FILL_RATIO * area.width() as f64;
    let max_h = FILL_RATIO * area.height() as f64;
    let cap = max_h.floor() as u32;

    let single = largest(cap, |px| {
        f64::from(font.line_width(text, px)) <= max_w && f64::from(font.line_height(px)) <= max_h
    });
    let (px, lines) = match single {
        Some(px) if px >= WRAP_BELOW_PX => (px, vec![text.to_string()]),
        _ => {
            let fits = |px: u32| {
                wrap(font, text, px, max_w)
                    .filter(|l| f64::from(font.line_height(px)) * l.len() as f64 <= max_h)
            };
            // greedy wrapping is not monotone in px, so scan downward
            let best = (1..=cap).rev().find(|&px| fits(px).is_some());
            // wrapping never does worse than the single line, which it includes
            match best.or(single) {
                Some(px) if px >= MIN_PX => (px, fits(px).unwrap_or_else(|| vec![text.to_string()])),
                _ => return Err(unrenderable),
            }
        }
    };

    let line_h = i64::from(font.line_height(px));
    let top = area.y0 + (area.height() - line_h * lines.len() as i64) / 2;
    let lines = lines
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let w = i64::from(font.line_width(&t, px));
            PlacedLine {
                x: area.x0 + (area.width() - w) / 2,
                y: top + i as i64 * line_h,
                text: t,
            }
        })
        .collect();
    Ok(TextPlan { px, lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x: i64, y: i64, w: i64, h: i64) -> PixelRect {
        PixelRect { x0: x, y0: y, x1: x + w, y1: y + h }
    }

    #[test]
    fn single_glyph_centered() {
        let plan = fit_text("A", rect(0, 0, 100, 100), &RasterFont::Embedded).unwrap();
        assert_eq!(plan.px, 90);
        assert_eq!(plan.lines, vec![PlacedLine { text: "A".into(), x: 5, y: 5 }]);
    }

    #[test]
    fn width_bound() {
        // 10 chars in 200 px: 0.9 * 200 / 10 = 18
        let plan = fit_text("ABCDEFGHIJ", rect(0, 0, 200, 100), &RasterFont::Embedded).unwrap();
        assert_eq!(plan.px, 18);
        assert_eq!(plan.lines.len(), 1);
    }

    #[test]
    fn zero_area_is_unrenderable() {
        assert!(fit_text("A", rect(0, 0, 0, 10), &RasterFont::Embedded).is_err());
    }

    #[test]
    fn long_sentence_wraps() {
        let text = "the quick brown fox jumps over the lazy dog again and again";
        let plan = fit_text(text, rect(0, 0, 300, 60), &RasterFont::Embedded).unwrap();
        assert!(plan.lines.len() >= 2);
        assert!(plan.px >= WRAP_BELOW_PX);
        for l in &plan.lines {
            assert!((l.text.len() as u32 * plan.px) as f64 <= 0.9 * 300.0);
        }
        assert!(plan.lines.len() as f64 * plan.px as f64 <= 0.9 * 60.0);
    }

    #[test]
    fn tiny_box_is_unrenderable() {
        assert!(fit_text("Hello", rect(0, 0, 12, 4), &RasterFont::Embedded).is_err());
    }

    #[test]
    fn small_but_legal_single_line() {
        // one unbreakable word: 0.9 * 30 / 5 = 5.4 -> 5 px
        let plan = fit_text("Hello", rect(0, 0, 30, 30), &RasterFont::Embedded).unwrap();
        assert_eq!(plan.px, 5);
    }
}
