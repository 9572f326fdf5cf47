//! Independent oracles and fixture builders shared by the integration and acceptance
//! tests. Nothing here calls into the code under test except for plain data types.

#![allow(dead_code)]

use std::collections::BTreeMap;

use animlayout::st::{
    Animation, BBox, Background, Banner, BannerPosition, Canvas, Color, Keyframe, LayoutObject, ObjectAnimation,
    ObjectClass, TextboxColor, VideoSt,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Geometry and layout metrics

/// IoU of `[x1, y1, w, h]` boxes via explicit corner arithmetic.
pub fn ref_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let left = a[0].max(b[0]);
    let right = (a[0] + a[2]).min(b[0] + b[2]);
    let top = a[1].max(b[1]);
    let bottom = (a[1] + a[3]).min(b[1] + b[3]);
    let inter = if right > left && bottom > top { (right - left) * (bottom - top) } else { 0.0 };
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Mean IoU over every unordered pair, enumerated in index order.
pub fn brute_overlap(boxes: &[[f64; 4]]) -> f64 {
    let mut total = 0.0;
    let mut count = 0u32;
    for i in 0..boxes.len() {
        for j in (i + 1)..boxes.len() {
            total += ref_iou(boxes[i], boxes[j]);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / f64::from(count)
    }
}

/// Best total IoU over every partial injective assignment of `gen` into `real`.
fn best_assignment(gen: &[[f64; 4]], real: &[[f64; 4]], used: &mut Vec<bool>) -> f64 {
    let Some((first, rest)) = gen.split_first() else { return 0.0 };
    // leave `first` unmatched
    let mut best = best_assignment(rest, real, used);
    for j in 0..real.len() {
        if !used[j] {
            used[j] = true;
            let v = ref_iou(*first, real[j]) + best_assignment(rest, real, used);
            used[j] = false;
            best = best.max(v);
        }
    }
    best
}

/// Class-consistent maximum IoU: summed per-class optimal matching over the summed
/// per-class `max(|gen|, |real|)`; empty against empty is 1.
pub fn brute_max_iou(gen: &[(ObjectClass, [f64; 4])], real: &[(ObjectClass, [f64; 4])]) -> f64 {
    let mut classes: Vec<ObjectClass> = gen.iter().chain(real).map(|(c, _)| *c).collect();
    classes.sort_by_key(|c| c.as_str());
    classes.dedup();
    let mut total = 0.0;
    let mut weight = 0usize;
    for class in classes {
        let g: Vec<[f64; 4]> = gen.iter().filter(|(c, _)| *c == class).map(|(_, b)| *b).collect();
        let r: Vec<[f64; 4]> = real.iter().filter(|(c, _)| *c == class).map(|(_, b)| *b).collect();
        total += best_assignment(&g, &r, &mut vec![false; r.len()]);
        weight += g.len().max(r.len());
    }
    if weight == 0 {
        1.0
    } else {
        total / weight as f64
    }
}

// ---------------------------------------------------------------------------
// Fréchet distance between diagonal Gaussians

pub fn diag_frechet(mu_r: [f64; 4], var_r: [f64; 4], mu_g: [f64; 4], var_g: [f64; 4]) -> f64 {
    (0..4)
        .map(|i| (mu_r[i] - mu_g[i]).powi(2) + (var_r[i].sqrt() - var_g[i].sqrt()).powi(2))
        .sum()
}

// ---------------------------------------------------------------------------
// Keyframe expansion

/// Box at `frame` for keyframes sorted by frame: hidden before the first, linear in
/// between, held after the last.
pub fn ref_box_at(keys: &[(u32, [f64; 4])], frame: u32) -> Option<[f64; 4]> {
    let first = keys.first()?;
    if frame < first.0 {
        return None;
    }
    for w in keys.windows(2) {
        let ((f0, b0), (f1, b1)) = (w[0], w[1]);
        if frame >= f0 && frame <= f1 {
            let t = f64::from(frame - f0) / f64::from(f1 - f0);
            return Some(std::array::from_fn(|i| b0[i] + (b1[i] - b0[i]) * t));
        }
    }
    Some(keys.last()?.1)
}

// ---------------------------------------------------------------------------
// Mask box extraction, written directly from the algorithm description

pub const TOP_DOWN_EARLY: f64 = 0.7;
pub const BOTTOM_UP_EARLY: f64 = 0.3;
pub const REFINE_RATIO: f64 = 0.5;
pub const SIZE_FACTOR: f64 = 0.2;
pub const MIDDLE_GAP: f64 = 0.05;

/// Inclusive pixel bounds `(x1, y1, x2, y2)`.
pub type PixBox = (usize, usize, usize, usize);

pub fn pix_area(b: PixBox) -> usize {
    (b.2 - b.0 + 1) * (b.3 - b.1 + 1)
}

pub fn pix_to_bbox(b: PixBox) -> BBox {
    BBox::new(b.0 as f64, b.1 as f64, (b.2 - b.0 + 1) as f64, (b.3 - b.1 + 1) as f64)
}

/// Unfiltered box for `id` in a row-major grid.
pub fn ref_object_box(grid: &[Vec<u32>], id: u32) -> Option<PixBox> {
    let height = grid.len();
    let width = grid.first()?.len();
    let on = |x: usize, y: usize| grid[y][x] == id;
    let row_has = |y: usize| (0..width).any(|x| on(x, y));

    let top = (0..height).find(|&y| row_has(y))?;
    let bottom = (0..height).rev().find(|&y| row_has(y))?;
    let extent = (bottom - top) as f64;
    let frac = |y: usize| (y - top) as f64 / extent;

    // scan down from the top for the first empty row
    let mut td = (top, bottom);
    let mut td_early = false;
    let mut y = top + 1;
    while y < bottom {
        if !row_has(y) {
            td = (top, y - 1);
            td_early = frac(y) < TOP_DOWN_EARLY;
            break;
        }
        y += 1;
    }
    // scan up from the bottom
    let mut bu = (top, bottom);
    let mut bu_early = false;
    let mut y = bottom - 1;
    while y > top {
        if !row_has(y) {
            bu = (y + 1, bottom);
            bu_early = frac(y) > BOTTOM_UP_EARLY;
            break;
        }
        y -= 1;
    }

    let mid = (top + bottom) / 2;
    let (y1, y2) = if td_early && bu_early && row_has(mid) {
        let allowed = ((MIDDLE_GAP * (extent + 1.0)).floor() as usize).max(1);
        let mut up = mid;
        let mut empties = 0;
        let mut y = mid;
        while y > top {
            y -= 1;
            if row_has(y) {
                up = y;
                empties = 0;
            } else {
                empties += 1;
                if empties > allowed {
                    break;
                }
            }
        }
        let mut down = mid;
        empties = 0;
        let mut y = mid;
        while y < bottom {
            y += 1;
            if row_has(y) {
                down = y;
                empties = 0;
            } else {
                empties += 1;
                if empties > allowed {
                    break;
                }
            }
        }
        (up, down)
    } else if bu.1 - bu.0 > td.1 - td.0 {
        bu
    } else {
        td
    };

    let cols: Vec<usize> = (0..width).filter(|&x| (y1..=y2).any(|y| on(x, y))).collect();
    let start = (*cols.first()?, y1, *cols.last()?, y2);

    let col_frac = |b: PixBox, x: usize| (b.1..=b.3).filter(|&y| on(x, y)).count() as f64 / (b.3 - b.1 + 1) as f64;
    let row_frac = |b: PixBox, y: usize| (b.0..=b.2).filter(|&x| on(x, y)).count() as f64 / (b.2 - b.0 + 1) as f64;
    let trim_x = |mut b: PixBox| {
        while b.0 < b.2 && col_frac(b, b.0) < REFINE_RATIO {
            b.0 += 1;
        }
        while b.2 > b.0 && col_frac(b, b.2) < REFINE_RATIO {
            b.2 -= 1;
        }
        b
    };
    let trim_y = |mut b: PixBox| {
        while b.1 < b.3 && row_frac(b, b.1) < REFINE_RATIO {
            b.1 += 1;
        }
        while b.3 > b.1 && row_frac(b, b.3) < REFINE_RATIO {
            b.3 -= 1;
        }
        b
    };
    let xy = trim_y(trim_x(start));
    let yx = trim_x(trim_y(start));
    Some(if pix_area(yx) > pix_area(xy) { yx } else { xy })
}

/// Reference per-frame extraction with the first-frame size filter.
#[derive(Debug, Default)]
pub struct RefExtractor {
    pub reference_area: BTreeMap<u32, usize>,
    pub dropped: Vec<(u32, usize, usize)>,
}

impl RefExtractor {
    /// Surviving boxes; dropped `(id, area, reference)` triples are appended to `dropped`.
    pub fn frame(&mut self, grid: &[Vec<u32>], is_first: bool) -> BTreeMap<u32, PixBox> {
        let mut ids: Vec<u32> = grid.iter().flatten().copied().filter(|&v| v != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut out = BTreeMap::new();
        for id in ids {
            let Some(b) = ref_object_box(grid, id) else { continue };
            let area = pix_area(b);
            if is_first {
                self.reference_area.insert(id, area);
                out.insert(id, b);
                continue;
            }
            let reference = self.reference_area.get(&id).copied().unwrap_or(0);
            if area as f64 >= SIZE_FACTOR * reference as f64 {
                out.insert(id, b);
            } else {
                self.dropped.push((id, area, reference));
            }
        }
        out
    }
}

pub fn blank_grid(width: usize, height: usize) -> Vec<Vec<u32>> {
    vec![vec![0; width]; height]
}

pub fn paint(grid: &mut [Vec<u32>], b: PixBox, id: u32) {
    for row in grid.iter_mut().take(b.3 + 1).skip(b.1) {
        for cell in row.iter_mut().take(b.2 + 1).skip(b.0) {
            *cell = id;
        }
    }
}

// ---------------------------------------------------------------------------
// Document builders

pub fn solid_doc(canvas: Canvas, duration: u32, foreground: Vec<LayoutObject>, tracks: Vec<ObjectAnimation>) -> VideoSt {
    VideoSt {
        canvas,
        banners: vec![],
        foreground,
        background: Background::SolidColor(Color::rgb(240, 240, 240)),
        animation: Animation { duration, tracks },
    }
}

pub fn text_object(bbox: BBox, text: &str) -> LayoutObject {
    LayoutObject::text(bbox, text, Color::BLACK, TextboxColor::Transparent)
}

pub fn bottom_banner(canvas: Canvas, color: Color) -> Banner {
    let h = 100.0;
    Banner {
        position: BannerPosition::Bottom,
        bbox: BBox::new(0.0, f64::from(canvas.height) - h, f64::from(canvas.width), h),
        color,
        objects: vec![],
    }
}

/// Random integer-aligned box inside `canvas` with sides of at least `min_side`.
pub fn random_box(rng: &mut impl Rng, canvas: Canvas, min_side: u32) -> BBox {
    let w = rng.random_range(min_side..=canvas.width / 2);
    let h = rng.random_range(min_side..=canvas.height / 2);
    let x = rng.random_range(0..=canvas.width - w);
    let y = rng.random_range(0..=canvas.height - h);
    BBox::new(f64::from(x), f64::from(y), f64::from(w), f64::from(h))
}

pub fn track(object_index: usize, keys: &[(u32, BBox)]) -> ObjectAnimation {
    ObjectAnimation {
        object_index,
        keyframes: keys.iter().map(|&(f, b)| Keyframe::new(f, b)).collect(),
    }
}

pub mod strategies;
