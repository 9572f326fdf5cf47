//! Robust bounding boxes from per-frame object-id masks.
//!
//! For every object id the vertical extent is found by scanning for the first empty
//! (all-zero) row from the top and from the bottom. A scan that hits an empty row
//! early (top-down above 70% of the extent, bottom-up below 30%) is suspicious; when
//! both scans are suspicious and the middle row has content, the extent is rescanned
//! outward from the middle instead. Horizontal bounds come from the vertically cropped
//! rows, then two refinement orders (columns-then-rows and rows-then-columns) shave off
//! boundary lines whose active fraction is below 50%, keeping the larger result.
//! Boxes smaller than 20% of the object's area on the first processed frame are
//! dropped.

use std::collections::{BTreeMap, BTreeSet};

use crate::st::BBox;

use super::IdMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxConfig {
    /// Top-down scan is early when its empty row sits above this fraction of the extent.
    pub top_down_early_stop: f64,
    /// Bottom-up scan is early when its empty row sits below this fraction of the extent.
    pub bottom_up_early_stop: f64,
    /// Boundary lines with an active fraction below this are trimmed.
    pub refine_ratio: f64,
    /// Minimum area relative to the first-frame area for a box to survive.
    pub size_factor: f64,
    /// Empty-row runs up to this fraction of the extent (at least one row) are bridged
    /// by the middle-out rescan.
    pub middle_gap_ratio: f64,
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self {
            top_down_early_stop: 0.7,
            bottom_up_early_stop: 0.3,
            refine_ratio: 0.5,
            size_factor: 0.2,
            middle_gap_ratio: 0.05,
        }
    }
}

/// Which vertical-bounds rule produced a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanBranch {
    TopDown,
    BottomUp,
    FromMiddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectBox {
    pub bbox: BBox,
    pub branch: ScanBranch,
    pub early_top_down: bool,
    pub early_bottom_up: bool,
}

impl ObjectBox {
    pub fn area(&self) -> f64 {
        self.bbox.area()
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    x1: usize,
    y1: usize,
    x2: usize,
    y2: usize,
}

impl Rect {
    fn area(&self) -> usize {
        (self.x2 - self.x1 + 1) * (self.y2 - self.y1 + 1)
    }
}

struct ObjectMask<'a> {
    mask: &'a IdMask,
    id: u32,
}

impl ObjectMask<'_> {
    fn at(&self, x: usize, y: usize) -> bool {
        self.mask.get(x, y) == self.id
    }

    fn row_count(&self, y: usize, x1: usize, x2: usize) -> usize {
        (x1..=x2).filter(|&x| self.at(x, y)).count()
    }

    fn col_count(&self, x: usize, y1: usize, y2: usize) -> usize {
        (y1..=y2).filter(|&y| self.at(x, y)).count()
    }

    fn refine_cols(&self, r: &mut Rect, ratio: f64) {
        let height = (r.y2 - r.y1 + 1) as f64;
        while r.x1 < r.x2 && (self.col_count(r.x1, r.y1, r.y2) as f64) < ratio * height {
            r.x1 += 1;
        }
        while r.x2 > r.x1 && (self.col_count(r.x2, r.y1, r.y2) as f64) < ratio * height {
            r.x2 -= 1;
        }
    }

    fn refine_rows(&self, r: &mut Rect, ratio: f64) {
        let width = (r.x2 - r.x1 + 1) as f64;
        while r.y1 < r.y2 && (self.row_count(r.y1, r.x1, r.x2) as f64) < ratio * width {
            r.y1 += 1;
        }
        while r.y2 > r.y1 && (self.row_count(r.y2, r.x1, r.x2) as f64) < ratio * width {
            r.y2 -= 1;
        }
    }
}

/// Box for one object id, or `None` if the id has no pixels.
pub fn object_box(mask: &IdMask, id: u32, cfg: &BoxConfig) -> Option<ObjectBox> {
    let obj = ObjectMask { mask, id };
    let last_col = mask.width.checked_sub(1)?;
    // full-width active counts per row
    let rows: Vec<usize> = (0..mask.height).map(|y| obj.row_count(y, 0, last_col)).collect();
    let y_min = rows.iter().position(|&c| c > 0)?;
    let y_max = rows.iter().rposition(|&c| c > 0)?;
    let extent = (y_max - y_min) as f64;
    let rel = |y: usize| if extent > 0.0 { (y - y_min) as f64 / extent } else { 0.0 };

    let td_empty = (y_min + 1..y_max).find(|&y| rows[y] == 0);
    let (td, early_td) = match td_empty {
        Some(e) => ((y_min, e - 1), rel(e) < cfg.top_down_early_stop),
        None => ((y_min, y_max), false),
    };
    let bu_empty = (y_min + 1..y_max).rev().find(|&y| rows[y] == 0);
    let (bu, early_bu) = match bu_empty {
        Some(e) => ((e + 1, y_max), rel(e) > cfg.bottom_up_early_stop),
        None => ((y_min, y_max), false),
    };

    let y_mid = (y_min + y_max) / 2;
    let ((y1, y2), branch) = if early_td && early_bu && rows[y_mid] > 0 {
        let gap = ((cfg.middle_gap_ratio * (extent + 1.0)).floor() as usize).max(1);
        (scan_from_middle(&rows, y_mid, y_min, y_max, gap), ScanBranch::FromMiddle)
    } else if bu.1 - bu.0 > td.1 - td.0 {
        (bu, ScanBranch::BottomUp)
    } else {
        (td, ScanBranch::TopDown)
    };
    log::debug!("object {id}: rows {y1}..={y2} via {branch:?} (early td={early_td}, bu={early_bu})");

    let (mut x1, mut x2) = (usize::MAX, 0);
    for y in y1..=y2 {
        for x in 0..mask.width {
            if obj.at(x, y) {
                x1 = x1.min(x);
                x2 = x2.max(x);
            }
        }
    }
    if x1 == usize::MAX {
        return None;
    }

    let start = Rect { x1, y1, x2, y2 };
    let mut xy = start;
    obj.refine_cols(&mut xy, cfg.refine_ratio);
    obj.refine_rows(&mut xy, cfg.refine_ratio);
    let mut yx = start;
    obj.refine_rows(&mut yx, cfg.refine_ratio);
    obj.refine_cols(&mut yx, cfg.refine_ratio);
    let r = if yx.area() > xy.area() { yx } else { xy };

    Some(ObjectBox {
        bbox: BBox::new(
            r.x1 as f64,
            r.y1 as f64,
            (r.x2 - r.x1 + 1) as f64,
            (r.y2 - r.y1 + 1) as f64,
        ),
        branch,
        early_top_down: early_td,
        early_bottom_up: early_bu,
    })
}

/// Grows outward from `mid` through content rows, bridging empty runs of at most `gap` rows.
fn scan_from_middle(rows: &[usize], mid: usize, y_min: usize, y_max: usize, gap: usize) -> (usize, usize) {
    let mut top = mid;
    let mut run = 0;
    for y in (y_min..mid).rev() {
        if rows[y] > 0 {
            top = y;
            run = 0;
        } else {
            run += 1;
            if run > gap {
                break;
            }
        }
    }
    let mut bottom = mid;
    run = 0;
    for (y, &count) in rows.iter().enumerate().take(y_max + 1).skip(mid + 1) {
        if count > 0 {
            bottom = y;
            run = 0;
        } else {
            run += 1;
            if run > gap {
                break;
            }
        }
    }
    (top, bottom)
}

/// Per-object history carried across frames.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackState {
    /// Reference area per object, recorded on the first processed frame.
    pub max_values: BTreeMap<u32, f64>,
    /// Surviving box per object for every processed frame, in processing order.
    pub boxes_by_frame: BTreeMap<u32, Vec<Option<BBox>>>,
    pub frames_processed: usize,
}

/// Boxes for every object id in `mask`, updating `state`.
pub fn extract_boxes(mask: &IdMask, state: &mut TrackState, is_first: bool, cfg: &BoxConfig) -> BTreeMap<u32, BBox> {
    let ids: BTreeSet<u32> = mask.ids.iter().copied().filter(|&v| v != 0).collect();
    let mut out = BTreeMap::new();
    for id in ids {
        let Some(found) = object_box(mask, id, cfg) else { continue };
        let area = found.area();
        let max_value = if is_first {
            0.0
        } else {
            state.max_values.get(&id).copied().unwrap_or(0.0)
        };
        if is_first || area >= cfg.size_factor * max_value {
            out.insert(id, found.bbox);
            if is_first {
                let slot = state.max_values.entry(id).or_insert(0.0);
                *slot = slot.max(area);
            }
        } else {
            log::debug!("object {id}: dropped box of area {area} (< {} x {max_value})", cfg.size_factor);
        }
    }
    let processed = state.frames_processed;
    for id in out.keys() {
        state
            .boxes_by_frame
            .entry(*id)
            .or_insert_with(|| vec![None; processed]);
    }
    for (id, frames) in state.boxes_by_frame.iter_mut() {
        frames.push(out.get(id).copied());
    }
    state.frames_processed += 1;
    out
}
