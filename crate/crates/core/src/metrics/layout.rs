//! Static layout metrics on final-frame boxes: Overlap and maximum IoU.

use serde::Serialize;

use crate::st::{iou, BBox, ObjectClass, VideoSt};
use crate::timeline::final_box;

/// Class counts up to this size are matched exactly; larger ones greedily.
pub const EXACT_MATCH_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapOptions {
    /// Also count objects that live inside banners.
    pub include_banner_objects: bool,
}

/// Final-frame layout elements `(class, box)` of a document.
pub fn layout_elements(doc: &VideoSt, include_banner_objects: bool) -> Vec<(ObjectClass, BBox)> {
    let mut out: Vec<(ObjectClass, BBox)> = doc
        .foreground
        .iter()
        .enumerate()
        .filter_map(|(i, o)| final_box(doc, i).map(|b| (o.class(), b)))
        .collect();
    if include_banner_objects {
        out.extend(doc.banners.iter().flat_map(|b| &b.objects).map(|o| (o.class(), o.bbox)));
    }
    out
}

pub fn overlap(doc: &VideoSt) -> f64 {
    overlap_with(doc, OverlapOptions::default())
}

/// Mean IoU over unordered element pairs; 0 with fewer than two elements.
pub fn overlap_with(doc: &VideoSt, opts: OverlapOptions) -> f64 {
    let boxes: Vec<BBox> = layout_elements(doc, opts.include_banner_objects)
        .into_iter()
        .map(|(_, b)| b)
        .collect();
    mean_pairwise_iou(&boxes)
}

pub fn mean_pairwise_iou(boxes: &[BBox]) -> f64 {
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            sum += iou(&boxes[i], &boxes[j]);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        sum / pairs as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMatch {
    pub class: ObjectClass,
    pub gen_count: usize,
    pub real_count: usize,
    pub matched_iou: f64,
    pub method: MatchMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxIouReport {
    pub value: f64,
    pub classes: Vec<ClassMatch>,
}

impl MaxIouReport {
    pub fn used_greedy(&self) -> bool {
        self.classes.iter().any(|c| c.method == MatchMethod::Greedy)
    }
}

pub fn max_iou(gen: &VideoSt, real: &VideoSt) -> f64 {
    max_iou_report(gen, real).value
}

/// Best class-consistent matching between generated and real foreground elements.
///
/// Per class, the total IoU of the best one-to-one matching is summed; the result is
/// that sum over all classes divided by `Σ_c max(gen_c, real_c)`. Both layouts empty
/// counts as perfect agreement (1.0).
pub fn max_iou_report(gen: &VideoSt, real: &VideoSt) -> MaxIouReport {
    let g = layout_elements(gen, false);
    let r = layout_elements(real, false);
    max_iou_elements(&g, &r)
}

pub fn max_iou_elements(gen: &[(ObjectClass, BBox)], real: &[(ObjectClass, BBox)]) -> MaxIouReport {
    let mut classes = Vec::new();
    let mut total = 0.0;
    let mut weight = 0usize;
    for class in ObjectClass::ALL {
        let gb: Vec<BBox> = gen.iter().filter(|(c, _)| *c == class).map(|(_, b)| *b).collect();
        let rb: Vec<BBox> = real.iter().filter(|(c, _)| *c == class).map(|(_, b)| *b).collect();
        if gb.is_empty() && rb.is_empty() {
            continue;
        }
        let matrix: Vec<Vec<f64>> = gb.iter().map(|a| rb.iter().map(|b| iou(a, b)).collect()).collect();
        let (matched, method) = if gb.len() <= EXACT_MATCH_LIMIT && rb.len() <= EXACT_MATCH_LIMIT {
            (exact_assignment(&matrix, rb.len()), MatchMethod::Exact)
        } else {
            log::warn!(
                "{} class has {}x{} elements; using greedy matching",
                class.as_str(),
                gb.len(),
                rb.len()
            );
            (greedy_assignment(&matrix, rb.len()), MatchMethod::Greedy)
        };
        total += matched;
        weight += gb.len().max(rb.len());
        classes.push(ClassMatch {
            class,
            gen_count: gb.len(),
            real_count: rb.len(),
            matched_iou: matched,
            method,
        });
    }
    let value = if weight == 0 { 1.0 } else { total / weight as f64 };
    MaxIouReport { value, classes }
}

/// Maximum total weight of a one-to-one matching (rows to columns, unmatched allowed),
/// by dynamic programming over the subset of columns already taken.
pub fn exact_assignment(matrix: &[Vec<f64>], cols: usize) -> f64 {
    assert!(cols < usize::BITS as usize);
    let full = 1usize << cols;
    // best[mask] = best total using the rows processed so far and exactly the columns in mask
    let mut best = vec![f64::NEG_INFINITY; full];
    best[0] = 0.0;
    for row in matrix {
        let mut next = best.clone(); // row left unmatched
        for mask in 0..full {
            let v = best[mask];
            if v == f64::NEG_INFINITY {
                continue;
            }
            for (c, &w) in row.iter().enumerate() {
                if mask & (1 << c) == 0 {
                    let m = mask | (1 << c);
                    if v + w > next[m] {
                        next[m] = v + w;
                    }
                }
            }
        }
        best = next;
    }
    best.into_iter().fold(0.0, f64::max)
}

/// Repeatedly takes the highest remaining IoU pair; ties break on lower row, then column.
pub fn greedy_assignment(matrix: &[Vec<f64>], cols: usize) -> f64 {
    let mut cells: Vec<(f64, usize, usize)> = matrix
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &w)| (w, i, j)))
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_used = vec![false; matrix.len()];
    let mut col_used = vec![false; cols];
    let mut total = 0.0;
    for (w, i, j) in cells {
        if w <= 0.0 {
            break;
        }
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            total += w;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::st::*;

    fn doc(objects: Vec<LayoutObject>) -> VideoSt {
        VideoSt {
            canvas: Canvas::default(),
            banners: vec![],
            foreground: objects,
            background: Background::SolidColor(Color::BLACK),
            animation: Animation {
                duration: 10,
                tracks: vec![],
            },
        }
    }

    fn text(b: [f64; 4]) -> LayoutObject {
        LayoutObject::text(BBox::from_array(b), "t", Color::WHITE, TextboxColor::Transparent)
    }

    fn logo(b: [f64; 4]) -> LayoutObject {
        LayoutObject::logo(BBox::from_array(b))
    }

    #[test]
    fn overlap_examples() {
        let a = [0.0, 0.0, 10.0, 10.0];
        let b = [50.0, 50.0, 10.0, 10.0];
        assert_eq!(overlap(&doc(vec![text(a), logo(b)])), 0.0);
        assert!((overlap(&doc(vec![text(a), logo(b), text(a)])) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(overlap(&doc(vec![text(a)])), 0.0);
        assert_eq!(overlap(&doc(vec![])), 0.0);
    }

    #[test]
    fn overlap_uses_final_frame() {
        let mut d = doc(vec![text([0.0, 0.0, 10.0, 10.0]), text([100.0, 0.0, 10.0, 10.0])]);
        d.animation.tracks.push(ObjectAnimation {
            object_index: 1,
            keyframes: vec![
                Keyframe::new(0, BBox::new(100.0, 0.0, 10.0, 10.0)),
                Keyframe::new(9, BBox::new(0.0, 0.0, 10.0, 10.0)),
            ],
        });
        assert_eq!(overlap(&d), 1.0);
    }

    #[test]
    fn banner_objects_optional() {
        let mut d = doc(vec![text([0.0, 980.0, 10.0, 10.0])]);
        d.banners.push(Banner {
            position: BannerPosition::Bottom,
            bbox: BBox::new(0.0, 980.0, 1920.0, 100.0),
            color: Color::BLACK,
            objects: vec![text([0.0, 980.0, 10.0, 10.0])],
        });
        assert_eq!(overlap(&d), 0.0);
        let opts = OverlapOptions {
            include_banner_objects: true,
        };
        assert_eq!(overlap_with(&d, opts), 1.0);
    }

    #[test]
    fn max_iou_examples() {
        let a = [0.0, 0.0, 10.0, 10.0];
        assert_eq!(max_iou(&doc(vec![text(a)]), &doc(vec![text(a)])), 1.0);
        assert_eq!(max_iou(&doc(vec![text(a)]), &doc(vec![logo(a)])), 0.0);
        assert_eq!(max_iou(&doc(vec![]), &doc(vec![])), 1.0);
    }

    #[test]
    fn swapped_matching_beats_aligned() {
        let g = doc(vec![text([0.0, 0.0, 10.0, 10.0]), text([100.0, 0.0, 10.0, 10.0])]);
        let r = doc(vec![text([100.0, 0.0, 10.0, 10.0]), text([0.0, 0.0, 10.0, 10.0])]);
        // brute force over both assignments: aligned = 0 + 0, swapped = 1 + 1
        let brute = [0.0f64 + 0.0, 1.0 + 1.0].into_iter().fold(0.0, f64::max) / 2.0;
        assert_eq!(max_iou(&g, &r), brute);
    }

    #[test]
    fn unequal_counts_divide_by_larger() {
        let a = [0.0, 0.0, 10.0, 10.0];
        let g = doc(vec![text(a)]);
        let r = doc(vec![text(a), text([500.0, 500.0, 10.0, 10.0]), logo(a)]);
        // text: 1 matched of max(1,2); logo: 0 of max(0,1)
        assert!((max_iou(&g, &r) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn greedy_can_lose_to_exact_on_two_by_two() {
        let m = vec![vec![0.6, 0.5], vec![0.5, 0.0]];
        assert_eq!(greedy_assignment(&m, 2), 0.6);
        assert_eq!(exact_assignment(&m, 2), 1.0);
    }

    #[test]
    fn large_classes_fall_back_to_greedy() {
        let objs: Vec<_> = (0..9).map(|i| text([i as f64 * 20.0, 0.0, 10.0, 10.0])).collect();
        let report = max_iou_report(&doc(objs.clone()), &doc(objs));
        assert!(report.used_greedy());
        assert_eq!(report.value, 1.0);
    }

    #[test]
    fn exact_assignment_rectangular() {
        let m = vec![vec![0.2, 0.9, 0.1]];
        assert_eq!(exact_assignment(&m, 3), 0.9);
        let tall = vec![vec![0.3], vec![0.7], vec![0.1]];
        assert_eq!(exact_assignment(&tall, 1), 0.7);
        assert_eq!(exact_assignment(&[], 0), 0.0);
    }
}
