mod common;

use animlayout::maskproc::{
    compress_keyframes, extract_boxes, masks_to_animation, object_box, read_pgm, write_pgm, BoxConfig, IdMask,
    TrackState,
};
use animlayout::st::BBox;
use animlayout::timeline::expand_track;
use common::{pix_to_bbox, ref_object_box, PixBox};
use proptest::prelude::*;

const MW: usize = 64;
const MH: usize = 48;

fn rect() -> impl Strategy<Value = PixBox> {
    (0..MW - 1, 0..MH - 1).prop_flat_map(|(x1, y1)| (Just(x1), Just(y1), x1..MW, y1..MH))
}

fn grid_of(m: &IdMask) -> Vec<Vec<u32>> {
    (0..m.height).map(|y| (0..m.width).map(|x| m.get(x, y)).collect()).collect()
}

fn noisy_mask() -> impl Strategy<Value = IdMask> {
    prop::collection::vec(prop_oneof![6 => Just(0u32), 2 => Just(1u32), 1 => Just(2u32)], MW * MH)
        .prop_map(|ids| IdMask::new(MW, MH, ids).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn clean_rectangles_give_exact_bounds(r in rect(), id in 1u32..300) {
        let mut m = IdMask::blank(MW, MH);
        m.fill(r.0, r.1, r.2, r.3, id);
        let found = object_box(&m, id, &BoxConfig::default()).unwrap();
        prop_assert_eq!(found.bbox, pix_to_bbox(r));
    }

    #[test]
    fn object_box_matches_reference_on_noise(m in noisy_mask()) {
        let grid = grid_of(&m);
        for id in [1, 2] {
            let got = object_box(&m, id, &BoxConfig::default()).map(|b| b.bbox);
            let want = ref_object_box(&grid, id).map(pix_to_bbox);
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn a_stricter_size_filter_keeps_fewer_boxes(
        first in rect(), later in prop::collection::vec(rect(), 1..6), lo in 0.0f64..1.0, hi in 0.0f64..1.0,
    ) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let survivors = |factor: f64| {
            let cfg = BoxConfig { size_factor: factor, ..BoxConfig::default() };
            let mut state = TrackState::default();
            let mut kept = Vec::new();
            for (i, r) in std::iter::once(&first).chain(&later).enumerate() {
                let mut m = IdMask::blank(MW, MH);
                m.fill(r.0, r.1, r.2, r.3, 1);
                kept.push(extract_boxes(&m, &mut state, i == 0, &cfg).contains_key(&1));
            }
            kept
        };
        let (loose, strict) = (survivors(lo), survivors(hi));
        for (l, s) in loose.iter().zip(&strict) {
            prop_assert!(*l || !*s);
        }
    }

    #[test]
    fn compressed_tracks_expand_within_tolerance(
        boxes in prop::collection::vec(prop::option::weighted(0.85, common::strategies::canvas_box()), 1..40),
        tol in 0.0f64..20.0,
    ) {
        let Some(track) = compress_keyframes(0, &boxes, tol) else {
            prop_assert!(boxes.iter().all(Option::is_none));
            return Ok(());
        };
        prop_assert!(track.keyframes.len() <= boxes.iter().flatten().count());
        let expanded = expand_track(&track, boxes.len() as u32);
        for (f, b) in boxes.iter().enumerate() {
            if let Some(b) = b {
                let e = expanded.boxes[f].expect("observed frames stay visible");
                let d = b.to_array().iter().zip(e.to_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                prop_assert!(d <= tol + 1e-9, "frame {f}: {d} > {tol}");
            }
        }
    }

    #[test]
    fn static_scenes_do_not_depend_on_frame_order(rects in prop::collection::vec(rect(), 1..4), frames in 1usize..8) {
        let mut m = IdMask::blank(MW, MH);
        for (i, r) in rects.iter().enumerate() {
            m.fill(r.0, r.1, r.2, r.3, i as u32 + 1);
        }
        let masks = vec![m; frames];
        let cfg = BoxConfig::default();
        let anim = masks_to_animation(&masks, None, &cfg, 2.0).unwrap();
        for t in &anim.tracks {
            prop_assert_eq!(t.keyframes.len(), 1);
            prop_assert_eq!(t.keyframes[0].frame, 0);
        }
        let mut reversed = masks.clone();
        reversed.reverse();
        prop_assert_eq!(masks_to_animation(&reversed, None, &cfg, 2.0).unwrap(), anim);
    }

    #[test]
    fn pgm_round_trips(m in noisy_mask(), wide in any::<bool>()) {
        let mut m = m;
        if wide {
            m.set(0, 0, 4000);
        }
        let bytes = write_pgm(&m).unwrap();
        prop_assert_eq!(read_pgm(&bytes).unwrap(), m);
    }
}

#[test]
fn clean_rectangle_on_full_canvas_edge() {
    let mut m = IdMask::blank(MW, MH);
    m.fill(0, 0, MW - 1, MH - 1, 9);
    assert_eq!(object_box(&m, 9, &BoxConfig::default()).unwrap().bbox, BBox::new(0.0, 0.0, MW as f64, MH as f64));
}
