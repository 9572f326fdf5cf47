use crate::st::{BBox, Keyframe, ObjectAnimation};
use crate::timeline::interpolate;

pub const DEFAULT_KEYFRAME_TOL: f64 = 2.0;

fn deviation(a: &BBox, b: &BBox) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Compresses a dense track (one optional box per frame) into keyframes.
///
/// Interior frames are kept while linear interpolation between the retained
/// neighbours misses the observed box by more than `tol` on any coordinate
/// (Douglas–Peucker on the Chebyshev deviation). Trailing keyframes are then dropped
/// while holding the previous keyframe still reproduces every later observation, so a
/// static track collapses to one keyframe. Missing frames are unconstrained.
pub fn compress_keyframes(object_index: usize, track: &[Option<BBox>], tol: f64) -> Option<ObjectAnimation> {
    let obs: Vec<Keyframe> = track
        .iter()
        .enumerate()
        .filter_map(|(f, b)| b.map(|b| Keyframe::new(f as u32, b)))
        .collect();
    if obs.is_empty() {
        return None;
    }
    let mut keep = vec![false; obs.len()];
    keep[0] = true;
    *keep.last_mut().unwrap() = true;
    let mut stack = vec![(0, obs.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (mut worst, mut at) = (0.0, lo);
        for k in lo + 1..hi {
            let pred = interpolate(&obs[lo], &obs[hi], obs[k].frame).expect("frames are ordered");
            let d = deviation(&pred, &obs[k].bbox);
            if d > worst {
                worst = d;
                at = k;
            }
        }
        if worst > tol {
            keep[at] = true;
            stack.push((lo, at));
            stack.push((at, hi));
        }
    }
    let mut keyframes: Vec<Keyframe> = obs.iter().zip(&keep).filter(|(_, &k)| k).map(|(o, _)| *o).collect();
    while keyframes.len() >= 2 {
        let prev = keyframes[keyframes.len() - 2];
        let holds = obs
            .iter()
            .filter(|o| o.frame >= prev.frame)
            .all(|o| deviation(&o.bbox, &prev.bbox) <= tol);
        if !holds {
            break;
        }
        keyframes.pop();
    }
    Some(ObjectAnimation {
        object_index,
        keyframes,
    })
}
