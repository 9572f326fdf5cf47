//! Keyframe expansion into per-frame boxes.
//!
//! Between keyframes boxes move linearly. Before the first keyframe an object is
//! hidden; after the last one it holds its final box until the end of the clip.
//! Foreground objects without a track are static for the whole clip.

use crate::st::{BBox, Keyframe, ObjectAnimation, VideoSt};

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrack {
    pub object_index: usize,
    /// One entry per frame `0..duration`; `None` while the object is hidden.
    pub boxes: Vec<Option<BBox>>,
}

impl FrameTrack {
    pub fn first_visible(&self) -> Option<(usize, BBox)> {
        self.boxes.iter().enumerate().find_map(|(f, b)| b.map(|b| (f, b)))
    }

    pub fn last(&self) -> Option<BBox> {
        self.boxes.last().copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimelineError {
    #[error("frame {frame} outside keyframe span [{start}, {end}]")]
    FrameOutOfRange { frame: u32, start: u32, end: u32 },
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = a + (b - a) * t;
    v.clamp(a.min(b), a.max(b))
}

/// Box at `frame` on the segment between two keyframes.
pub fn interpolate(k0: &Keyframe, k1: &Keyframe, frame: u32) -> Result<BBox, TimelineError> {
    if k0.frame >= k1.frame || frame < k0.frame || frame > k1.frame {
        return Err(TimelineError::FrameOutOfRange {
            frame,
            start: k0.frame,
            end: k1.frame,
        });
    }
    if frame == k0.frame {
        return Ok(k0.bbox);
    }
    if frame == k1.frame {
        return Ok(k1.bbox);
    }
    let t = f64::from(frame - k0.frame) / f64::from(k1.frame - k0.frame);
    let (a, b) = (k0.bbox, k1.bbox);
    Ok(BBox::new(
        lerp(a.x1, b.x1, t),
        lerp(a.y1, b.y1, t),
        lerp(a.w, b.w, t),
        lerp(a.h, b.h, t),
    ))
}

/// Expands a track to `duration` frames. Keyframes at or beyond `duration` are ignored.
pub fn expand_track(track: &ObjectAnimation, duration: u32) -> FrameTrack {
    let len = duration as usize;
    let mut boxes = vec![None; len];
    let kfs: Vec<&Keyframe> = track.keyframes.iter().filter(|k| k.frame < duration).collect();
    for pair in kfs.windows(2) {
        let (k0, k1) = (pair[0], pair[1]);
        for f in k0.frame..=k1.frame {
            boxes[f as usize] = interpolate(k0, k1, f).ok();
        }
    }
    if let Some(last) = kfs.last() {
        for slot in boxes.iter_mut().skip(last.frame as usize) {
            *slot = Some(last.bbox);
        }
    }
    FrameTrack {
        object_index: track.object_index,
        boxes,
    }
}

pub fn static_track(object_index: usize, bbox: BBox, duration: u32) -> FrameTrack {
    FrameTrack {
        object_index,
        boxes: vec![Some(bbox); duration as usize],
    }
}

/// One frame track per foreground object, in foreground order.
pub fn expand_document(doc: &VideoSt) -> Vec<FrameTrack> {
    let l = doc.animation.duration;
    doc.foreground
        .iter()
        .enumerate()
        .map(|(i, o)| match doc.animation.track_for(i) {
            Some(t) => expand_track(t, l),
            None => static_track(i, o.bbox, l),
        })
        .collect()
}

/// Box of a foreground object on the final frame (its resting layout position).
pub fn final_box(doc: &VideoSt, object_index: usize) -> Option<BBox> {
    let object = doc.foreground.get(object_index)?;
    match doc.animation.track_for(object_index) {
        Some(t) => t
            .keyframes
            .iter()
            .filter(|k| k.frame < doc.animation.duration)
            .next_back()
            .map(|k| k.bbox),
        None => Some(object.bbox),
    }
}
