use std::collections::BTreeMap;

use crate::st::{Animation, BBox};

use super::{compress_keyframes, extract_boxes, BoxConfig, IdMask, MaskError, TrackState};

/// Dense per-object tracks in forward chronological order.
pub type DenseTracks = BTreeMap<u32, Vec<Option<BBox>>>;

/// Runs box extraction over masks ordered last frame first and returns forward tracks.
pub fn assemble_tracks(masks_last_first: &[IdMask], cfg: &BoxConfig) -> Result<DenseTracks, MaskError> {
    let Some(first) = masks_last_first.first() else {
        return Ok(DenseTracks::new());
    };
    for (index, m) in masks_last_first.iter().enumerate() {
        if (m.width, m.height) != (first.width, first.height) {
            return Err(MaskError::DimensionMismatch {
                index,
                width: first.width,
                height: first.height,
                found_w: m.width,
                found_h: m.height,
            });
        }
    }
    let mut state = TrackState::default();
    for (i, m) in masks_last_first.iter().enumerate() {
        extract_boxes(m, &mut state, i == 0, cfg);
    }
    Ok(state
        .boxes_by_frame
        .into_iter()
        .map(|(id, mut frames)| {
            frames.reverse();
            (id, frames)
        })
        .collect())
}

/// Masks in forward order to an Animation. `object_order` maps foreground index to
/// object id; ids not listed are skipped, and when it is `None` ids are taken in
/// ascending order.
pub fn masks_to_animation(
    masks_forward: &[IdMask],
    object_order: Option<&[u32]>,
    cfg: &BoxConfig,
    tol: f64,
) -> Result<Animation, MaskError> {
    let reversed: Vec<IdMask> = masks_forward.iter().rev().cloned().collect();
    let tracks = assemble_tracks(&reversed, cfg)?;
    let order: Vec<u32> = match object_order {
        Some(o) => o.to_vec(),
        None => tracks.keys().copied().collect(),
    };
    let tracks = order
        .iter()
        .enumerate()
        .filter_map(|(index, id)| tracks.get(id).and_then(|t| compress_keyframes(index, t, tol)))
        .collect();
    Ok(Animation {
        duration: masks_forward.len() as u32,
        tracks,
    })
}
