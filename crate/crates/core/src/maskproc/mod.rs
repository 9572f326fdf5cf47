//! Per-frame object-id masks to Animation ST.
//!
//! Masks are processed last frame first: the final frame seeds each object's reference
//! area, earlier frames are filtered against it, and the resulting dense tracks are
//! compressed into keyframes.

mod boxes;
mod keyframes;
mod pgm;
mod tracks;

pub use boxes::*;
pub use keyframes::*;
pub use pgm::*;
pub use tracks::*;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("mask {index} is {found_w}x{found_h}, expected {width}x{height}")]
    DimensionMismatch {
        index: usize,
        width: usize,
        height: usize,
        found_w: usize,
        found_h: usize,
    },
    #[error("mask buffer has {found} values, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("invalid PGM: {0}")]
    Pgm(String),
    #[error("invalid mask index: {0}")]
    Index(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Row-major object-id image; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMask {
    pub width: usize,
    pub height: usize,
    pub ids: Vec<u32>,
}

impl IdMask {
    pub fn new(width: usize, height: usize, ids: Vec<u32>) -> Result<Self, MaskError> {
        if ids.len() != width * height {
            return Err(MaskError::BadLength {
                expected: width * height,
                found: ids.len(),
            });
        }
        Ok(Self { width, height, ids })
    }

    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            ids: vec![0; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.ids[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, id: u32) {
        self.ids[y * self.width + x] = id;
    }

    /// Fills the inclusive pixel rectangle, clipped to the mask.
    pub fn fill(&mut self, x1: usize, y1: usize, x2: usize, y2: usize, id: u32) {
        for y in y1..=y2.min(self.height.saturating_sub(1)) {
            for x in x1..=x2.min(self.width.saturating_sub(1)) {
                self.set(x, y, id);
            }
        }
    }
}
