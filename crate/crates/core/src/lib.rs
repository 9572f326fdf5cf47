//! Toolkit for structured-text (ST) animated layouts of video advertisements.
//!
//! A layout document ([`st::VideoSt`]) holds banners, foreground objects, a
//! background and keyframed animation. The crate parses and validates such
//! documents, expands keyframes into per-frame boxes, rasterizes frames, runs the
//! banner → mainground → animation generation pipeline over a pluggable text
//! backend, computes layout and motion metrics, and recovers animation tracks from
//! per-frame object-id masks.

pub mod maskproc;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod st;
pub mod timeline;
pub mod validate;
