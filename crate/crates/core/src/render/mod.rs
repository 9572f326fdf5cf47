//! Rasterizes a document into RGB frames.
//!
//! Paint order is background, foreground objects (timeline boxes, list order), banners,
//! then banner objects. Everything is opaque and glyphs use binary coverage, so output is
//! bit-exact for a given document and config.

mod font;
mod frame;
mod text;

pub use font::{FontSource, RasterFont};
pub use frame::{Frame, PixelRect};
pub use text::{fit_text, PlacedLine, TextPlan, Unrenderable, FILL_RATIO, MIN_PX, WRAP_BELOW_PX};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::st::{Background, BBox, Color, LayoutObject, ObjectKind, TextboxColor, VideoSt};
use crate::timeline::{expand_document, FrameTrack};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("frame {frame} is outside 0..{duration}")]
    FrameOutOfRange { frame: u32, duration: u32 },
    #[error("no background image for caption {caption:?} (looked for {key}.png/.jpg in {dir:?})")]
    MissingBackgroundImage {
        caption: String,
        key: String,
        dir: Option<PathBuf>,
    },
    #[error("invalid render config: {0}")]
    Config(String),
    #[error("font: {0}")]
    Font(String),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub scale: f64,
    pub font: FontSource,
    pub logo_placeholder: Color,
    pub logo_border: Color,
    /// Images named by the hex SHA-256 of the caption, `.png` or `.jpg`.
    pub background_image_dir: Option<PathBuf>,
    /// Fall back to flat mid-gray (with a warning) instead of failing.
    pub allow_missing_background: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            scale: 1.0,
            font: FontSource::Embedded,
            logo_placeholder: Color::rgb(0xC8, 0xC8, 0xC8),
            logo_border: Color::BLACK,
            background_image_dir: None,
            allow_missing_background: true,
        }
    }
}

/// File stem under which the background for `caption` is looked up.
pub fn caption_key(caption: &str) -> String {
    hex::encode(Sha256::digest(caption.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub fps: u32,
    pub frames: u32,
    pub width: u32,
    pub height: u32,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
enum BackgroundFill {
    Solid(Color),
    Image(Frame),
}

/// A document prepared for rendering: timeline expanded, background and font loaded.
#[derive(Debug)]
pub struct Renderer<'a> {
    doc: &'a VideoSt,
    cfg: RenderConfig,
    font: RasterFont,
    tracks: Vec<FrameTrack>,
    background: BackgroundFill,
    width: u32,
    height: u32,
    warnings: Vec<String>,
}

impl<'a> Renderer<'a> {
    pub fn new(doc: &'a VideoSt, cfg: &RenderConfig) -> Result<Self, RenderError> {
        if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
            return Err(RenderError::Config(format!("scale must be positive, got {}", cfg.scale)));
        }
        let width = ((f64::from(doc.canvas.width) * cfg.scale).round() as u32).max(1);
        let height = ((f64::from(doc.canvas.height) * cfg.scale).round() as u32).max(1);
        let mut warnings = Vec::new();
        let background = match &doc.background {
            Background::SolidColor(c) => BackgroundFill::Solid(*c),
            Background::Image { caption } => match load_background(caption, cfg, width, height)? {
                Some(img) => BackgroundFill::Image(img),
                None => {
                    let key = caption_key(caption);
                    if !cfg.allow_missing_background {
                        return Err(RenderError::MissingBackgroundImage {
                            caption: caption.clone(),
                            key,
                            dir: cfg.background_image_dir.clone(),
                        });
                    }
                    log::warn!("no background image for caption {caption:?}; using mid-gray");
                    warnings.push(format!("background image {key} not found; filled with #808080"));
                    BackgroundFill::Solid(Color::MID_GRAY)
                }
            },
        };
        Ok(Self {
            doc,
            font: RasterFont::load(&cfg.font)?,
            cfg: cfg.clone(),
            tracks: expand_document(doc),
            background,
            width,
            height,
            warnings,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Warnings raised while preparing (not per frame).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn to_pixels(&self, b: &BBox) -> PixelRect {
        let sx = f64::from(self.width) / f64::from(self.doc.canvas.width);
        let sy = f64::from(self.height) / f64::from(self.doc.canvas.height);
        PixelRect::covering(&b.scaled(sx, sy))
    }

    /// Renders frame `f`, returning it together with any text that could not be placed.
    pub fn frame_with_warnings(&self, f: u32) -> Result<(Frame, Vec<String>), RenderError> {
        let duration = self.doc.animation.duration;
        if f >= duration {
            return Err(RenderError::FrameOutOfRange { frame: f, duration });
        }
        let mut frame = match &self.background {
            BackgroundFill::Solid(c) => Frame::new(self.width, self.height, *c),
            BackgroundFill::Image(img) => img.clone(),
        };
        let mut warnings = Vec::new();
        for (i, (object, track)) in self.doc.foreground.iter().zip(&self.tracks).enumerate() {
            if let Some(b) = track.boxes[f as usize] {
                self.paint_object(&mut frame, object, &b, &format!("foreground[{i}]"), &mut warnings);
            }
        }
        for banner in &self.doc.banners {
            frame.fill_rect(self.to_pixels(&banner.bbox), banner.color);
        }
        for banner in &self.doc.banners {
            for (j, object) in banner.objects.iter().enumerate() {
                let label = format!("banners[{}].objects[{j}]", banner.position.as_str());
                self.paint_object(&mut frame, object, &object.bbox, &label, &mut warnings);
            }
        }
        Ok((frame, warnings))
    }

    pub fn frame(&self, f: u32) -> Result<Frame, RenderError> {
        self.frame_with_warnings(f).map(|(frame, _)| frame)
    }

    fn paint_object(&self, frame: &mut Frame, object: &LayoutObject, b: &BBox, label: &str, warnings: &mut Vec<String>) {
        let area = self.to_pixels(b).intersect(&frame.bounds());
        match &object.kind {
            ObjectKind::Logo => {
                frame.fill_rect(area, self.cfg.logo_placeholder);
                frame.stroke_rect(area, self.cfg.logo_border);
            }
            ObjectKind::Text(attrs) => {
                if let TextboxColor::Solid(c) = attrs.textbox_color {
                    frame.fill_rect(area, c);
                }
                match fit_text(&attrs.raw_text, area, &self.font) {
                    Ok(plan) => {
                        for line in &plan.lines {
                            self.font
                                .draw_line(frame, &line.text, plan.px, line.x, line.y, area, attrs.text_color);
                        }
                    }
                    Err(e) => warnings.push(format!("{label}: text {:?} not rendered: {e}", attrs.raw_text)),
                }
            }
        }
    }
}

fn load_background(caption: &str, cfg: &RenderConfig, width: u32, height: u32) -> Result<Option<Frame>, RenderError> {
    let Some(dir) = &cfg.background_image_dir else {
        return Ok(None);
    };
    let key = caption_key(caption);
    for ext in ["png", "jpg", "jpeg"] {
        let path = dir.join(format!("{key}.{ext}"));
        if !path.is_file() {
            continue;
        }
        let img = image::open(&path)?.to_rgb8();
        let img = image::imageops::resize(&img, width, height, image::imageops::FilterType::Nearest);
        return Ok(Some(Frame {
            width,
            height,
            pixels: img.into_raw(),
        }));
    }
    Ok(None)
}

pub fn render_frame(doc: &VideoSt, f: u32, cfg: &RenderConfig) -> Result<Frame, RenderError> {
    Renderer::new(doc, cfg)?.frame(f)
}

pub fn frame_file_name(f: u32) -> String {
    format!("frame_{f:05}.png")
}

/// Writes `frame_%05d.png` for every frame plus `manifest.json` into `out_dir`.
///
/// Frames are rasterized in parallel on the current rayon pool; output does not depend
/// on scheduling.
pub fn render_video(doc: &VideoSt, cfg: &RenderConfig, out_dir: &Path) -> Result<Manifest, RenderError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RenderError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let renderer = Renderer::new(doc, cfg)?;
    let per_frame: Vec<Vec<String>> = (0..doc.animation.duration)
        .into_par_iter()
        .map(|f| {
            let (frame, warnings) = renderer.frame_with_warnings(f)?;
            let path = out_dir.join(frame_file_name(f));
            std::fs::write(&path, frame.to_png()?).map_err(io(&path))?;
            Ok(warnings)
        })
        .collect::<Result<_, RenderError>>()?;

    let mut warnings = renderer.warnings().to_vec();
    for (f, list) in per_frame.into_iter().enumerate() {
        for w in list {
            let w = format!("frame {f}: {w}");
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let manifest = Manifest {
        fps: doc.canvas.fps,
        frames: doc.animation.duration,
        width: renderer.width(),
        height: renderer.height(),
        warnings,
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(manifest)
}
