use crate::st::{BBox, Color};

/// Row-major RGB8 image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

/// Half-open integer pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PixelRect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl PixelRect {
    /// Pixels whose centres lie inside `b`: `[x1, x1 + w)` on integer boxes.
    pub fn covering(b: &BBox) -> Self {
        let lo = |v: f64| (v - 0.5).ceil() as i64;
        Self {
            x0: lo(b.x1),
            y0: lo(b.y1),
            x1: lo(b.x1 + b.w),
            y1: lo(b.y1 + b.h),
        }
    }

    pub fn width(&self) -> i64 {
        (self.x1 - self.x0).max(0)
    }

    pub fn height(&self) -> i64 {
        (self.y1 - self.y0).max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.width() == 0 || self.height() == 0
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn intersect(&self, o: &PixelRect) -> PixelRect {
        PixelRect {
            x0: self.x0.max(o.x0),
            y0: self.y0.max(o.y0),
            x1: self.x1.min(o.x1),
            y1: self.y1.min(o.y1),
        }
    }
}

impl Frame {
    pub fn new(width: u32, height: u32, fill: Color) -> Self {
        let pixels = fill.to_array().repeat(width as usize * height as usize);
        Self { width, height, pixels }
    }

    pub fn bounds(&self) -> PixelRect {
        PixelRect {
            x0: 0,
            y0: 0,
            x1: i64::from(self.width),
            y1: i64::from(self.height),
        }
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Sets a pixel; coordinates outside the frame are ignored.
    pub fn put(&mut self, x: i64, y: i64, c: Color) {
        if !self.bounds().contains(x, y) {
            return;
        }
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c.to_array());
    }

    pub fn fill_rect(&mut self, r: PixelRect, c: Color) {
        let r = r.intersect(&self.bounds());
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                self.put(x, y, c);
            }
        }
    }

    /// One-pixel outline along the inside edge of `r`.
    pub fn stroke_rect(&mut self, r: PixelRect, c: Color) {
        if r.is_empty() {
            return;
        }
        for x in r.x0..r.x1 {
            self.put(x, r.y0, c);
            self.put(x, r.y1 - 1, c);
        }
        for y in r.y0..r.y1 {
            self.put(r.x0, y, c);
            self.put(r.x1 - 1, y, c);
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>, image::ImageError> {
        use image::ImageEncoder;
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out).write_image(
            &self.pixels,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(out)
    }
}
