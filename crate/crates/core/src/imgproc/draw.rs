use crate::model::{BBox, Frame};

use super::GlyphAtlas;

/// Mutable RGB raster used by the generators. Drawing calls clip silently.
#[derive(Clone, Debug)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    px: Vec<u8>,
}

impl Canvas {
    pub fn new(width: u32, height: u32, bg: [u8; 3]) -> Self {
        let mut px = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            px.extend_from_slice(&bg);
        }
        Canvas { width, height, px }
    }

    pub fn from_frame(f: &Frame) -> Self {
        Canvas {
            width: f.width(),
            height: f.height(),
            px: f.pixels().to_vec(),
        }
    }

    pub fn into_frame(self) -> Frame {
        Frame::new(self.width, self.height, self.px).expect("canvas buffer sized by construction")
    }

    pub fn to_frame(&self) -> Frame {
        self.clone().into_frame()
    }

    #[inline]
    pub fn set(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.px[i..i + 3].copy_from_slice(&c);
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.px[i], self.px[i + 1], self.px[i + 2]]
    }

    pub fn fill_rect(&mut self, x: i64, y: i64, w: i64, h: i64, c: [u8; 3]) {
        let x0 = x.max(0);
        let y0 = y.max(0);
        let x1 = (x + w).min(self.width as i64);
        let y1 = (y + h).min(self.height as i64);
        for yy in y0..y1 {
            for xx in x0..x1 {
                self.set(xx, yy, c);
            }
        }
    }

    pub fn fill_bbox(&mut self, b: BBox, c: [u8; 3]) {
        self.fill_rect(b.x as i64, b.y as i64, b.w as i64, b.h as i64, c);
    }

    /// Border of thickness `t` drawn inside `b`.
    pub fn rect_outline(&mut self, b: BBox, t: u32, c: [u8; 3]) {
        let (x, y, w, h, t) = (b.x as i64, b.y as i64, b.w as i64, b.h as i64, t as i64);
        self.fill_rect(x, y, w, t, c);
        self.fill_rect(x, y + h - t, w, t, c);
        self.fill_rect(x, y, t, h, c);
        self.fill_rect(x + w - t, y, t, h, c);
    }

    /// Pixels whose center is within `r` of `(cx, cy)`.
    pub fn fill_circle(&mut self, cx: f64, cy: f64, r: f64, c: [u8; 3]) {
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.set(x, y, c);
                }
            }
        }
    }

    /// Segment of width `thickness`: every pixel within `thickness / 2` of it.
    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), thickness: f64, c: [u8; 3]) {
        let r = thickness / 2.0;
        let x0 = (a.0.min(b.0) - r).floor() as i64;
        let x1 = (a.0.max(b.0) + r).ceil() as i64;
        let y0 = (a.1.min(b.1) - r).floor() as i64;
        let y1 = (a.1.max(b.1) + r).ceil() as i64;
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = (x as f64, y as f64);
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
                };
                let (qx, qy) = (a.0 + t * dx - px, a.1 + t * dy - py);
                if qx * qx + qy * qy <= r * r {
                    self.set(x, y, c);
                }
            }
        }
    }

    /// Draw `text` with its top-left at `(x, y)`; each font pixel becomes a
    /// `scale × scale` block. Characters missing from the atlas are skipped
    /// (a space advances).
    pub fn text(&mut self, x: i64, y: i64, scale: u32, text: &str, c: [u8; 3]) {
        let atlas = GlyphAtlas::builtin();
        let s = scale as i64;
        let mut cx = x;
        for ch in text.chars() {
            if let Some(g) = atlas.get(ch) {
                for gy in 0..atlas.cell_height {
                    for gx in 0..atlas.cell_width {
                        if g.bits[(gy * atlas.cell_width + gx) as usize] {
                            self.fill_rect(cx + gx as i64 * s, y + gy as i64 * s, s, s, c);
                        }
                    }
                }
            }
            cx += atlas.advance(scale) as i64;
        }
    }

    /// Draw `text` centered on `(cx, cy)`.
    pub fn text_centered(&mut self, cx: f64, cy: f64, scale: u32, text: &str, c: [u8; 3]) {
        let atlas = GlyphAtlas::builtin();
        let w = atlas.text_width(text, scale) as f64;
        let h = atlas.text_height(scale) as f64;
        self.text((cx - w / 2.0).round() as i64, (cy - h / 2.0).round() as i64, scale, text, c);
    }

    pub fn blit(&mut self, f: &Frame, x: i64, y: i64) {
        for yy in 0..f.height() {
            for xx in 0..f.width() {
                self.set(x + xx as i64, y + yy as i64, f.get(xx, yy));
            }
        }
    }
}
