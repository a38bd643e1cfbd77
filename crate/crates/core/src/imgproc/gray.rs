use crate::model::{BBox, Frame};

use super::ImgError;

/// 8-bit single-channel image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImgError> {
        if width == 0 || height == 0 {
            return Err(ImgError::TooSmall {
                need: (1, 1),
                got: (width, height),
            });
        }
        if data.len() != width as usize * height as usize {
            return Err(ImgError::Buffer {
                expected: width as usize * height as usize,
                actual: data.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, v: u8) -> Self {
        GrayImage {
            width,
            height,
            data: vec![v; width as usize * height as usize],
        }
    }

    /// ITU-R BT.601 luma, rounded.
    pub fn from_frame(frame: &Frame) -> Self {
        let data = frame
            .pixels()
            .chunks_exact(3)
            .map(|p| luma([p[0], p[1], p[2]]))
            .collect();
        GrayImage {
            width: frame.width(),
            height: frame.height(),
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Read with coordinates clamped into the image.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let x = x.clamp(0, self.width as i64 - 1) as u32;
        let y = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(x, y)
    }

    pub fn crop(&self, b: BBox) -> Option<GrayImage> {
        if !b.fits_in(self.width, self.height) {
            return None;
        }
        let mut data = Vec::with_capacity(b.area() as usize);
        for y in b.y..b.bottom() {
            let s = y as usize * self.width as usize + b.x as usize;
            data.extend_from_slice(&self.data[s..s + b.w as usize]);
        }
        Some(GrayImage {
            width: b.w,
            height: b.h,
            data,
        })
    }

    pub fn invert(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| 255 - v).collect(),
        }
    }

    /// Nearest-neighbor resize.
    pub fn resize_nearest(&self, w: u32, h: u32) -> GrayImage {
        let mut data = Vec::with_capacity(w as usize * h as usize);
        for y in 0..h {
            let sy = ((y as u64 * self.height as u64) / h as u64) as u32;
            for x in 0..w {
                let sx = ((x as u64 * self.width as u64) / w as u64) as u32;
                data.push(self.get(sx, sy));
            }
        }
        GrayImage {
            width: w,
            height: h,
            data,
        }
    }
}

#[inline]
pub fn luma(p: [u8; 3]) -> u8 {
    ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8
}

/// Boolean image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Mask {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Tight bounding box of the set pixels inside `region`.
    pub fn ink_bbox(&self, region: BBox) -> Option<BBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in region.y..region.bottom().min(self.height) {
            for x in region.x..region.right().min(self.width) {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != u32::MAX).then(|| BBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    pub fn count_in(&self, region: BBox) -> usize {
        let mut n = 0;
        for y in region.y..region.bottom().min(self.height) {
            for x in region.x..region.right().min(self.width) {
                n += self.get(x, y) as usize;
            }
        }
        n
    }
}

/// Pixels whose largest channel is below `max_v` (dark "ink").
pub fn ink_mask(frame: &Frame, max_v: u8) -> Mask {
    Mask {
        width: frame.width(),
        height: frame.height(),
        data: frame
            .pixels()
            .chunks_exact(3)
            .map(|p| p[0].max(p[1]).max(p[2]) < max_v)
            .collect(),
    }
}
