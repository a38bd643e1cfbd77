use std::fmt;
use std::io::Cursor;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::BBox;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame dimensions must be at least 1x1, got {0}x{1}")]
    EmptyDimensions(u32, u32),
    #[error("pixel buffer has {actual} bytes, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("clip must contain at least one frame")]
    EmptyClip,
    #[error("frame {index} is {got:?}, clip frames are {want:?}")]
    MixedDimensions {
        index: usize,
        got: (u32, u32),
        want: (u32, u32),
    },
    #[error("png encode: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("png decode: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("unsupported png layout: {0}")]
    Unsupported(String),
}

/// An RGB image, 8 bits per channel, row-major.
///
/// Pixel storage is shared, so cloning a frame (for example when a clip holds
/// the same state for several frames) is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Arc<[u8]>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::EmptyDimensions(width, height));
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(FrameError::BufferLength {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels: pixels.into(),
        })
    }

    /// A frame filled with one color.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "frame dimensions must be positive");
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            pixels: pixels.into(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Copy of the region `bbox`, clipped to the frame. Returns `None` when
    /// the clipped region is empty.
    pub fn crop(&self, bbox: BBox) -> Option<Frame> {
        let x0 = bbox.x.min(self.width);
        let y0 = bbox.y.min(self.height);
        let x1 = bbox.x.saturating_add(bbox.w).min(self.width);
        let y1 = bbox.y.saturating_add(bbox.h).min(self.height);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let mut out = Vec::with_capacity(w as usize * h as usize * 3);
        for y in y0..y1 {
            let start = (y as usize * self.width as usize + x0 as usize) * 3;
            out.extend_from_slice(&self.pixels[start..start + w as usize * 3]);
        }
        Some(Frame {
            width: w,
            height: h,
            pixels: out.into(),
        })
    }

    /// Hex SHA-256 over the dimensions and pixel bytes.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.width.to_le_bytes());
        hasher.update(self.height.to_le_bytes());
        hasher.update(&self.pixels[..]);
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_png(&self) -> Result<Vec<u8>, FrameError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&self.pixels)?;
        }
        Ok(out)
    }

    /// Decodes a PNG into RGB8. Gray, gray-alpha and RGBA inputs are
    /// converted (alpha is dropped).
    pub fn from_png(bytes: &[u8]) -> Result<Self, FrameError> {
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info()?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| FrameError::Unsupported("image too large".into()))?;
        let mut buf = vec![0u8; size];
        let info = reader.next_frame(&mut buf)?;
        buf.truncate(info.buffer_size());
        let channels = match info.color_type {
            png::ColorType::Grayscale => 1,
            png::ColorType::GrayscaleAlpha => 2,
            png::ColorType::Rgb => 3,
            png::ColorType::Rgba => 4,
            other => return Err(FrameError::Unsupported(format!("{other:?}"))),
        };
        if info.bit_depth != png::BitDepth::Eight {
            return Err(FrameError::Unsupported(format!("{:?}", info.bit_depth)));
        }
        let rgb = if channels == 3 {
            buf
        } else {
            buf.chunks_exact(channels)
                .flat_map(|p| match channels {
                    1 | 2 => [p[0], p[0], p[0]],
                    _ => [p[0], p[1], p[2]],
                })
                .collect()
        };
        Frame::new(info.width, info.height, rgb)
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame({}x{})", self.width, self.height)
    }
}

/// Frames travel through JSON (wire formats, embedded truths) as base64 PNG.
impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use base64::Engine;
        let png = self.to_png().map_err(serde::ser::Error::custom)?;
        s.serialize_str(&base64::engine::general_purpose::STANDARD.encode(png))
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use base64::Engine;
        let text = String::deserialize(d)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(text.as_bytes())
            .map_err(serde::de::Error::custom)?;
        Frame::from_png(&bytes).map_err(serde::de::Error::custom)
    }
}

/// An ordered frame sequence with a nominal frame rate.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoClip {
    frames: Vec<Frame>,
    fps: f64,
}

impl VideoClip {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self, FrameError> {
        let first = frames.first().ok_or(FrameError::EmptyClip)?;
        let want = first.dims();
        if let Some((index, f)) = frames.iter().enumerate().find(|(_, f)| f.dims() != want) {
            return Err(FrameError::MixedDimensions {
                index,
                got: f.dims(),
                want,
            });
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false for a constructed clip; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn first(&self) -> &Frame {
        &self.frames[0]
    }

    pub fn last(&self) -> &Frame {
        &self.frames[self.frames.len() - 1]
    }

    pub fn dims(&self) -> (u32, u32) {
        self.frames[0].dims()
    }

    /// Indices `round(i * (N - 1) / (n - 1))` for `i in 0..n`, deduplicated so
    /// they stay strictly increasing when the clip is shorter than `n`.
    pub fn uniform_indices(&self, n: usize) -> Vec<usize> {
        uniform_indices(self.frames.len(), n)
    }

    pub fn sample_uniform(&self, n: usize) -> Vec<Frame> {
        self.uniform_indices(n)
            .into_iter()
            .map(|i| self.frames[i].clone())
            .collect()
    }

    /// Clip keeping only the first `n` frames (at least one).
    pub fn truncated(&self, n: usize) -> VideoClip {
        let n = n.clamp(1, self.frames.len());
        VideoClip {
            frames: self.frames[..n].to_vec(),
            fps: self.fps,
        }
    }
}

pub fn uniform_indices(len: usize, n: usize) -> Vec<usize> {
    if len == 0 || n == 0 {
        return Vec::new();
    }
    if n == 1 || len == 1 {
        return vec![0];
    }
    let mut out: Vec<usize> = Vec::with_capacity(n);
    let span = (len - 1) as f64;
    for i in 0..n {
        let idx = (i as f64 * span / (n - 1) as f64).round() as usize;
        if out.last() != Some(&idx) {
            out.push(idx);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(Frame::new(0, 3, vec![]).is_err());
        assert!(Frame::new(2, 2, vec![0; 11]).is_err());
        assert!(Frame::new(2, 2, vec![0; 12]).is_ok());
    }

    #[test]
    fn png_round_trip_is_pixel_exact() {
        let px: Vec<u8> = (0..(7 * 5 * 3)).map(|i| (i * 37 % 256) as u8).collect();
        let f = Frame::new(7, 5, px).unwrap();
        let back = Frame::from_png(&f.to_png().unwrap()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn clip_rejects_mixed_sizes() {
        let a = Frame::filled(4, 4, [0, 0, 0]);
        let b = Frame::filled(4, 5, [0, 0, 0]);
        assert!(VideoClip::new(vec![], 8.0).is_err());
        assert!(VideoClip::new(vec![a.clone(), b], 8.0).is_err());
        assert_eq!(VideoClip::new(vec![a.clone(), a], 8.0).unwrap().len(), 2);
    }

    #[test]
    fn uniform_sampling_hits_both_ends() {
        assert_eq!(uniform_indices(31, 16), (0..16).map(|i| i * 2).collect::<Vec<_>>());
        assert_eq!(uniform_indices(4, 16), vec![0, 1, 2, 3]);
        assert_eq!(uniform_indices(100, 2), vec![0, 99]);
    }

    #[test]
    fn crop_clips_to_bounds() {
        let f = Frame::filled(10, 10, [1, 2, 3]);
        let c = f.crop(BBox::new(8, 8, 5, 5)).unwrap();
        assert_eq!(c.dims(), (2, 2));
        assert!(f.crop(BBox::new(10, 0, 2, 2)).is_none());
    }
}
