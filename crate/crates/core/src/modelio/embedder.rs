use crate::model::Frame;

use super::{ClientError, Embedder};

const SIDE: u32 = 32;
const PATCHES: u32 = 4;
const BINS: usize = 4;
pub const EMBED_DIM: usize = (PATCHES * PATCHES) as usize * 3 * BINS;

/// Deterministic stand-in for a learned image encoder: per-patch color
/// histograms of a 32×32 nearest-neighbour thumbnail.
#[derive(Clone, Copy, Debug, Default)]
pub struct PatchHistogramEmbedder;

impl PatchHistogramEmbedder {
    pub fn embed_frame(crop: &Frame) -> Result<Vec<f64>, ClientError> {
        let (w, h) = crop.dims();
        if w < PATCHES || h < PATCHES {
            return Err(ClientError::Backend(format!("crop {w}x{h} is smaller than {PATCHES}x{PATCHES}")));
        }
        let patch = SIDE / PATCHES;
        let mut v = vec![0.0f64; EMBED_DIM];
        for y in 0..SIDE {
            let sy = (y as u64 * h as u64 / SIDE as u64) as u32;
            for x in 0..SIDE {
                let sx = (x as u64 * w as u64 / SIDE as u64) as u32;
                let px = crop.get(sx, sy);
                let p = ((y / patch) * PATCHES + x / patch) as usize;
                for (ch, &val) in px.iter().enumerate() {
                    let bin = (val as usize * BINS) / 256;
                    v[(p * 3 + ch) * BINS + bin] += 1.0;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        Ok(v)
    }
}

impl Embedder for PatchHistogramEmbedder {
    fn embed(&self, crop: &Frame) -> Result<Vec<f64>, ClientError> {
        Self::embed_frame(crop)
    }
}

/// Cosine similarity; `None` when lengths differ or either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn red_and_blue_are_far_apart() {
        let red = Frame::filled(20, 20, [255, 0, 0]);
        let blue = Frame::filled(20, 20, [0, 0, 255]);
        let a = PatchHistogramEmbedder::embed_frame(&red).unwrap();
        let b = PatchHistogramEmbedder::embed_frame(&blue).unwrap();
        // Only the green channel (0 in both) shares a bin.
        assert!((cosine(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.len(), EMBED_DIM);
        assert!(PatchHistogramEmbedder::embed_frame(&Frame::filled(3, 8, [0, 0, 0])).is_err());
    }
}
