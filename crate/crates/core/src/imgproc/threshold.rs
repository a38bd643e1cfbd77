use std::cmp::Ordering;

use super::{GrayImage, Mask};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Otsu,
    Fixed(u8),
}

/// A mask of pixels strictly above `threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binarized {
    pub mask: Mask,
    pub threshold: u8,
    /// Otsu had no two-class split (constant image) and fell back to 128.
    pub fallback: bool,
}

pub const OTSU_FALLBACK: u8 = 128;

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &v in &img.data {
        h[v as usize] += 1;
    }
    h
}

/// Between-class variance for split `<= t | > t`, kept as an exact fraction
/// `num / den` (scaled by N², which is constant across thresholds).
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    /// Exact comparison of `a.num / a.den` against `b.num / b.den` without
    /// overflowing: compare integer quotients, then remainders cross-multiplied.
    fn cmp(&self, other: &Score) -> Ordering {
        let (q1, r1) = (self.num / self.den, self.num % self.den);
        let (q2, r2) = (other.num / other.den, other.num % other.den);
        q1.cmp(&q2).then_with(|| (r1 * other.den).cmp(&(r2 * self.den)))
    }
}

/// Threshold maximizing between-class variance over the histogram; ties go
/// to the lowest threshold. `None` when every pixel has the same value.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total_n: u64 = hist.iter().sum();
    let total_s: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let mut best: Option<(u8, Score)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 0..255usize {
        n0 += hist[t];
        s0 += t as u64 * hist[t];
        let n1 = total_n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_s - s0;
        // (S0*n1 - S1*n0)^2 / (n0*n1)
        let a = (s0 as i128 * n1 as i128 - s1 as i128 * n0 as i128).unsigned_abs();
        let score = Score {
            num: a * a,
            den: n0 as u128 * n1 as u128,
        };
        match &best {
            Some((_, b)) if score.cmp(b) != Ordering::Greater => {}
            _ => best = Some((t as u8, score)),
        }
    }
    best.map(|(t, _)| t)
}

pub fn binarize(img: &GrayImage, method: Threshold) -> Binarized {
    let (threshold, fallback) = match method {
        Threshold::Fixed(t) => (t, false),
        Threshold::Otsu => match otsu_threshold(&histogram(img)) {
            Some(t) => (t, false),
            None => (OTSU_FALLBACK, true),
        },
    };
    let mask = Mask {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&v| v > threshold).collect(),
    };
    Binarized {
        mask,
        threshold,
        fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bimodal_split() {
        let mut data = vec![50u8; 50];
        data.extend(vec![200u8; 50]);
        let img = GrayImage::new(10, 10, data.clone()).unwrap();
        let b = binarize(&img, Threshold::Otsu);
        assert!(!b.fallback);
        assert!((50..200).contains(&b.threshold));
        assert_eq!(b.threshold, 50, "ties resolve to the lowest threshold");
        for (m, v) in b.mask.data.iter().zip(&data) {
            assert_eq!(*m, *v == 200);
        }
    }

    #[test]
    fn constant_image_falls_back() {
        let img = GrayImage::filled(8, 8, 0);
        let b = binarize(&img, Threshold::Otsu);
        assert!(b.fallback);
        assert_eq!(b.threshold, OTSU_FALLBACK);
        assert_eq!(b.mask.count(), 0);
    }

    #[test]
    fn fixed_threshold_is_strict() {
        let img = GrayImage::new(3, 1, vec![99, 100, 101]).unwrap();
        let b = binarize(&img, Threshold::Fixed(100));
        assert_eq!(b.mask.data, vec![false, false, true]);
    }
}
