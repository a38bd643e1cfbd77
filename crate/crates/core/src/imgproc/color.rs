use crate::model::Frame;

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Standard hexcone conversion. Hue is 0 when the pixel is achromatic.
#[inline]
pub fn hsv(rgb: [u8; 3]) -> Hsv {
    let r = rgb[0] as f64 / 255.0;
    let g = rgb[1] as f64 / 255.0;
    let b = rgb[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let h = if h >= 360.0 { h - 360.0 } else { h };
    Hsv { h, s, v }
}

/// Per-pixel HSV of a frame, row-major.
pub fn rgb_to_hsv(frame: &Frame) -> Vec<Hsv> {
    frame
        .pixels()
        .chunks_exact(3)
        .map(|p| hsv([p[0], p[1], p[2]]))
        .collect()
}

/// Inclusive hue interval in degrees plus minimum saturation/value. A band
/// with `h_lo > h_hi` wraps through 0°.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HueBand {
    pub h_lo: f64,
    pub h_hi: f64,
    pub s_min: f64,
    pub v_min: f64,
}

impl HueBand {
    pub fn new(h_lo: f64, h_hi: f64, s_min: f64, v_min: f64) -> Self {
        HueBand {
            h_lo,
            h_hi,
            s_min,
            v_min,
        }
    }

    #[inline]
    pub fn contains(&self, c: Hsv) -> bool {
        if c.s < self.s_min || c.v < self.v_min {
            return false;
        }
        if self.h_lo <= self.h_hi {
            c.h >= self.h_lo && c.h <= self.h_hi
        } else {
            c.h >= self.h_lo || c.h <= self.h_hi
        }
    }
}
