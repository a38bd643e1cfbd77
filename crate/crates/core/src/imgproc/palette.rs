//! Named colors shared by the generators (which paint with `rgb`) and the
//! color grounder (which detects with the HSV window).

use super::Hsv;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NamedColor {
    pub name: &'static str,
    pub rgb: [u8; 3],
    /// Inclusive hue interval; wraps through 0° when `lo > hi`. `None` for
    /// achromatic colors.
    pub hue: Option<(f64, f64)>,
    pub s: (f64, f64),
    pub v: (f64, f64),
}

impl NamedColor {
    pub fn matches(&self, c: Hsv) -> bool {
        if c.s < self.s.0 || c.s > self.s.1 || c.v < self.v.0 || c.v > self.v.1 {
            return false;
        }
        match self.hue {
            None => true,
            Some((lo, hi)) if lo <= hi => c.h >= lo && c.h <= hi,
            Some((lo, hi)) => c.h >= lo || c.h <= hi,
        }
    }
}

const SAT: (f64, f64) = (0.45, 1.0);
const VAL: (f64, f64) = (0.35, 1.0);

const fn chroma(name: &'static str, rgb: [u8; 3], lo: f64, hi: f64) -> NamedColor {
    NamedColor {
        name,
        rgb,
        hue: Some((lo, hi)),
        s: SAT,
        v: VAL,
    }
}

pub const PALETTE: &[NamedColor] = &[
    chroma("red", [220, 30, 30], 348.0, 12.0),
    chroma("orange", [245, 140, 20], 19.0, 43.0),
    chroma("yellow", [235, 210, 20], 45.0, 65.0),
    chroma("green", [40, 170, 60], 105.0, 150.0),
    chroma("cyan", [20, 190, 200], 170.0, 195.0),
    chroma("blue", [40, 90, 220], 205.0, 245.0),
    chroma("purple", [140, 60, 200], 260.0, 290.0),
    chroma("magenta", [210, 40, 160], 305.0, 335.0),
    NamedColor {
        name: "gray",
        rgb: [128, 128, 128],
        hue: None,
        s: (0.0, 0.12),
        v: (0.4, 0.7),
    },
];

/// Near-black used for text, walls and outlines.
pub const INK: [u8; 3] = [20, 20, 20];

/// Light, low-saturation backgrounds; none of them matches a palette color.
pub const BACKGROUNDS: &[[u8; 3]] = &[
    [250, 250, 250],
    [246, 243, 236],
    [238, 244, 248],
    [242, 248, 240],
    [248, 240, 244],
];

pub fn named(name: &str) -> Option<&'static NamedColor> {
    PALETTE.iter().find(|c| c.name.eq_ignore_ascii_case(name))
}

pub fn rgb(name: &str) -> [u8; 3] {
    named(name).map_or(INK, |c| c.rgb)
}

/// The color word a grounding label starts with, e.g. `"blue ball"` → blue.
pub fn color_of_label(label: &str) -> Option<&'static NamedColor> {
    label.split_whitespace().next().and_then(named)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::hsv;

    #[test]
    fn every_color_matches_only_itself() {
        for c in PALETTE {
            let h = hsv(c.rgb);
            for other in PALETTE {
                assert_eq!(other.matches(h), other.name == c.name, "{} vs {}", c.name, other.name);
            }
        }
    }

    #[test]
    fn backgrounds_and_ink_match_nothing() {
        for bg in BACKGROUNDS.iter().chain([&INK]) {
            assert!(PALETTE.iter().all(|c| !c.matches(hsv(*bg))), "{bg:?}");
        }
    }
}
