//! Closed-vocabulary glyph set: digits, A–D and arithmetic operators.
//!
//! Generators render text through [`crate::imgproc::Canvas::text`] with the
//! same bitmaps the verifiers match against.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::model::{BBox, Frame};

use super::{ncc, Mask};

const ATLAS_PNG: &[u8] = include_bytes!("../../assets/glyphs.png");
const ATLAS_JSON: &str = include_str!("../../assets/glyphs.json");

pub const DIGITS: &[char] = &['0', '1', '2', '3', '4', '5', '6', '7', '8', '9'];
pub const LETTERS: &[char] = &['A', 'B', 'C', 'D'];
pub const OPERATORS: &[char] = &['+', '-', '×', '÷', '='];

/// Lowest aspect-scale ratio `sx / sy` a candidate may have.
const MIN_ASPECT: f64 = 0.6;
const MAX_ASPECT: f64 = 1.67;

#[derive(Deserialize)]
struct IndexEntry {
    ch: String,
    x: u32,
    y: u32,
}

#[derive(Deserialize)]
struct Index {
    cell_width: u32,
    cell_height: u32,
    glyphs: Vec<IndexEntry>,
}

#[derive(Clone, Debug)]
pub struct Glyph {
    pub ch: char,
    /// `cell_width × cell_height`, row-major; `true` is ink.
    pub bits: Vec<bool>,
    /// Ink bounds in font units.
    pub ink: BBox,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlyphMatch {
    pub ch: char,
    pub score: f64,
}

#[derive(Debug)]
pub struct GlyphAtlas {
    pub cell_width: u32,
    pub cell_height: u32,
    glyphs: BTreeMap<char, Glyph>,
}

impl GlyphAtlas {
    pub fn builtin() -> &'static GlyphAtlas {
        static ATLAS: OnceLock<GlyphAtlas> = OnceLock::new();
        ATLAS.get_or_init(|| {
            GlyphAtlas::parse(ATLAS_PNG, ATLAS_JSON).expect("embedded glyph atlas is valid")
        })
    }

    pub fn parse(png: &[u8], json: &str) -> Result<GlyphAtlas, String> {
        let sheet = Frame::from_png(png).map_err(|e| e.to_string())?;
        let index: Index = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let (cw, chh) = (index.cell_width, index.cell_height);
        let mut glyphs = BTreeMap::new();
        for e in index.glyphs {
            let mut chars = e.ch.chars();
            let (Some(ch), None) = (chars.next(), chars.next()) else {
                return Err(format!("glyph key {:?} is not one character", e.ch));
            };
            if e.x + cw > sheet.width() || e.y + chh > sheet.height() {
                return Err(format!("glyph {ch:?} lies outside the sheet"));
            }
            let mut bits = Vec::with_capacity((cw * chh) as usize);
            for y in 0..chh {
                for x in 0..cw {
                    bits.push(sheet.get(e.x + x, e.y + y)[0] < 128);
                }
            }
            let m = Mask {
                width: cw,
                height: chh,
                data: bits.clone(),
            };
            let ink = m
                .ink_bbox(BBox::new(0, 0, cw, chh))
                .ok_or_else(|| format!("glyph {ch:?} is empty"))?;
            glyphs.insert(ch, Glyph { ch, bits, ink });
        }
        Ok(GlyphAtlas {
            cell_width: cw,
            cell_height: chh,
            glyphs,
        })
    }

    pub fn get(&self, ch: char) -> Option<&Glyph> {
        self.glyphs.get(&ch)
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.glyphs.keys().copied()
    }

    /// Horizontal advance per character at `scale`.
    pub fn advance(&self, scale: u32) -> u32 {
        (self.cell_width + 1) * scale
    }

    pub fn text_width(&self, text: &str, scale: u32) -> u32 {
        let n = text.chars().count() as u32;
        if n == 0 {
            0
        } else {
            n * self.advance(scale) - scale
        }
    }

    pub fn text_height(&self, scale: u32) -> u32 {
        self.cell_height * scale
    }

    /// Template for `g`: its ink bounds plus one font unit of background.
    /// Ink is 0, background 255.
    fn template(&self, g: &Glyph) -> Vec<u8> {
        let (tw, th) = (g.ink.w + 2, g.ink.h + 2);
        let mut data = vec![255u8; (tw * th) as usize];
        for y in 0..g.ink.h {
            for x in 0..g.ink.w {
                let src = ((g.ink.y + y) * self.cell_width + g.ink.x + x) as usize;
                if g.bits[src] {
                    data[((y + 1) * tw + x + 1) as usize] = 0;
                }
            }
        }
        data
    }

    /// Best-scoring glyph from `vocab` for the ink inside `ink` (a tight
    /// bounding box in `mask`). The observed box is divided into the
    /// candidate's font grid and each font unit scored by ink coverage, so
    /// a one-pixel wobble at stroke edges costs little. Candidates whose
    /// aspect would need a non-uniform scale outside [0.6, 1.67] are
    /// skipped. The caller applies the acceptance threshold.
    pub fn recognize(&self, mask: &Mask, ink: BBox, vocab: &[char]) -> Option<GlyphMatch> {
        let mut best: Option<GlyphMatch> = None;
        for &ch in vocab {
            let Some(g) = self.get(ch) else { continue };
            let sx = ink.w as f64 / g.ink.w as f64;
            let sy = ink.h as f64 / g.ink.h as f64;
            let ratio = sx / sy;
            if !(MIN_ASPECT..=MAX_ASPECT).contains(&ratio) {
                continue;
            }
            let (tw, th) = (g.ink.w + 2, g.ink.h + 2);
            let mut hits = vec![0u32; (tw * th) as usize];
            let mut total = vec![0u32; (tw * th) as usize];
            for y in 0..ink.h {
                let v = (((y as f64 + 0.5) / sy) as u32).min(g.ink.h - 1) + 1;
                for x in 0..ink.w {
                    let u = (((x as f64 + 0.5) / sx) as u32).min(g.ink.w - 1) + 1;
                    let k = (v * tw + u) as usize;
                    total[k] += 1;
                    if mask.get(ink.x + x, ink.y + y) {
                        hits[k] += 1;
                    }
                }
            }
            let obs: Vec<u8> = hits
                .iter()
                .zip(&total)
                .map(|(&h, &t)| if t == 0 { 255 } else { (255 - 255 * h / t) as u8 })
                .collect();
            let score = ncc(&obs, &self.template(g));
            if best.is_none_or(|b| score > b.score) {
                best = Some(GlyphMatch { ch, score });
            }
        }
        best
    }
}

/// Group the mask's components inside `region` into text rows (by vertical
/// overlap or touching) and, within a row, into glyphs: pieces closer than 1/14 of the
/// row height merge. Rows are ordered top to bottom, glyphs left to right.
pub fn segment_glyphs(mask: &Mask, region: BBox) -> Vec<Vec<BBox>> {
    let Some(sub) = crop_mask(mask, region) else {
        return Vec::new();
    };
    let mut comps: Vec<BBox> = super::connected_components(&sub)
        .into_iter()
        .map(|c| BBox::new(c.bbox.x + region.x, c.bbox.y + region.y, c.bbox.w, c.bbox.h))
        .collect();
    comps.sort_by_key(|b| (b.y, b.x));

    let mut rows: Vec<(u32, u32, Vec<BBox>)> = Vec::new();
    for b in comps {
        match rows.last_mut() {
            Some((_, bottom, items)) if b.y <= *bottom => {
                *bottom = (*bottom).max(b.bottom());
                items.push(b);
            }
            _ => rows.push((b.y, b.bottom(), vec![b])),
        }
    }

    rows.into_iter()
        .map(|(top, bottom, mut items)| {
            let line_h = (bottom - top) as u64;
            items.sort_by_key(|b| (b.x, b.y));
            let mut glyphs: Vec<BBox> = Vec::new();
            for b in items {
                if let Some(last) = glyphs.last_mut() {
                    let gap = b.x.saturating_sub(last.right()) as u64;
                    if gap * 14 < line_h {
                        *last = union(*last, b);
                        continue;
                    }
                }
                glyphs.push(b);
            }
            glyphs
        })
        .collect()
}

pub fn union(a: BBox, b: BBox) -> BBox {
    let x = a.x.min(b.x);
    let y = a.y.min(b.y);
    BBox::new(x, y, a.right().max(b.right()) - x, a.bottom().max(b.bottom()) - y)
}

pub fn crop_mask(mask: &Mask, r: BBox) -> Option<Mask> {
    if !r.fits_in(mask.width, mask.height) {
        return None;
    }
    Some(Mask::from_fn(r.w, r.h, |x, y| mask.get(r.x + x, r.y + y)))
}

/// Read a row of glyph boxes; unrecognized glyphs (best score below
/// `min_score`) come back as `None`.
pub fn read_row(mask: &Mask, boxes: &[BBox], vocab: &[char], min_score: f64) -> Vec<Option<char>> {
    let atlas = GlyphAtlas::builtin();
    boxes
        .iter()
        .map(|&b| {
            atlas
                .recognize(mask, b, vocab)
                .filter(|m| m.score >= min_score)
                .map(|m| m.ch)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::{ink_mask, Canvas};

    #[test]
    fn atlas_has_full_vocabulary() {
        let a = GlyphAtlas::builtin();
        for ch in DIGITS.iter().chain(LETTERS).chain(OPERATORS) {
            assert!(a.get(*ch).is_some(), "{ch}");
        }
    }

    #[test]
    fn rendered_text_reads_back() {
        for scale in [2u32, 3, 5, 8] {
            let text = "12×3÷4-5+6=7089";
            let mut c = Canvas::new(800, 100, [250, 250, 250]);
            c.text(10, 10, scale, &text, [20, 20, 20]);
            let f = c.into_frame();
            let m = ink_mask(&f, 128);
            let rows = segment_glyphs(&m, BBox::new(0, 0, 800, 100));
            assert_eq!(rows.len(), 1);
            let vocab: Vec<char> = DIGITS.iter().chain(OPERATORS).copied().collect();
            let read: String = read_row(&m, &rows[0], &vocab, 0.8).into_iter().map(|c| c.unwrap()).collect();
            assert_eq!(read, text, "scale {scale}");
        }
    }

    #[test]
    fn every_glyph_matches_itself_best() {
        let a = GlyphAtlas::builtin();
        let vocab: Vec<char> = a.chars().collect();
        for &ch in &vocab {
            let mut c = Canvas::new(60, 60, [255, 255, 255]);
            c.text(5, 5, 4, &ch.to_string(), [0, 0, 0]);
            let m = ink_mask(&c.into_frame(), 128);
            let ink = m.ink_bbox(BBox::new(0, 0, 60, 60)).unwrap();
            let best = a.recognize(&m, ink, &vocab).unwrap();
            assert_eq!(best.ch, ch);
            assert!(best.score > 0.99);
        }
    }
}
