use rand::Rng as _;

use crate::imgproc::palette::INK;
use crate::imgproc::{Canvas, GlyphAtlas};
use crate::model::{Dimension, Difficulty, Frame, GroundTruth};

use super::{hold_len, prompt, CorruptionMode, GenError, Instance, Params, Rng};

const BLANK: [u8; 3] = [200, 200, 200];
const FILL: [u8; 3] = [30, 40, 150];

pub(crate) struct Sequence {
    digits: Vec<u8>,
    blanks: usize,
    scale: u32,
    width: u32,
    height: u32,
    bg: [u8; 3],
}

fn arithmetic(len: usize, max_step: i32, rng: &mut Rng) -> Option<Vec<u8>> {
    let mut d = rng.random_range(1..=max_step);
    if rng.random_bool(0.5) {
        d = -d;
    }
    let span = d.abs() * (len as i32 - 1);
    if span > 9 {
        return None;
    }
    let start = if d > 0 { rng.random_range(0..=9 - span) } else { rng.random_range(span..=9) };
    Some((0..len as i32).map(|i| (start + i * d) as u8).collect())
}

fn cyclic(len: usize, rng: &mut Rng) -> Vec<u8> {
    let period = rng.random_range(2..=3);
    let mut motif: Vec<u8> = Vec::new();
    while motif.len() < period {
        let v = rng.random_range(0..=9);
        if !motif.contains(&v) {
            motif.push(v);
        }
    }
    (0..len).map(|i| motif[i % period]).collect()
}

impl Sequence {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Sequence, GenError> {
        let len = p.difficulty.pick(4, 5, 6);
        let blanks = p.difficulty.pick(1, 2, 3);
        let digits = loop {
            let seq = match p.difficulty {
                Difficulty::Easy | Difficulty::Medium => arithmetic(len, 2, rng),
                Difficulty::Hard => {
                    if rng.random_bool(0.5) {
                        Some(cyclic(len, rng))
                    } else {
                        arithmetic(len, 1, rng)
                    }
                }
            };
            if let Some(s) = seq {
                break s;
            }
        };
        let atlas = GlyphAtlas::builtin();
        let slots = 2 * len - 1;
        let by_w = p.width as f64 * 0.8 / (slots as f64 * atlas.advance(1) as f64);
        let by_h = p.height as f64 * 0.3 / atlas.text_height(1) as f64;
        let scale = by_w.min(by_h).floor().clamp(2.0, 16.0) as u32;
        Ok(Sequence {
            digits,
            blanks,
            scale,
            width: p.width,
            height: p.height,
            bg: p.bg,
        })
    }

    /// `filled` blanks (from the left) have been written.
    fn render(&self, digits: &[u8], filled: usize) -> Frame {
        let atlas = GlyphAtlas::builtin();
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let n = digits.len();
        let adv = 2 * atlas.advance(self.scale) as i64;
        let glyph_w = atlas.text_width("0", self.scale) as i64;
        let glyph_h = atlas.text_height(self.scale) as i64;
        let total = adv * (n as i64 - 1) + glyph_w;
        let x0 = (self.width as i64 - total) / 2;
        let y0 = (self.height as i64 - glyph_h) / 2;
        let first_blank = n - self.blanks;
        for (i, &d) in digits.iter().enumerate() {
            let x = x0 + i as i64 * adv;
            if i < first_blank {
                c.text(x, y0, self.scale, &d.to_string(), INK);
            } else if i < first_blank + filled {
                c.text(x, y0, self.scale, &d.to_string(), FILL);
            } else {
                let pad = self.scale as i64;
                c.fill_rect(x - pad, y0 - pad, glyph_w + 2 * pad, glyph_h + 2 * pad, BLANK);
            }
        }
        c.into_frame()
    }

    /// Blanks filled in frame `i`: one per frame after a four-frame pause.
    fn filled_at(&self, i: usize) -> usize {
        if i + 1 >= self.frame_count() {
            return self.blanks;
        }
        i.saturating_sub(3).min(self.blanks)
    }
}

impl Instance for Sequence {
    fn truth(&self) -> GroundTruth {
        GroundTruth::DigitSequence {
            digits: self.digits.clone(),
        }
    }

    fn prompt(&self) -> String {
        let shown: Vec<String> = self.digits[..self.digits.len() - self.blanks].iter().map(|d| d.to_string()).collect();
        prompt::compose(
            Dimension::Structural,
            &format!("A row of digits {} is followed by {} empty gray boxes.", shown.join(" "), self.blanks),
            "Find the rule behind the visible digits and write the next digits into the gray boxes from left to right, one per box.",
            "The completed row continues the same pattern and no gray box remains.",
        )
    }

    fn frame_count(&self) -> usize {
        hold_len(self.blanks + 3)
    }

    fn frame(&self, i: usize) -> Frame {
        self.render(&self.digits, self.filled_at(i))
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongDigit {
            return None;
        }
        let n = self.digits.len();
        let pos = rng.random_range(n - self.blanks..n);
        let mut wrong = self.digits.clone();
        let alt: Vec<u8> = (0..=9).filter(|&d| d != wrong[pos]).collect();
        wrong[pos] = alt[rng.random_range(0..alt.len())];
        let total = self.frame_count();
        Some(
            (0..total)
                .map(|i| {
                    if i + 1 >= total {
                        self.render(&wrong, self.blanks)
                    } else {
                        self.frame(i)
                    }
                })
                .collect(),
        )
    }
}
