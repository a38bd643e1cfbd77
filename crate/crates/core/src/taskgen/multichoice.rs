use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::imgproc::palette::{self, INK};
use crate::imgproc::{Canvas, GlyphAtlas};
use crate::model::{BBox, Dimension, Frame, GroundTruth};

use super::{prompt, CorruptionMode, GenError, Instance, Params, Rng, MIN_FRAMES};

/// Frame from which the chosen option is marked.
const MARK_FROM: usize = 8;
const LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

pub(crate) struct MultiChoice {
    /// Dot counts of the three example panels.
    panels: [u32; 3],
    /// Dot counts under A..D.
    options: [u32; 4],
    answer: usize,
    width: u32,
    height: u32,
    bg: [u8; 3],
}

struct Layout {
    panels: [BBox; 4],
    options: [BBox; 4],
    border: u32,
    letter_scale: u32,
    dot_r: f64,
}

impl MultiChoice {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<MultiChoice, GenError> {
        let d: u32 = p.difficulty.pick(1, rng.random_range(1..=2), rng.random_range(2..=3));
        let k: u32 = rng.random_range(1..=3);
        let next = k + 3 * d;
        let mut pool: Vec<u32> = (1..=next + 3).filter(|&v| v != next).collect();
        pool.shuffle(rng);
        let mut options = [next, pool[0], pool[1], pool[2]];
        options.shuffle(rng);
        let answer = options.iter().position(|&v| v == next).unwrap();
        Ok(MultiChoice {
            panels: [k, k + d, k + 2 * d],
            options,
            answer,
            width: p.width,
            height: p.height,
            bg: p.bg,
        })
    }

    fn layout(&self) -> Layout {
        let (w, h) = (self.width, self.height);
        let gap = w / 40;
        let box_w = (w - 5 * gap) / 4;
        let row_h = (h - 3 * gap) / 2;
        let mk = |i: u32, y: u32| BBox::new(gap + i * (box_w + gap), y, box_w, row_h);
        let border = (w.min(h) / 120).max(3);
        let letter_scale = (row_h / 50).max(2);
        Layout {
            panels: [0, 1, 2, 3].map(|i| mk(i, gap)),
            options: [0, 1, 2, 3].map(|i| mk(i, 2 * gap + row_h)),
            border,
            letter_scale,
            dot_r: (box_w.min(row_h) as f64 / 16.0).max(3.0),
        }
    }

    fn dots(c: &mut Canvas, area: BBox, n: u32, r: f64) {
        let cols = 4u32;
        let rows = n.div_ceil(cols).max(1);
        let step = 3.0 * r;
        let total_w = step * cols.min(n) as f64;
        let total_h = step * rows as f64;
        let (cx, cy) = area.center();
        let x0 = cx - total_w / 2.0 + step / 2.0;
        let y0 = cy - total_h / 2.0 + step / 2.0;
        for i in 0..n {
            let (col, row) = (i % cols, i / cols);
            c.fill_circle((x0 + col as f64 * step).round(), (y0 + row as f64 * step).round(), r, INK);
        }
    }

    fn render(&self, marked: Option<usize>) -> Frame {
        let l = self.layout();
        let mut c = Canvas::new(self.width, self.height, self.bg);
        for (i, b) in l.panels.iter().enumerate() {
            c.fill_bbox(*b, [255, 255, 255]);
            c.rect_outline(*b, l.border, INK);
            if i < 3 {
                Self::dots(&mut c, *b, self.panels[i], l.dot_r);
            }
        }
        let atlas = GlyphAtlas::builtin();
        let letter_h = atlas.text_height(l.letter_scale);
        for (i, b) in l.options.iter().enumerate() {
            c.fill_bbox(*b, [255, 255, 255]);
            let color = if marked == Some(i) { palette::rgb("red") } else { INK };
            c.rect_outline(*b, l.border, color);
            let top = b.y + 3 * l.border;
            c.text_centered(b.center().0, (top + letter_h / 2) as f64, l.letter_scale, &LETTERS[i].to_string(), INK);
            let dots_y = top + letter_h + 2 * l.border;
            let area = BBox::new(b.x, dots_y, b.w, b.bottom() - l.border - dots_y);
            Self::dots(&mut c, area, self.options[i], l.dot_r);
        }
        c.into_frame()
    }
}

impl Instance for MultiChoice {
    fn truth(&self) -> GroundTruth {
        GroundTruth::ChoiceLetter {
            letter: LETTERS[self.answer],
        }
    }

    fn prompt(&self) -> String {
        prompt::compose(
            Dimension::SymbolicLogical,
            "The top row shows three panels of black dots that follow a counting rule, then an empty fourth panel; below are four options labeled A, B, C and D.",
            "Work out how many dots belong in the empty panel and pick the option that continues the rule.",
            "The chosen option's frame turns red while every other frame stays black.",
        )
    }

    fn frame_count(&self) -> usize {
        MIN_FRAMES
    }

    fn frame(&self, i: usize) -> Frame {
        self.render((i >= MARK_FROM).then_some(self.answer))
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongLetter {
            return None;
        }
        let wrong: Vec<usize> = (0..4).filter(|&i| i != self.answer).collect();
        let pick = wrong[rng.random_range(0..wrong.len())];
        Some((0..MIN_FRAMES).map(|i| self.render((i >= MARK_FROM).then_some(pick))).collect())
    }
}
