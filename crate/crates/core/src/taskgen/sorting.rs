use rand::seq::{IndexedRandom, SliceRandom};

use crate::imgproc::palette::{self, INK};
use crate::imgproc::Canvas;
use crate::model::{Dimension, Frame, GroundTruth};

use super::{hold_len, prompt, CorruptionMode, GenError, Instance, Params, Rng};

/// Minimum height difference between any two bars, in pixels.
pub(crate) const MIN_GAP: u32 = 20;

pub(crate) struct Sorting {
    heights: Vec<u32>,
    /// Arrangements (indices into `heights`) after each bubble-sort swap.
    states: Vec<Vec<usize>>,
    width: u32,
    height: u32,
    bg: [u8; 3],
}

impl Sorting {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Sorting, GenError> {
        let n = p.difficulty.pick(4, 6, 8);
        let max_h = (p.height as f64 * 0.7) as u32;
        let min_h = (p.height as f64 * 0.08).max(12.0) as u32;
        let step = MIN_GAP + 4;
        let levels: Vec<u32> = (0..).map(|j| min_h + j * step).take_while(|&h| h <= max_h).collect();
        if levels.len() < n {
            return Err(GenError::Failed("canvas too short for distinct bars".into()));
        }
        let mut heights: Vec<u32> = levels.choose_multiple(rng, n).copied().collect();
        heights.shuffle(rng);
        while heights.windows(2).all(|w| w[0] < w[1]) {
            heights.shuffle(rng);
        }
        let mut arr: Vec<usize> = (0..n).collect();
        let mut states = vec![arr.clone()];
        for pass in 0..n {
            for i in 0..n - 1 - pass {
                if heights[arr[i]] > heights[arr[i + 1]] {
                    arr.swap(i, i + 1);
                    states.push(arr.clone());
                }
            }
        }
        Ok(Sorting {
            heights,
            states,
            width: p.width,
            height: p.height,
            bg: p.bg,
        })
    }

    fn render(&self, arrangement: &[usize]) -> Frame {
        let n = arrangement.len() as u32;
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let margin = self.width / 10;
        let slot = (self.width - 2 * margin) / n;
        let bar_w = (slot as f64 * 0.6) as i64;
        let base = (self.height as f64 * 0.86) as i64;
        c.fill_rect(margin as i64 - 10, base, (slot * n) as i64 + 20, 4, INK);
        for (pos, &idx) in arrangement.iter().enumerate() {
            let h = self.heights[idx] as i64;
            let x = (margin + pos as u32 * slot) as i64 + (slot as i64 - bar_w) / 2;
            c.fill_rect(x, base - h, bar_w, h, palette::rgb("blue"));
        }
        c.into_frame()
    }

    fn order(&self) -> Vec<usize> {
        let mut o: Vec<usize> = (0..self.heights.len()).collect();
        o.sort_by_key(|&i| (self.heights[i], i));
        o
    }
}

impl Instance for Sorting {
    fn truth(&self) -> GroundTruth {
        GroundTruth::BarOrder {
            heights: self.heights.clone(),
            order: self.order(),
            count: self.heights.len(),
        }
    }

    fn prompt(&self) -> String {
        let n = self.heights.len();
        prompt::compose(
            Dimension::Structural,
            &format!("{n} blue bars of different heights stand side by side on a baseline."),
            "Neighboring bars swap places one pair at a time, each taller bar moving to the right of a shorter one.",
            "Finally the bars stand in ascending order of height from left to right.",
        )
    }

    fn frame_count(&self) -> usize {
        hold_len(self.states.len() - 1)
    }

    fn frame(&self, i: usize) -> Frame {
        self.render(&self.states[i.min(self.states.len() - 1)])
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::ShuffledBars {
            return None;
        }
        let sorted = self.order();
        let mut wrong = sorted.clone();
        while wrong == sorted {
            wrong.shuffle(rng);
        }
        let last = self.render(&wrong);
        let total = self.frame_count();
        let cut = total / 2;
        Some((0..total).map(|i| if i >= cut { last.clone() } else { self.frame(i) }).collect())
    }
}
