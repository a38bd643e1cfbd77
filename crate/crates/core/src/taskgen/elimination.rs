use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::imgproc::palette::{NamedColor, INK};
use crate::imgproc::Canvas;
use crate::model::{ColoredLabel, Dimension, Frame, GroundTruth};

use super::{pick_colors, prompt, CorruptionMode, GenError, Instance, Params, Rng, MIN_FRAMES};

pub(crate) fn label_for(color: &str) -> String {
    format!("{color} ball")
}

#[derive(Clone, Copy)]
struct Ball {
    x: f64,
    y: f64,
    color: &'static NamedColor,
    /// 1-based position in the elimination order.
    rank: usize,
}

pub(crate) struct Elimination {
    balls: Vec<Ball>,
    radius: f64,
    /// `removal[k]` is the frame from which the k-th ball in order is gone.
    removal: Vec<usize>,
    width: u32,
    height: u32,
    bg: [u8; 3],
}

fn removal_frames(n: usize) -> Vec<usize> {
    // Spread over frames 3..=MIN_FRAMES-1, the last removal on the final frame.
    let last = MIN_FRAMES - 1;
    let first = 3;
    (0..n)
        .map(|k| first + (k * (last - first) + (n - 1) / 2) / (n - 1).max(1))
        .collect()
}

impl Elimination {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Elimination, GenError> {
        let n = p.difficulty.pick(3, 4, 5);
        let colors = pick_colors(p, rng, n, &[]);
        if colors.len() < n {
            return Err(GenError::Failed("palette too small for elimination".into()));
        }
        let radius = (p.height.min(p.width) as f64 * 0.09).round();
        let slot_w = p.width as f64 / n as f64;
        let mut ranks: Vec<usize> = (1..=n).collect();
        ranks.shuffle(rng);
        let balls = (0..n)
            .map(|i| {
                let jitter_x = rng.random_range(-0.15..=0.15) * slot_w;
                let y = rng.random_range(0.3..=0.7) * p.height as f64;
                Ball {
                    x: ((i as f64 + 0.5) * slot_w + jitter_x).round(),
                    y: y.round(),
                    color: colors[i],
                    rank: ranks[i],
                }
            })
            .collect();
        Ok(Elimination {
            balls,
            radius,
            removal: removal_frames(n),
            width: p.width,
            height: p.height,
            bg: p.bg,
        })
    }

    fn in_order(&self) -> Vec<Ball> {
        let mut v = self.balls.clone();
        v.sort_by_key(|b| b.rank);
        v
    }

    fn render(&self, present: &[bool]) -> Frame {
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let scale = ((self.radius * 0.8) / 7.0).floor().max(2.0) as u32;
        for (b, &on) in self.balls.iter().zip(present) {
            if on {
                c.fill_circle(b.x, b.y, self.radius, b.color.rgb);
                c.text_centered(b.x, b.y, scale, &b.rank.to_string(), INK);
            }
        }
        c.into_frame()
    }

    /// Presence per ball (in `balls` order) given removal frames per rank.
    fn presence(&self, i: usize, removal: &[usize]) -> Vec<bool> {
        self.balls.iter().map(|b| i < removal[b.rank - 1]).collect()
    }
}

impl Instance for Elimination {
    fn truth(&self) -> GroundTruth {
        GroundTruth::EliminationOrder {
            order: self
                .in_order()
                .into_iter()
                .map(|b| ColoredLabel {
                    label: label_for(b.color.name),
                    color: b.color.name.into(),
                })
                .collect(),
        }
    }

    fn prompt(&self) -> String {
        let n = self.balls.len();
        prompt::compose(
            Dimension::Structural,
            &format!("{n} colored balls rest on a plain background, each marked with a number from 1 to {n}."),
            "The balls disappear one at a time in increasing order of their numbers, starting with ball 1.",
            "No new ball appears, and the scene ends empty.",
        )
    }

    fn frame_count(&self) -> usize {
        MIN_FRAMES
    }

    fn frame(&self, i: usize) -> Frame {
        self.render(&self.presence(i, &self.removal))
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongEliminationOrder {
            return None;
        }
        let n = self.balls.len();
        let k = rng.random_range(0..n - 1);
        let mut removal = self.removal.clone();
        removal.swap(k, k + 1);
        Some((0..MIN_FRAMES).map(|i| self.render(&self.presence(i, &removal))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removals_are_distinct_and_end_on_last_frame() {
        for n in 3..=5 {
            let r = removal_frames(n);
            assert!(r.windows(2).all(|w| w[0] < w[1]), "{r:?}");
            assert_eq!(*r.last().unwrap(), MIN_FRAMES - 1);
        }
    }
}
