use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::imgproc::palette::{NamedColor, INK};
use crate::imgproc::Canvas;
use crate::model::{BBox, Dimension, Frame, GroundMode, GroundTruth, LabeledBox};

use super::{hold_len, pick_colors, prompt, CorruptionMode, GenError, Instance, Params, Rng};

const COLS: u32 = 6;
const ROWS: u32 = 5;

#[derive(Clone, Copy)]
struct Obj {
    cx: i64,
    cy: i64,
    color: &'static NamedColor,
}

pub(crate) struct Counting {
    target_count: usize,
    initial_count: usize,
    color: &'static NamedColor,
    /// Target-color objects in appearance order.
    targets: Vec<Obj>,
    distractors: Vec<Obj>,
    /// Slots left empty, for the over-count corruption.
    spare: Vec<Obj>,
    radius: i64,
    width: u32,
    height: u32,
    bg: [u8; 3],
}

pub(crate) fn label_for(color: &str) -> String {
    format!("{color} circle")
}

impl Counting {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Counting, GenError> {
        let target_count = p.difficulty.pick(rng.random_range(3..=5), rng.random_range(6..=9), rng.random_range(10..=15));
        let initial_count = rng.random_range(1..target_count);
        let colors = pick_colors(p, rng, 3, &[]);
        let color = colors[0];
        let n_distract = rng.random_range(2..=4);

        let top = (p.height as f64 * 0.26) as u32;
        let (area_w, area_h) = ((p.width as f64 * 0.92) as u32, p.height - top - p.height / 20);
        let (sw, sh) = (area_w / COLS, area_h / ROWS);
        let x0 = (p.width - sw * COLS) / 2;
        let radius = (sw.min(sh) as f64 * 0.3) as i64;
        let mut slots: Vec<(i64, i64)> = (0..ROWS)
            .flat_map(|r| (0..COLS).map(move |c| (c, r)))
            .map(|(c, r)| ((x0 + c * sw + sw / 2) as i64, (top + r * sh + sh / 2) as i64))
            .collect();
        slots.shuffle(rng);
        let mut it = slots.into_iter();
        let targets: Vec<Obj> = (&mut it)
            .take(target_count)
            .map(|(cx, cy)| Obj { cx, cy, color })
            .collect();
        let distractors: Vec<Obj> = (&mut it)
            .take(n_distract)
            .enumerate()
            .map(|(i, (cx, cy))| Obj {
                cx,
                cy,
                color: colors[1 + i % 2],
            })
            .collect();
        let spare: Vec<Obj> = it.map(|(cx, cy)| Obj { cx, cy, color }).collect();
        Ok(Counting {
            target_count,
            initial_count,
            color,
            targets,
            distractors,
            spare,
            radius,
            width: p.width,
            height: p.height,
            bg: p.bg,
        })
    }

    fn render(&self, targets: &[Obj]) -> Frame {
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let scale = ((self.height as f64 * 0.12) / 7.0).floor().max(2.0) as u32;
        c.text_centered(self.width as f64 / 2.0, self.height as f64 * 0.12, scale, &self.target_count.to_string(), INK);
        for o in targets.iter().chain(&self.distractors) {
            c.fill_circle(o.cx as f64, o.cy as f64, self.radius as f64, o.color.rgb);
        }
        c.into_frame()
    }

    fn bbox(&self, o: &Obj) -> BBox {
        let r = self.radius;
        BBox::new((o.cx - r) as u32, (o.cy - r) as u32, (2 * r + 1) as u32, (2 * r + 1) as u32)
    }
}

impl Instance for Counting {
    fn truth(&self) -> GroundTruth {
        let objects = self
            .targets
            .iter()
            .chain(&self.distractors)
            .map(|o| LabeledBox {
                label: label_for(o.color.name),
                bbox: self.bbox(o),
            })
            .collect();
        GroundTruth::ObjectSet {
            objects,
            mode: GroundMode::Count,
        }
    }

    fn prompt(&self) -> String {
        let c = self.color.name;
        prompt::compose(
            Dimension::SpatialPattern,
            &format!("A board shows the number {} above a few colored circles, some of them {c}.", self.target_count),
            &format!("New {c} circles appear one at a time in empty spots until the number of {c} circles equals the number shown."),
            "Circles of other colors stay exactly where they are and no circle disappears.",
        )
    }

    fn frame_count(&self) -> usize {
        hold_len(self.target_count - self.initial_count)
    }

    fn frame(&self, i: usize) -> Frame {
        let k = (self.initial_count + i).min(self.target_count);
        self.render(&self.targets[..k])
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongCount {
            return None;
        }
        let over = !self.spare.is_empty() && (rng.random_bool(0.5) || self.target_count < 2);
        let last = if over {
            let mut t = self.targets.clone();
            t.push(self.spare[0]);
            self.render(&t)
        } else {
            self.render(&self.targets[..self.target_count - 1])
        };
        let total = self.frame_count();
        Some((0..total).map(|i| if i + 1 >= total { last.clone() } else { self.frame(i) }).collect())
    }
}
