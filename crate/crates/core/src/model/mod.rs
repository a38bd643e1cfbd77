//! Domain data model shared by every other module: frames and clips, task
//! samples with their ground truth, verdicts, and the dataset layout on disk.

mod dataset;
mod frame;
mod task;
mod truth;
mod verdict;

use serde::{Deserialize, Serialize};

pub use dataset::{
    load_dataset, read_clip, read_manifest, write_clip, write_dataset, Dataset, DatasetError,
    Manifest, SampleEntry, SampleInfo, SCHEMA_VERSION,
};
pub use frame::{uniform_indices, Frame, FrameError, VideoClip};
pub use task::{Difficulty, Dimension, Task};
pub use truth::{
    Cell, ColoredLabel, GroundMode, GroundTruth, LabeledBox, MazeGrid, QaItem, Rational,
};
pub use verdict::{
    read_verdicts, write_verdicts, Evidence, LabelTally, Metric, PointClass, QaAnswer, Verdict,
};

/// Axis-aligned pixel rectangle, top-left origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        BBox { x, y, w, h }
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x as f64
            && y >= self.y as f64
            && x < (self.x + self.w) as f64
            && y < (self.y + self.h) as f64
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= width && self.bottom() <= height
    }

    /// Grows the box by `m` pixels on each side, clamped to `(width, height)`.
    pub fn expand(&self, m: u32, width: u32, height: u32) -> BBox {
        let x = self.x.saturating_sub(m);
        let y = self.y.saturating_sub(m);
        let r = (self.right() + m).min(width);
        let b = (self.bottom() + m).min(height);
        BBox::new(x, y, r - x, b - y)
    }
}

/// One benchmark item.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskSample {
    pub id: String,
    pub dimension: Dimension,
    pub task: Task,
    pub difficulty: Difficulty,
    pub initial: Frame,
    pub target: Frame,
    pub prompt: String,
    pub truth: GroundTruth,
    pub seed: u64,
}

impl TaskSample {
    pub fn validate(&self) -> Result<(), String> {
        if self.task.dimension() != self.dimension {
            return Err(format!(
                "task `{}` does not belong to dimension `{}`",
                self.task, self.dimension
            ));
        }
        if self.prompt.trim().is_empty() {
            return Err("prompt is empty".into());
        }
        if let Some(kind) = GroundTruth::expected_kind(self.task) {
            if self.truth.kind() != kind {
                return Err(format!(
                    "task `{}` expects truth `{kind}`, found `{}`",
                    self.task,
                    self.truth.kind()
                ));
            }
        }
        self.truth.validate()
    }

    pub fn info(&self) -> SampleInfo {
        SampleInfo {
            id: self.id.clone(),
            dimension: self.dimension,
            task: self.task,
            difficulty: self.difficulty,
        }
    }
}
