//! Procedural generators for the built-in task subset, their ground-truth
//! videos, and negative-control corruptions.

mod arithmetic;
mod counting;
mod elimination;
mod graph;
mod match3;
mod maze;
mod multichoice;
pub mod prompt;
pub mod rng;
mod sequence;
mod sorting;
mod sudoku;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imgproc::palette::{self, NamedColor, BACKGROUNDS};
use crate::model::{Difficulty, Dimension, Frame, GroundTruth, Task, TaskSample, VideoClip};

pub use rng::{derive_seed, splitmix64, Rng};
pub use sudoku::{count_solutions, is_valid_solution};

/// Nominal frame rate of generated clips.
pub const FPS: f64 = 8.0;
/// Every ground-truth video has at least this many frames.
pub const MIN_FRAMES: usize = 16;
pub const MIN_CANVAS: u32 = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("task `{0}` has no built-in generator; provide its samples through a dataset manifest (manifest.json) instead")]
    Unsupported(Task),
    #[error("corruption `{mode}` does not apply to task `{task}`")]
    Inapplicable { mode: CorruptionMode, task: Task },
    #[error("canvas {0}x{1} is below the {MIN_CANVAS}x{MIN_CANVAS} minimum")]
    Canvas(u32, u32),
    #[error("unknown palette color `{0}`")]
    Palette(String),
    #[error("sample `{0}` does not match the instance regenerated from its seed")]
    Mismatch(String),
    #[error("generation failed: {0}")]
    Failed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    WrongDigit,
    WrongLetter,
    WallCross,
    WrongEliminationOrder,
    ShuffledBars,
    WrongCount,
    OffTargetRegion,
    /// First frame repeated.
    StaticVideo,
}

impl CorruptionMode {
    pub const ALL: [CorruptionMode; 8] = [
        CorruptionMode::WrongDigit,
        CorruptionMode::WrongLetter,
        CorruptionMode::WallCross,
        CorruptionMode::WrongEliminationOrder,
        CorruptionMode::ShuffledBars,
        CorruptionMode::WrongCount,
        CorruptionMode::OffTargetRegion,
        CorruptionMode::StaticVideo,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            CorruptionMode::WrongDigit => "wrong_digit",
            CorruptionMode::WrongLetter => "wrong_letter",
            CorruptionMode::WallCross => "wall_cross",
            CorruptionMode::WrongEliminationOrder => "wrong_elimination_order",
            CorruptionMode::ShuffledBars => "shuffled_bars",
            CorruptionMode::WrongCount => "wrong_count",
            CorruptionMode::OffTargetRegion => "off_target_region",
            CorruptionMode::StaticVideo => "static_video",
        }
    }

    /// Applicability table.
    pub fn applies_to(self, task: Task) -> bool {
        use CorruptionMode::*;
        use Task::*;
        if !task.is_supported() {
            return false;
        }
        match self {
            StaticVideo => true,
            WrongDigit => matches!(task, SudokuCompletion | RuleExtrapolation | ArithmeticOperations),
            WrongLetter => task == VisualDeduction,
            WallCross => task == MazeSolving,
            WrongEliminationOrder => task == TemporalOrdering,
            ShuffledBars => task == SortingNumbers,
            WrongCount => matches!(task, CountingObjects | GraphTraversal),
            OffTargetRegion => task == GameMoveReasoning,
        }
    }

    pub fn applicable(task: Task) -> Vec<CorruptionMode> {
        Self::ALL.into_iter().filter(|m| m.applies_to(task)).collect()
    }
}

impl fmt::Display for CorruptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for CorruptionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|m| m.slug() == norm)
            .ok_or_else(|| format!("unknown corruption mode `{s}`"))
    }
}

/// Square tasks render on 720×720, wide layouts on 1280×720.
pub fn default_canvas(task: Task) -> (u32, u32) {
    use Task::*;
    match task {
        SortingNumbers | ArithmeticOperations | RuleExtrapolation | TemporalOrdering | VisualDeduction => (1280, 720),
        _ => (720, 720),
    }
}

/// Inputs every generator draws on.
pub(crate) struct Params {
    pub difficulty: Difficulty,
    pub width: u32,
    pub height: u32,
    pub bg: [u8; 3],
    /// Chromatic colors free for random choice.
    pub palette: Vec<&'static NamedColor>,
}

/// A generated puzzle instance that can render any frame of its
/// ground-truth video.
pub(crate) trait Instance: Send + Sync {
    fn truth(&self) -> GroundTruth;
    fn prompt(&self) -> String;
    fn frame_count(&self) -> usize;
    fn frame(&self, i: usize) -> Frame;
    /// Task-specific corruption; `StaticVideo` is handled generically.
    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>>;
}

fn task_key(task: Task) -> u64 {
    rng::label_key(task.name())
}

fn instance_rng(task: Task, difficulty: Difficulty, seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(derive_seed(seed, &[task_key(task), rng::label_key(difficulty.slug())]))
}

pub fn default_palette() -> Vec<&'static NamedColor> {
    palette::PALETTE.iter().filter(|c| c.hue.is_some()).collect()
}

pub fn resolve_palette(names: &[String]) -> Result<Vec<&'static NamedColor>, GenError> {
    if names.is_empty() {
        return Ok(default_palette());
    }
    let mut out = Vec::new();
    for n in names {
        match palette::named(n) {
            Some(c) if c.hue.is_some() => out.push(c),
            _ => return Err(GenError::Palette(n.clone())),
        }
    }
    if out.len() < 5 {
        return Err(GenError::Palette(format!("{names:?} (need at least 5 chromatic colors)")));
    }
    Ok(out)
}

fn build(
    task: Task,
    difficulty: Difficulty,
    seed: u64,
    canvas: (u32, u32),
    pal: &[&'static NamedColor],
) -> Result<Box<dyn Instance>, GenError> {
    if !task.is_supported() {
        return Err(GenError::Unsupported(task));
    }
    if canvas.0 < MIN_CANVAS || canvas.1 < MIN_CANVAS {
        return Err(GenError::Canvas(canvas.0, canvas.1));
    }
    let mut rng = instance_rng(task, difficulty, seed);
    let params = Params {
        difficulty,
        width: canvas.0,
        height: canvas.1,
        bg: *BACKGROUNDS.choose(&mut rng).unwrap(),
        palette: pal.to_vec(),
    };
    Ok(match task {
        Task::MazeSolving => Box::new(maze::Maze::generate(&params, &mut rng)?),
        Task::SudokuCompletion => Box::new(sudoku::Sudoku::generate(&params, &mut rng)?),
        Task::SortingNumbers => Box::new(sorting::Sorting::generate(&params, &mut rng)?),
        Task::ArithmeticOperations => Box::new(arithmetic::Arithmetic::generate(&params, &mut rng)?),
        Task::CountingObjects => Box::new(counting::Counting::generate(&params, &mut rng)?),
        Task::VisualDeduction => Box::new(multichoice::MultiChoice::generate(&params, &mut rng)?),
        Task::RuleExtrapolation => Box::new(sequence::Sequence::generate(&params, &mut rng)?),
        Task::GameMoveReasoning => Box::new(match3::Match3::generate(&params, &mut rng)?),
        Task::TemporalOrdering => Box::new(elimination::Elimination::generate(&params, &mut rng)?),
        Task::GraphTraversal => Box::new(graph::Graph::generate(&params, &mut rng)?),
        _ => return Err(GenError::Unsupported(task)),
    })
}

fn sample_from(task: Task, difficulty: Difficulty, seed: u64, inst: &dyn Instance, id: String) -> TaskSample {
    TaskSample {
        id,
        dimension: task.dimension(),
        task,
        difficulty,
        initial: inst.frame(0),
        target: inst.frame(inst.frame_count() - 1),
        prompt: inst.prompt(),
        truth: inst.truth(),
        seed,
    }
}

pub fn sample_id(task: Task, difficulty: Difficulty, index: usize) -> String {
    format!("{}-{}-{:03}", task.slug(), difficulty.slug(), index)
}

/// Deterministic in `(task, difficulty, seed)` on the task's default canvas.
pub fn generate(task: Task, difficulty: Difficulty, seed: u64) -> Result<TaskSample, GenError> {
    generate_with(task, difficulty, seed, default_canvas(task))
}

pub fn generate_with(
    task: Task,
    difficulty: Difficulty,
    seed: u64,
    canvas: (u32, u32),
) -> Result<TaskSample, GenError> {
    let inst = build(task, difficulty, seed, canvas, &default_palette())?;
    Ok(sample_from(task, difficulty, seed, inst.as_ref(), sample_id(task, difficulty, 0)))
}

/// Rebuild the puzzle behind `sample` and check it reproduces the stored
/// initial frame.
fn rebuild(sample: &TaskSample, pal: &[&'static NamedColor]) -> Result<Box<dyn Instance>, GenError> {
    let inst = build(sample.task, sample.difficulty, sample.seed, sample.initial.dims(), pal)?;
    if inst.frame(0) != sample.initial {
        return Err(GenError::Mismatch(sample.id.clone()));
    }
    Ok(inst)
}

fn rebuild_any(sample: &TaskSample, pal: Option<&[&'static NamedColor]>) -> Result<Box<dyn Instance>, GenError> {
    match pal {
        Some(p) => rebuild(sample, p),
        None => rebuild(sample, &default_palette()),
    }
}

/// Ground-truth video: frame 0 is `sample.initial`, the last frame is
/// `sample.target`, at least [`MIN_FRAMES`] frames.
pub fn render_gt_video(sample: &TaskSample) -> Result<VideoClip, GenError> {
    render_gt_video_with(sample, None)
}

pub fn render_gt_video_with(
    sample: &TaskSample,
    pal: Option<&[&'static NamedColor]>,
) -> Result<VideoClip, GenError> {
    let inst = rebuild_any(sample, pal)?;
    let frames: Vec<Frame> = (0..inst.frame_count()).map(|i| inst.frame(i)).collect();
    VideoClip::new(frames, FPS).map_err(|e| GenError::Failed(e.to_string()))
}

/// The generator's deterministic prompt for `sample`, rebuilt from its
/// task, difficulty and seed.
pub fn template_prompt(sample: &TaskSample) -> Result<String, GenError> {
    Ok(rebuild_any(sample, None)?.prompt())
}

/// A clip that violates exactly the property `mode` targets.
pub fn corrupt(sample: &TaskSample, mode: CorruptionMode, seed: u64) -> Result<VideoClip, GenError> {
    corrupt_with(sample, mode, seed, None)
}

pub fn corrupt_with(
    sample: &TaskSample,
    mode: CorruptionMode,
    seed: u64,
    pal: Option<&[&'static NamedColor]>,
) -> Result<VideoClip, GenError> {
    if !mode.applies_to(sample.task) {
        return Err(GenError::Inapplicable {
            mode,
            task: sample.task,
        });
    }
    let inst = rebuild_any(sample, pal)?;
    let frames = if mode == CorruptionMode::StaticVideo {
        vec![sample.initial.clone(); inst.frame_count()]
    } else {
        use rand::SeedableRng;
        let mut rng = Rng::seed_from_u64(derive_seed(seed, &[rng::label_key(mode.slug()), task_key(sample.task)]));
        inst.corrupt(mode, &mut rng).ok_or(GenError::Inapplicable {
            mode,
            task: sample.task,
        })?
    };
    VideoClip::new(frames, FPS).map_err(|e| GenError::Failed(e.to_string()))
}

/// Batch recipe. `counts` is the number of samples per task at each listed
/// difficulty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Overrides each task's default canvas when set.
    pub canvas: Option<(u32, u32)>,
    pub seed: u64,
    pub difficulties: Vec<Difficulty>,
    pub counts: BTreeMap<Task, usize>,
    /// Chromatic color names generators may pick from; empty means all.
    pub palette: Vec<String>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            canvas: None,
            seed: 0,
            difficulties: Difficulty::ALL.to_vec(),
            counts: default_counts(),
            palette: Vec::new(),
        }
    }
}

/// About 150 samples per dimension, split evenly over the dimension's
/// supported tasks and the three difficulties (rounded to nearest).
/// Dimensions without a built-in generator get nothing.
pub fn default_counts() -> BTreeMap<Task, usize> {
    let mut out = BTreeMap::new();
    for d in Dimension::ALL {
        let tasks: Vec<Task> = d.tasks().into_iter().filter(|t| t.is_supported()).collect();
        if tasks.is_empty() {
            continue;
        }
        let slots = tasks.len() * Difficulty::ALL.len();
        let per = ((150 + slots / 2) / slots).max(1);
        for t in tasks {
            out.insert(t, per);
        }
    }
    out
}

/// Give up on truth-distinctness after this many seed bumps per sample.
const MAX_BUMPS: u64 = 64;

/// Generate every `(task, difficulty)` group; within a group, seeds are
/// bumped until each truth payload is distinct.
pub fn generate_batch(cfg: &GenConfig) -> Result<Vec<TaskSample>, GenError> {
    let pal = resolve_palette(&cfg.palette)?;
    let mut groups = Vec::new();
    for (&task, &n) in &cfg.counts {
        if !task.is_supported() {
            return Err(GenError::Unsupported(task));
        }
        for &d in &cfg.difficulties {
            groups.push((task, d, n));
        }
    }
    let results: Vec<Result<Vec<TaskSample>, GenError>> = groups
        .par_iter()
        .map(|&(task, d, n)| {
            let canvas = cfg.canvas.unwrap_or_else(|| default_canvas(task));
            let group_seed = derive_seed(cfg.seed, &[task_key(task), rng::label_key(d.slug())]);
            let mut seen: Vec<String> = Vec::new();
            let mut out = Vec::with_capacity(n);
            let mut next = 0u64;
            for idx in 0..n {
                let mut bumps = 0;
                loop {
                    let seed = derive_seed(group_seed, &[next]);
                    next += 1;
                    let inst = build(task, d, seed, canvas, &pal)?;
                    let key = serde_json::to_string(&inst.truth()).map_err(|e| GenError::Failed(e.to_string()))?;
                    if !seen.contains(&key) || bumps >= MAX_BUMPS {
                        seen.push(key);
                        out.push(sample_from(task, d, seed, inst.as_ref(), sample_id(task, d, idx)));
                        break;
                    }
                    bumps += 1;
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    Ok(all)
}

// Shared helpers for the generators.

pub(crate) fn hold_len(changes: usize) -> usize {
    (changes + 1).max(MIN_FRAMES)
}

pub(crate) fn pick_colors(p: &Params, rng: &mut Rng, n: usize, exclude: &[&str]) -> Vec<&'static NamedColor> {
    use rand::seq::SliceRandom;
    let mut pool: Vec<&'static NamedColor> =
        p.palette.iter().copied().filter(|c| !exclude.contains(&c.name)).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsupported_task_errors() {
        let e = generate(Task::OddOneOut, Difficulty::Easy, 1).unwrap_err();
        assert!(matches!(e, GenError::Unsupported(Task::OddOneOut)));
        assert!(e.to_string().contains("manifest"));
    }

    #[test]
    fn applicability_table() {
        for t in Task::SUPPORTED {
            let modes = CorruptionMode::applicable(t);
            assert!(modes.contains(&CorruptionMode::StaticVideo));
            assert!(modes.len() >= 2, "{t}");
        }
        assert!(!CorruptionMode::WallCross.applies_to(Task::SudokuCompletion));
    }

    #[test]
    fn default_counts_cover_each_dimension() {
        let c = default_counts();
        for d in Dimension::ALL {
            let total: usize = d.tasks().iter().filter_map(|t| c.get(t)).map(|n| n * 3).sum();
            if d.tasks().iter().any(|t| t.is_supported()) {
                assert!((140..=160).contains(&total), "{d}: {total}");
            } else {
                assert_eq!(total, 0);
            }
        }
    }

    #[test]
    fn small_canvas_rejected() {
        assert!(matches!(
            generate_with(Task::MazeSolving, Difficulty::Easy, 1, (200, 400)),
            Err(GenError::Canvas(200, 400))
        ));
    }
}
