//! Final-state verifiers: each reads the last frame of a clip (plus the
//! sample's ground truth) and returns a [`Verdict`] with evidence.
//!
//! A verifier never panics or errors on a bad model output; wrong answers
//! are `pass = false`. Infrastructure faults (embedder/grounder/judge
//! failures) become metric-error verdicts so Pass@k can exclude them.

pub mod expr;
mod ocr;
mod qa;
mod visual;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgproc::HueBand;
use crate::model::{GroundTruth, Task, TaskSample, Verdict, VideoClip};
use crate::modelio::{Embedder, Grounder, HsvGrounder, JudgeClient, PatchHistogramEmbedder};
use crate::track::{self, TrackConfig};

pub use expr::{parse_expression, EvalError, Expr, Op, ParseError};
pub use ocr::{verify_arithmetic, verify_digit_sequence, verify_multichoice, verify_sudoku};
pub use qa::{question_prompt, verify_qa, QA_FRAMES};
pub use visual::{verify_embedding_region, verify_grounded, verify_match3, verify_sorting, TIE_TOLERANCE_PX};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid verifier configuration: {0}")]
    Config(String),
    #[error("clip is empty")]
    EmptyClip,
}

/// Thresholds and color bands. Everything is overridable per task through
/// `tasks.<task slug>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub ncc_threshold: f64,
    pub embed_threshold: f64,
    pub ssim_threshold: f64,
    pub edge_overlap_threshold: f64,
    pub red_hue_bands: Vec<HueBand>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tasks: BTreeMap<String, VerifyOverride>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOverride {
    pub ncc_threshold: Option<f64>,
    pub embed_threshold: Option<f64>,
    pub ssim_threshold: Option<f64>,
    pub edge_overlap_threshold: Option<f64>,
    pub red_hue_bands: Option<Vec<HueBand>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            ncc_threshold: 0.80,
            embed_threshold: 0.85,
            ssim_threshold: 0.70,
            edge_overlap_threshold: 0.60,
            red_hue_bands: vec![HueBand::new(0.0, 10.0, 0.5, 0.3), HueBand::new(350.0, 360.0, 0.5, 0.3)],
            tasks: BTreeMap::new(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        self.check_values()?;
        for (slug, o) in &self.tasks {
            if !Task::all().iter().any(|t| t.slug() == *slug) {
                return Err(VerifyError::Config(format!("unknown task `{slug}` in overrides")));
            }
            let merged = self.apply(o);
            merged.check_values().map_err(|e| VerifyError::Config(format!("tasks.{slug}: {e}")))?;
        }
        Ok(())
    }

    fn check_values(&self) -> Result<(), VerifyError> {
        let named = [
            ("ncc_threshold", self.ncc_threshold),
            ("embed_threshold", self.embed_threshold),
            ("ssim_threshold", self.ssim_threshold),
            ("edge_overlap_threshold", self.edge_overlap_threshold),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v < 1.0) {
                return Err(VerifyError::Config(format!("{name} = {v} is outside (0, 1)")));
            }
        }
        if self.red_hue_bands.is_empty() {
            return Err(VerifyError::Config("red_hue_bands is empty".into()));
        }
        for b in &self.red_hue_bands {
            let hue_ok = (0.0..=360.0).contains(&b.h_lo) && (0.0..=360.0).contains(&b.h_hi);
            let sv_ok = (0.0..=1.0).contains(&b.s_min) && (0.0..=1.0).contains(&b.v_min);
            if !hue_ok || !sv_ok {
                return Err(VerifyError::Config(format!("hue band {b:?} out of range")));
            }
        }
        Ok(())
    }

    fn apply(&self, o: &VerifyOverride) -> VerifyConfig {
        VerifyConfig {
            ncc_threshold: o.ncc_threshold.unwrap_or(self.ncc_threshold),
            embed_threshold: o.embed_threshold.unwrap_or(self.embed_threshold),
            ssim_threshold: o.ssim_threshold.unwrap_or(self.ssim_threshold),
            edge_overlap_threshold: o.edge_overlap_threshold.unwrap_or(self.edge_overlap_threshold),
            red_hue_bands: o.red_hue_bands.clone().unwrap_or_else(|| self.red_hue_bands.clone()),
            tasks: BTreeMap::new(),
        }
    }

    /// Effective settings for one task.
    pub fn for_task(&self, task: Task) -> VerifyConfig {
        match self.tasks.get(&task.slug()) {
            Some(o) => self.apply(o),
            None => VerifyConfig {
                tasks: BTreeMap::new(),
                ..self.clone()
            },
        }
    }
}

/// External models the verifiers may call.
#[derive(Clone)]
pub struct Deps {
    pub judge: Option<Arc<dyn JudgeClient>>,
    pub embedder: Arc<dyn Embedder>,
    pub grounder: Arc<dyn Grounder>,
}

impl Default for Deps {
    fn default() -> Self {
        Deps {
            judge: None,
            embedder: Arc::new(PatchHistogramEmbedder),
            grounder: Arc::new(HsvGrounder::default()),
        }
    }
}

impl Deps {
    pub fn with_judge(mut self, judge: Arc<dyn JudgeClient>) -> Self {
        self.judge = Some(judge);
        self
    }

    pub fn with_grounder(mut self, grounder: Arc<dyn Grounder>) -> Self {
        self.grounder = grounder;
        self
    }

    pub fn with_embedder(mut self, embedder: Arc<dyn Embedder>) -> Self {
        self.embedder = embedder;
        self
    }
}

/// Route a clip to the verifier for the sample's truth variant.
pub fn verify_final(
    sample: &TaskSample,
    clip: &VideoClip,
    deps: &Deps,
    cfg: &VerifyConfig,
    track_cfg: &TrackConfig,
) -> Result<Verdict, VerifyError> {
    if clip.is_empty() {
        return Err(VerifyError::EmptyClip);
    }
    let cfg = cfg.for_task(sample.task);
    let last = clip.last();
    let v = match &sample.truth {
        GroundTruth::SudokuGrid { solution, .. } => verify_sudoku(last, solution, &cfg),
        GroundTruth::ExprResult { value, .. } => verify_arithmetic(last, *value, &cfg),
        GroundTruth::ChoiceLetter { letter } => verify_multichoice(last, *letter, &cfg),
        GroundTruth::DigitSequence { digits } => verify_digit_sequence(last, digits, &cfg),
        GroundTruth::BarOrder { heights, order, count } => verify_sorting(last, heights, order, *count),
        GroundTruth::PixelTarget { reference } => verify_match3(last, reference, &cfg),
        GroundTruth::TargetRegion { bbox, reference } => {
            verify_embedding_region(last, *bbox, reference, deps.embedder.as_ref(), &cfg)
        }
        GroundTruth::ObjectSet { objects, mode } => verify_grounded(last, objects, mode, deps.grounder.as_ref()),
        GroundTruth::MazeTruth {
            maze,
            start,
            goal,
            agent_label,
            ..
        } => track::verify_maze(clip, maze, *start, *goal, agent_label, deps.grounder.as_ref(), track_cfg),
        GroundTruth::EliminationOrder { order } => {
            track::verify_elimination(clip, order, deps.grounder.as_ref(), track_cfg.n_samples)
        }
        GroundTruth::QaSet { questions } => {
            let judge = deps
                .judge
                .as_ref()
                .ok_or_else(|| VerifyError::Config("QA truth requires a judge client".into()))?;
            verify_qa(clip, questions, judge.as_ref())
        }
    };
    Ok(v)
}
