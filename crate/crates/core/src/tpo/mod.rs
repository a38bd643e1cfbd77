//! Test-time prompt optimisation: generate candidates, have a judge critique
//! them (loss), turn the critique into edit suggestions (gradient), and apply
//! them to the prompt (update). Also the single-shot rewriting baselines,
//! reward ranking and judge-assisted prompt authoring.

mod baselines;
mod stitch;
mod templates;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{TaskSample, VideoClip};
use crate::modelio::{ClientError, GeneratorClient, JudgeClient};

pub use baselines::{author_prompt, post_rewrite, pre_rewrite, rank_by_reward, RewardRanking, RewardScorer, Rewrite};
pub use stitch::stitch_vertical;
pub use templates::{placeholders, PromptTemplateSet, TemplateKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TpoError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("judge failed: {0}")]
    Judge(ClientError),
    #[error("generator failed: {0}")]
    Generator(ClientError),
    #[error("judge returned an empty {0}")]
    Empty(&'static str),
    #[error("unparseable judge reply: {0:?}")]
    Unparseable(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TpoConfig {
    pub n_candidates: usize,
    pub n_steps: usize,
    pub base_seed: u64,
    /// Per-candidate seeds; step `t` uses `seeds[i] + 100 t`. When absent,
    /// candidate `i` of step `t` uses `base_seed + 100 t + i`.
    pub seeds: Option<Vec<u64>>,
    /// Frames sampled from the stitched candidates for each loss request.
    pub judge_frames: usize,
}

impl Default for TpoConfig {
    fn default() -> Self {
        TpoConfig {
            n_candidates: 2,
            n_steps: 2,
            base_seed: 0,
            seeds: None,
            judge_frames: 8,
        }
    }
}

impl TpoConfig {
    pub fn validate(&self) -> Result<(), TpoError> {
        if self.n_candidates < 2 {
            return Err(TpoError::Config(format!("n_candidates must be at least 2, got {}", self.n_candidates)));
        }
        if self.n_steps < 1 {
            return Err(TpoError::Config("n_steps must be at least 1".into()));
        }
        if self.judge_frames < 1 {
            return Err(TpoError::Config("judge_frames must be at least 1".into()));
        }
        if let Some(s) = &self.seeds {
            if s.len() != self.n_candidates {
                return Err(TpoError::Config(format!(
                    "{} seeds given for {} candidates",
                    s.len(),
                    self.n_candidates
                )));
            }
        }
        Ok(())
    }

    /// Seeds of the candidates generated in step `t` (1-based).
    pub fn step_seeds(&self, t: usize) -> Vec<u64> {
        let shift = 100 * t as u64;
        match &self.seeds {
            Some(s) => s.iter().map(|&x| x.wrapping_add(shift)).collect(),
            None => (0..self.n_candidates as u64)
                .map(|i| self.base_seed.wrapping_add(shift).wrapping_add(i))
                .collect(),
        }
    }
}

/// Reference to a candidate clip: its seed plus content hashes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRef {
    pub seed: u64,
    pub frames: usize,
    pub clip_hash: String,
    pub last_frame_hash: String,
}

impl CandidateRef {
    pub fn of(seed: u64, clip: &VideoClip) -> Self {
        CandidateRef {
            seed,
            frames: clip.len(),
            clip_hash: clip_hash(clip),
            last_frame_hash: clip.last().content_hash(),
        }
    }
}

pub fn clip_hash(clip: &VideoClip) -> String {
    let mut h = Sha256::new();
    for f in clip.frames() {
        h.update(f.content_hash().as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpoStep {
    pub step: usize,
    pub candidates: Vec<CandidateRef>,
    /// Candidates had to be padded to be stitched.
    pub stitched_padded: bool,
    /// Set when the update reply was unusable and the previous prompt was kept.
    pub update_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpoTrace {
    pub sample_id: String,
    pub prompts: Vec<String>,
    pub losses: Vec<String>,
    pub gradients: Vec<String>,
    pub steps: Vec<TpoStep>,
    pub complete: bool,
    pub error: Option<String>,
}

impl TpoTrace {
    pub fn final_prompt(&self) -> &str {
        self.prompts.last().map(String::as_str).unwrap_or_default()
    }

    pub fn save(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join("trace.json"), json + "\n")
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

fn ask(judge: &dyn JudgeClient, images: &[crate::model::Frame], text: &str) -> Result<String, TpoError> {
    judge.chat(images, text).map_err(TpoError::Judge)
}

fn describe_videos(n_clips: usize, n_frames: usize) -> String {
    format!(
        "{n_frames} frames sampled uniformly in time from {n_clips} candidate videos stacked vertically \
         into one video (candidate 1 on top, candidate {n_clips} at the bottom)"
    )
}

/// Critique of the candidates under the current prompt. The judge reply is
/// returned verbatim.
pub fn textual_loss(
    clips: &[VideoClip],
    prompt: &str,
    task_definition: &str,
    judge: &dyn JudgeClient,
    templates: &PromptTemplateSet,
    n_frames: usize,
) -> Result<(String, bool), TpoError> {
    templates.check(TemplateKind::Loss)?;
    if clips.iter().any(VideoClip::is_empty) {
        return Err(TpoError::Precondition("empty candidate clip".into()));
    }
    let (stitched, padded) = stitch_vertical(clips)?;
    let frames = stitched.sample_uniform(n_frames);
    let text = templates.fill(
        TemplateKind::Loss,
        &[
            ("current_prompt", prompt),
            ("task_definition", task_definition),
            ("input_videos", &describe_videos(clips.len(), frames.len())),
        ],
    )?;
    Ok((ask(judge, &frames, &text)?, padded))
}

pub fn textual_gradient(
    prompt: &str,
    loss: &str,
    judge: &dyn JudgeClient,
    templates: &PromptTemplateSet,
) -> Result<String, TpoError> {
    templates.check(TemplateKind::Gradient)?;
    if loss.trim().is_empty() {
        return Err(TpoError::Precondition("textual loss is empty".into()));
    }
    let text = templates.fill(TemplateKind::Gradient, &[("current_prompt", prompt), ("loss", loss)])?;
    ask(judge, &[], &text)
}

/// Strip one layer of markdown fence and surrounding quotes.
pub fn normalize_prompt(reply: &str) -> String {
    let mut s = reply.trim();
    if let Some(inner) = s.strip_prefix("```") {
        let inner = inner.strip_suffix("```").unwrap_or(inner);
        // Drop an info string such as ```text.
        s = match inner.split_once('\n') {
            Some((first, rest)) if !first.trim().contains(' ') => rest,
            _ => inner,
        };
        s = s.trim();
    }
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('`', '`')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            s = s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    s.to_string()
}

pub fn update_prompt(
    prompt: &str,
    gradient: &str,
    judge: &dyn JudgeClient,
    templates: &PromptTemplateSet,
) -> Result<String, TpoError> {
    templates.check(TemplateKind::Update)?;
    if gradient.trim().is_empty() {
        return Err(TpoError::Precondition("textual gradient is empty".into()));
    }
    let text = templates.fill(TemplateKind::Update, &[("current_prompt", prompt), ("gradient", gradient)])?;
    let next = normalize_prompt(&ask(judge, &[], &text)?);
    if next.is_empty() {
        return Err(TpoError::Empty("updated prompt"));
    }
    Ok(next)
}

/// Generate one clip per seed; candidates of a step run concurrently.
pub fn generate_candidates(
    sample: &TaskSample,
    prompt: &str,
    seeds: &[u64],
    gen: &dyn GeneratorClient,
) -> Result<Vec<VideoClip>, TpoError> {
    seeds
        .par_iter()
        .map(|&seed| gen.generate(&sample.initial, prompt, seed).map_err(TpoError::Generator))
        .collect()
}

/// The full loop. Fails only on configuration errors; a generator or judge
/// failure ends the run early and yields a trace with `complete == false`.
pub fn run_tpo(
    sample: &TaskSample,
    gen: &dyn GeneratorClient,
    judge: &dyn JudgeClient,
    cfg: &TpoConfig,
    templates: &PromptTemplateSet,
) -> Result<TpoTrace, TpoError> {
    cfg.validate()?;
    for k in [TemplateKind::Loss, TemplateKind::Gradient, TemplateKind::Update] {
        templates.check(k)?;
    }
    let mut trace = TpoTrace {
        sample_id: sample.id.clone(),
        prompts: vec![sample.prompt.clone()],
        losses: Vec::new(),
        gradients: Vec::new(),
        steps: Vec::new(),
        complete: false,
        error: None,
    };
    for t in 1..=cfg.n_steps {
        if let Err(e) = tpo_step(sample, gen, judge, cfg, templates, t, &mut trace) {
            trace.error = Some(format!("step {t}: {e}"));
            return Ok(trace);
        }
    }
    trace.complete = true;
    Ok(trace)
}

fn tpo_step(
    sample: &TaskSample,
    gen: &dyn GeneratorClient,
    judge: &dyn JudgeClient,
    cfg: &TpoConfig,
    templates: &PromptTemplateSet,
    t: usize,
    trace: &mut TpoTrace,
) -> Result<(), TpoError> {
    let prompt = trace.final_prompt().to_string();
    let seeds = cfg.step_seeds(t);
    let clips = generate_candidates(sample, &prompt, &seeds, gen)?;
    let candidates = seeds.iter().zip(&clips).map(|(&s, c)| CandidateRef::of(s, c)).collect();
    let (loss, stitched_padded) =
        textual_loss(&clips, &prompt, sample.task.definition(), judge, templates, cfg.judge_frames)?;
    let mut step = TpoStep {
        step: t,
        candidates,
        stitched_padded,
        update_error: None,
    };
    let gradient = match textual_gradient(&prompt, &loss, judge, templates) {
        Ok(g) => g,
        Err(e) => {
            trace.losses.push(loss);
            trace.steps.push(step);
            return Err(e);
        }
    };
    trace.losses.push(loss);
    let next = match update_prompt(&prompt, &gradient, judge, templates) {
        Ok(p) => p,
        Err(e @ (TpoError::Empty(_) | TpoError::Precondition(_))) => {
            step.update_error = Some(e.to_string());
            prompt
        }
        Err(e) => {
            trace.gradients.push(gradient);
            trace.steps.push(step);
            return Err(e);
        }
    };
    trace.gradients.push(gradient);
    trace.steps.push(step);
    trace.prompts.push(next);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fence_and_quote_stripping() {
        assert_eq!(normalize_prompt("```\nNEW\n```"), "NEW");
        assert_eq!(normalize_prompt("```text\nNEW prompt\n```"), "NEW prompt");
        assert_eq!(normalize_prompt("  \"quoted\" "), "quoted");
        assert_eq!(normalize_prompt("“curly”"), "curly");
        assert_eq!(normalize_prompt("plain"), "plain");
        assert_eq!(normalize_prompt("```\n```"), "");
    }

    #[test]
    fn default_seed_schedule() {
        let c = TpoConfig {
            base_seed: 5,
            n_candidates: 3,
            ..TpoConfig::default()
        };
        assert_eq!(c.step_seeds(1), [105, 106, 107]);
        assert_eq!(c.step_seeds(2), [205, 206, 207]);
        let c = TpoConfig {
            seeds: Some(vec![1, 9]),
            ..TpoConfig::default()
        };
        assert_eq!(c.step_seeds(1), [101, 109]);
    }

    #[test]
    fn invalid_configs() {
        for c in [
            TpoConfig {
                n_candidates: 1,
                ..TpoConfig::default()
            },
            TpoConfig {
                n_steps: 0,
                ..TpoConfig::default()
            },
            TpoConfig {
                seeds: Some(vec![1]),
                ..TpoConfig::default()
            },
        ] {
            assert!(matches!(c.validate(), Err(TpoError::Config(_))));
        }
    }
}
