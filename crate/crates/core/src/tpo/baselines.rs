use serde::{Deserialize, Serialize};

use crate::model::{Frame, TaskSample, VideoClip};
use crate::modelio::{cosine, Embedder, JudgeClient};
use crate::taskgen;

use super::{ask, normalize_prompt, PromptTemplateSet, TemplateKind, TpoError};

/// Frames shown to the judge per clip by the post-rewriter and scorer.
const CLIP_FRAMES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rewrite {
    pub prompt: String,
    /// The reply exceeded twice the input's word count and was cut.
    pub truncated: bool,
}

/// Enrich the prompt before any generation, from the initial frame alone.
pub fn pre_rewrite(
    prompt: &str,
    initial: &Frame,
    judge: &dyn JudgeClient,
    templates: &PromptTemplateSet,
) -> Result<Rewrite, TpoError> {
    let text = templates.fill(
        TemplateKind::PreRewrite,
        &[("current_prompt", prompt), ("initial_image", "the attached image")],
    )?;
    let reply = normalize_prompt(&ask(judge, std::slice::from_ref(initial), &text)?);
    if reply.is_empty() {
        return Err(TpoError::Empty("rewritten prompt"));
    }
    let limit = 2 * prompt.split_whitespace().count().max(1);
    let words: Vec<&str> = reply.split_whitespace().collect();
    if words.len() > limit {
        return Ok(Rewrite {
            prompt: words[..limit].join(" "),
            truncated: true,
        });
    }
    Ok(Rewrite {
        prompt: reply,
        truncated: false,
    })
}

/// Revise the prompt after seeing one generated clip.
pub fn post_rewrite(
    prompt: &str,
    clip: &VideoClip,
    judge: &dyn JudgeClient,
    templates: &PromptTemplateSet,
) -> Result<String, TpoError> {
    templates.check(TemplateKind::PostRewrite)?;
    if clip.is_empty() {
        return Err(TpoError::Precondition("empty clip".into()));
    }
    let frames = clip.sample_uniform(CLIP_FRAMES);
    let desc = format!("{} frames sampled uniformly in time from the generated video", frames.len());
    let text = templates.fill(TemplateKind::PostRewrite, &[("current_prompt", prompt), ("input_videos", &desc)])?;
    let reply = normalize_prompt(&ask(judge, &frames, &text)?);
    if reply.is_empty() {
        return Err(TpoError::Empty("rewritten prompt"));
    }
    Ok(reply)
}

pub enum RewardScorer<'a> {
    /// Cosine similarity between each clip's last frame and `target`.
    EmbedderSim {
        embedder: &'a dyn Embedder,
        target: Option<&'a Frame>,
    },
    /// A 0 to 10 rating per clip from the judge.
    JudgeScore { judge: &'a dyn JudgeClient },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardRanking {
    pub best: usize,
    pub worst: usize,
    pub scores: Vec<f64>,
}

fn parse_rating(reply: &str) -> Result<f64, TpoError> {
    match reply.trim().parse::<u8>() {
        Ok(v) if v <= 10 => Ok(v as f64),
        _ => Err(TpoError::Unparseable(reply.to_string())),
    }
}

/// Score every clip; best is the first maximum, worst the first minimum.
pub fn rank_by_reward(
    clips: &[VideoClip],
    prompt: &str,
    scorer: &RewardScorer<'_>,
    templates: &PromptTemplateSet,
) -> Result<RewardRanking, TpoError> {
    if clips.is_empty() || clips.iter().any(VideoClip::is_empty) {
        return Err(TpoError::Precondition("no clips to rank".into()));
    }
    let scores: Vec<f64> = match scorer {
        RewardScorer::EmbedderSim { embedder, target } => {
            let target = target.ok_or_else(|| TpoError::Precondition("no target frame to compare against".into()))?;
            let t = embedder.embed(target).map_err(TpoError::Judge)?;
            clips
                .iter()
                .map(|c| {
                    let e = embedder.embed(c.last()).map_err(TpoError::Judge)?;
                    cosine(&e, &t).ok_or_else(|| TpoError::Precondition("embedding length mismatch".into()))
                })
                .collect::<Result<_, _>>()?
        }
        RewardScorer::JudgeScore { judge } => clips
            .iter()
            .map(|c| {
                let frames = c.sample_uniform(CLIP_FRAMES);
                let desc = format!("{} frames sampled uniformly in time from the video", frames.len());
                let text =
                    templates.fill(TemplateKind::RewardScore, &[("current_prompt", prompt), ("input_videos", &desc)])?;
                parse_rating(&ask(*judge, &frames, &text)?)
            })
            .collect::<Result<_, _>>()?,
    };
    let mut best = 0;
    let mut worst = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
        if s < scores[worst] {
            worst = i;
        }
    }
    Ok(RewardRanking { best, worst, scores })
}

/// Write a prompt for `sample` from its initial and target frames. Without a
/// judge, the generator's deterministic template prompt is returned.
pub fn author_prompt(
    sample: &TaskSample,
    judge: Option<&dyn JudgeClient>,
    templates: &PromptTemplateSet,
) -> Result<String, TpoError> {
    let kind = TemplateKind::Author(sample.dimension);
    templates.check(kind)?;
    let Some(judge) = judge else {
        return taskgen::template_prompt(sample).map_err(|e| TpoError::Precondition(e.to_string()));
    };
    let text = templates.fill(
        kind,
        &[
            ("initial_image", "image 1"),
            ("target_image", "image 2"),
            ("task", sample.task.name()),
        ],
    )?;
    let reply = normalize_prompt(&ask(judge, &[sample.initial.clone(), sample.target.clone()], &text)?);
    if reply.is_empty() {
        return Err(TpoError::Empty("authored prompt"));
    }
    Ok(reply)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rating_parse_is_strict() {
        assert_eq!(parse_rating(" 7\n").unwrap(), 7.0);
        assert!(parse_rating("great").is_err());
        assert!(parse_rating("11").is_err());
        assert!(parse_rating("7/10").is_err());
        assert!(parse_rating("-1").is_err());
    }
}
