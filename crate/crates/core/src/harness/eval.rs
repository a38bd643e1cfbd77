use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imgproc::resize_bilinear;
use crate::model::{Frame, Metric, TaskSample, Verdict, VideoClip};
use crate::modelio::{GeneratorClient, JudgeClient};
use crate::tpo::{self, PromptTemplateSet, TpoConfig, TpoTrace};
use crate::track::TrackConfig;
use crate::verify::{verify_final, Deps, VerifyConfig};

use super::config::{EvalConfig, Strategy};
use super::HarnessError;

/// Everything a run needs besides the samples.
pub struct EvalContext<'a> {
    pub gen: &'a dyn GeneratorClient,
    pub deps: &'a Deps,
    pub verify: &'a VerifyConfig,
    pub track: &'a TrackConfig,
    pub eval: &'a EvalConfig,
    pub tpo: &'a TpoConfig,
    pub templates: &'a PromptTemplateSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub sample_id: String,
    /// Prompt the k generations used; `None` when every seed was resumed or
    /// the strategy failed.
    pub prompt: Option<String>,
    pub trace: Option<TpoTrace>,
    pub strategy_error: Option<String>,
    pub resumed: usize,
    pub verdicts: Vec<Verdict>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub runs: Vec<SampleRun>,
}

impl EvalOutput {
    pub fn verdicts(&self) -> Vec<Verdict> {
        self.runs.iter().flat_map(|r| r.verdicts.iter().cloned()).collect()
    }
}

fn resize_to(frame: &Frame, dims: (u32, u32)) -> Frame {
    if frame.dims() == dims {
        frame.clone()
    } else {
        resize_bilinear(frame, dims.0, dims.1)
    }
}

/// Model-facing copy of the sample: the initial frame at the resolution the
/// policy assigns to the generator, if any.
fn model_view<'s>(sample: &'s TaskSample, ctx: &EvalContext<'_>) -> std::borrow::Cow<'s, TaskSample> {
    match ctx.eval.resolution.get(ctx.gen.model_name()) {
        Some(&dims) if dims != sample.initial.dims() => {
            let mut s = sample.clone();
            s.initial = resize_to(&sample.initial, dims);
            std::borrow::Cow::Owned(s)
        }
        _ => std::borrow::Cow::Borrowed(sample),
    }
}

/// Clips come back at model resolution; verifiers work in sample pixels.
fn to_sample_space(clip: VideoClip, dims: (u32, u32)) -> Result<VideoClip, String> {
    if clip.is_empty() || clip.dims() == dims {
        return Ok(clip);
    }
    let frames = clip.frames().iter().map(|f| resize_to(f, dims)).collect();
    VideoClip::new(frames, clip.fps()).map_err(|e| e.to_string())
}

fn need_judge<'a>(ctx: &EvalContext<'a>) -> Result<&'a dyn JudgeClient, HarnessError> {
    ctx.deps
        .judge
        .as_deref()
        .ok_or_else(|| HarnessError::Config(format!("strategy {:?} needs a [judge] client", ctx.eval.strategy)))
}

/// The prompt for the k evaluation generations under the chosen strategy.
fn strategy_prompt(view: &TaskSample, ctx: &EvalContext<'_>) -> Result<(String, Option<TpoTrace>), String> {
    match ctx.eval.strategy {
        Strategy::Plain => Ok((view.prompt.clone(), None)),
        Strategy::PreRewrite => {
            let judge = need_judge(ctx).map_err(|e| e.to_string())?;
            let r = tpo::pre_rewrite(&view.prompt, &view.initial, judge, ctx.templates).map_err(|e| e.to_string())?;
            Ok((r.prompt, None))
        }
        Strategy::PostRewrite => {
            let judge = need_judge(ctx).map_err(|e| e.to_string())?;
            // One probe clip at the base seed, then a single revision.
            let probe = ctx
                .gen
                .generate(&view.initial, &view.prompt, ctx.eval.base_seed)
                .map_err(|e| format!("probe generation: {e}"))?;
            let p = tpo::post_rewrite(&view.prompt, &probe, judge, ctx.templates).map_err(|e| e.to_string())?;
            Ok((p, None))
        }
        Strategy::VideoTpo => {
            let judge = need_judge(ctx).map_err(|e| e.to_string())?;
            let cfg = TpoConfig {
                base_seed: ctx.eval.base_seed,
                ..ctx.tpo.clone()
            };
            let trace = tpo::run_tpo(view, ctx.gen, judge, &cfg, ctx.templates).map_err(|e| e.to_string())?;
            if !trace.complete {
                return Err(format!(
                    "prompt optimisation incomplete: {}",
                    trace.error.clone().unwrap_or_default()
                ));
            }
            Ok((trace.final_prompt().to_string(), Some(trace)))
        }
    }
}

fn run_sample(sample: &TaskSample, ctx: &EvalContext<'_>, done: &HashMap<(&str, u64), &Verdict>) -> SampleRun {
    let seeds = ctx.eval.seeds();
    let mut run = SampleRun {
        sample_id: sample.id.clone(),
        prompt: None,
        trace: None,
        strategy_error: None,
        resumed: 0,
        verdicts: Vec::with_capacity(seeds.len()),
    };
    let missing = seeds.iter().any(|&s| !done.contains_key(&(sample.id.as_str(), s)));
    let view = model_view(sample, ctx);
    if missing {
        match strategy_prompt(&view, ctx) {
            Ok((p, trace)) => {
                run.prompt = Some(p);
                run.trace = trace;
            }
            Err(e) => run.strategy_error = Some(e),
        }
    }
    for (g, &seed) in seeds.iter().enumerate() {
        if let Some(v) = done.get(&(sample.id.as_str(), seed)) {
            run.verdicts.push((*v).clone().for_generation(&sample.id, g, seed));
            run.resumed += 1;
            continue;
        }
        let v = match (&run.prompt, &run.strategy_error) {
            (Some(prompt), _) => generate_and_verify(sample, &view.initial, prompt, seed, ctx),
            (None, e) => Verdict::metric_error(
                Metric::Harness,
                format!("strategy failed: {}", e.as_deref().unwrap_or("unknown")),
            ),
        };
        run.verdicts.push(v.for_generation(&sample.id, g, seed));
    }
    run
}

fn generate_and_verify(sample: &TaskSample, initial: &Frame, prompt: &str, seed: u64, ctx: &EvalContext<'_>) -> Verdict {
    let clip = match ctx.gen.generate(initial, prompt, seed) {
        Ok(c) => c,
        Err(e) => return Verdict::metric_error(Metric::Harness, format!("generation failed: {e}")),
    };
    let clip = match to_sample_space(clip, sample.initial.dims()) {
        Ok(c) => c,
        Err(e) => return Verdict::metric_error(Metric::Harness, format!("resizing output: {e}")),
    };
    match verify_final(sample, &clip, ctx.deps, ctx.verify, ctx.track) {
        Ok(v) => v,
        Err(e) => Verdict::metric_error(Metric::Harness, format!("verification failed: {e}")),
    }
}

/// Generate and verify `k` clips per sample. Client failures turn into
/// metric-error verdicts; only configuration problems abort the run.
/// Non-error verdicts in `resume` are reused, keyed by (sample id, seed).
pub fn run_eval(samples: &[TaskSample], ctx: &EvalContext<'_>, resume: &[Verdict]) -> Result<EvalOutput, HarnessError> {
    if samples.is_empty() {
        return Err(HarnessError::Config("dataset has no samples".into()));
    }
    ctx.eval.validate()?;
    if ctx.eval.strategy != Strategy::Plain {
        need_judge(ctx)?;
    }
    if ctx.eval.strategy == Strategy::VideoTpo {
        ctx.tpo.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let done: HashMap<(&str, u64), &Verdict> = resume
        .iter()
        .filter(|v| !v.is_metric_error())
        .map(|v| ((v.sample_id.as_str(), v.seed), v))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.eval.workers)
        .build()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let runs = pool.install(|| samples.par_iter().map(|s| run_sample(s, ctx, &done)).collect());
    Ok(EvalOutput { runs })
}
