//! `tivi` command line. Exit codes: 0 success, 1 usage or configuration
//! error, 2 runtime failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::model::{load_dataset, read_verdicts, write_dataset, write_verdicts, Dataset, Difficulty, Dimension, Task};
use crate::modelio::stub::{StubOptions, StubServer};
use crate::modelio::OracleGenerator;
use crate::taskgen::{self, CorruptionMode, GenConfig};
use crate::tpo::{self, PromptTemplateSet, TpoTrace};

use super::{
    aggregate_report, load_infos, render_csv, render_json, render_markdown, run_eval, EvalContext, HarnessConfig,
    HarnessError, Strategy,
};

#[derive(Parser, Debug)]
#[command(name = "tivi", version, about = "Visual-reasoning benchmark for image-to-video models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a dataset of task samples.
    Gen(GenArgs),
    /// Generate k clips per sample, verify them and write verdicts.
    Eval(EvalArgs),
    /// Run prompt optimisation on samples and write one trace per sample.
    Tpo(TpoArgs),
    /// Aggregate a verdict file into Pass@k tables.
    Report(ReportArgs),
    /// Author prompts from initial and target frames.
    Author(AuthorArgs),
    /// Serve the local judge / generator stub until interrupted.
    StubServer(StubArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Comma-separated task slugs, or `all` for every supported task.
    #[arg(long, default_value = "all")]
    tasks: String,
    /// Samples per task and difficulty; defaults to about 150 per dimension.
    #[arg(long)]
    per_task: Option<usize>,
    #[arg(long, default_value = "easy,medium,hard")]
    difficulties: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Canvas as WIDTHxHEIGHT, overriding each task's default.
    #[arg(long)]
    canvas: Option<String>,
    /// Comma-separated color names generators may draw from.
    #[arg(long)]
    palette: Option<String>,
    /// Also store each sample's ground-truth clip.
    #[arg(long)]
    with_gt: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Oracle generator only: corrupt clips with this mode.
    #[arg(long)]
    noise: Option<CorruptionMode>,
    /// Label used in the written report.
    #[arg(long)]
    model: Option<String>,
    /// Reuse verdicts already present in OUT/verdicts.jsonl.
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TpoArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated sample ids; all samples when absent.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    verdicts: PathBuf,
    /// Dataset directory, or a JSON list of sample infos.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "1,5")]
    k: String,
    #[arg(long, default_value = "json", value_parser = ["json", "csv", "md"])]
    format: String,
    #[arg(long)]
    model: Option<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuthorArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    dimension: Option<Dimension>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the generators' template prompts even if a judge is configured.
    #[arg(long)]
    offline: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StubArgs {
    #[arg(long, default_value_t = 0)]
    port: u16,
    /// Chat reply, repeatable; replies are cycled.
    #[arg(long = "reply")]
    replies: Vec<String>,
    /// Answer this many requests with HTTP 500 first.
    #[arg(long, default_value_t = 0)]
    fail_first: usize,
    /// Serve /generate with the oracle generator for this dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

/// Parse `args` (without the program name) and run; returns the exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let argv = std::iter::once("tivi".to_string()).chain(args);
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), HarnessError> {
    match cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Tpo(a) => tpo_cmd(a),
        Cmd::Report(a) => report(a),
        Cmd::Author(a) => author(a),
        Cmd::StubServer(a) => stub(a),
    }
}

fn runtime(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

fn config(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(e.to_string())
}

fn list<T: std::str::FromStr<Err = String>>(s: &str) -> Result<Vec<T>, HarnessError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.parse().map_err(config)).collect()
}

fn load_config(path: Option<&Path>) -> Result<HarnessConfig, HarnessError> {
    let cfg = match path {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn templates(cfg: &HarnessConfig) -> Result<PromptTemplateSet, HarnessError> {
    match &cfg.templates {
        Some(dir) => PromptTemplateSet::load_dir(Path::new(dir)).map_err(config),
        None => Ok(PromptTemplateSet::builtin()),
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(runtime),
    }
}

fn to_json_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

fn gen(a: GenArgs) -> Result<(), HarnessError> {
    let tasks: Vec<Task> = if a.tasks.trim() == "all" {
        Task::SUPPORTED.to_vec()
    } else {
        list(&a.tasks)?
    };
    if let Some(t) = tasks.iter().find(|t| !t.is_supported()) {
        return Err(config(format!("no generator for task `{}`", t.name())));
    }
    let defaults = taskgen::default_counts();
    let counts: BTreeMap<Task, usize> = tasks
        .iter()
        .map(|&t| (t, a.per_task.unwrap_or_else(|| defaults.get(&t).copied().unwrap_or(1))))
        .collect();
    let canvas = a
        .canvas
        .as_deref()
        .map(|c| {
            let (w, h) = c.split_once(['x', 'X']).ok_or_else(|| config(format!("bad canvas `{c}`")))?;
            Ok::<_, HarnessError>((w.trim().parse().map_err(config)?, h.trim().parse().map_err(config)?))
        })
        .transpose()?;
    let cfg = GenConfig {
        canvas,
        seed: a.seed,
        difficulties: list::<Difficulty>(&a.difficulties)?,
        counts,
        palette: a.palette.as_deref().map(|p| p.split(',').map(|s| s.trim().to_string()).collect()).unwrap_or_default(),
    };
    let samples = taskgen::generate_batch(&cfg).map_err(|e| match e {
        taskgen::GenError::Unsupported(_) | taskgen::GenError::Palette(_) | taskgen::GenError::Canvas(..) => config(e),
        other => runtime(other),
    })?;
    let mut gt_err = None;
    write_dataset(&a.out, &samples, |s| {
        if !a.with_gt || gt_err.is_some() {
            return None;
        }
        taskgen::render_gt_video(s).map_err(|e| gt_err = Some(e)).ok()
    })
    .map_err(runtime)?;
    if let Some(e) = gt_err {
        return Err(runtime(e));
    }
    println!("wrote {} samples to {}", samples.len(), a.out.display());
    Ok(())
}

fn load(path: &Path) -> Result<Dataset, HarnessError> {
    load_dataset(path).map_err(runtime)
}

fn eval(a: EvalArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(s) = a.strategy {
        cfg.eval.strategy = s;
    }
    if let Some(k) = a.k {
        cfg.eval.k = k;
    }
    if let Some(s) = a.seed {
        cfg.eval.base_seed = s;
    }
    if let Some(w) = a.workers {
        cfg.eval.workers = w;
    }
    if a.noise.is_some() {
        cfg.generator.noise = a.noise;
    }
    cfg.validate()?;
    let ds = load(&a.dataset)?;
    let gen = cfg.build_generator(&ds)?;
    let deps = cfg.build_deps()?;
    let tpl = templates(&cfg)?;
    std::fs::create_dir_all(&a.out).map_err(runtime)?;
    let vpath = a.out.join("verdicts.jsonl");
    let resume = if a.resume && vpath.exists() {
        read_verdicts(&vpath).map_err(runtime)?
    } else {
        Vec::new()
    };
    let ctx = EvalContext {
        gen: gen.as_ref(),
        deps: &deps,
        verify: &cfg.verify,
        track: &cfg.track,
        eval: &cfg.eval,
        tpo: &cfg.tpo,
        templates: &tpl,
    };
    let out = run_eval(&ds.samples, &ctx, &resume)?;
    let verdicts = out.verdicts();
    write_verdicts(&verdicts, &vpath).map_err(runtime)?;

    let mut prompts = String::new();
    for r in &out.runs {
        if let Some(t) = &r.trace {
            t.save(&a.out.join("traces").join(&r.sample_id)).map_err(runtime)?;
        }
        #[derive(Serialize)]
        struct Line<'a> {
            sample_id: &'a str,
            prompt: Option<&'a str>,
            strategy_error: Option<&'a str>,
            resumed: usize,
        }
        prompts.push_str(&to_json_line(&Line {
            sample_id: &r.sample_id,
            prompt: r.prompt.as_deref(),
            strategy_error: r.strategy_error.as_deref(),
            resumed: r.resumed,
        }));
        prompts.push('\n');
    }
    std::fs::write(a.out.join("prompts.jsonl"), prompts).map_err(runtime)?;

    let mut ks = vec![1, cfg.eval.k];
    ks.dedup();
    let model = a.model.clone().unwrap_or_else(|| gen.model_name().to_string());
    let reports = aggregate_report(&verdicts, &ds.manifest.infos(), &ks, Some(&model))?;
    std::fs::write(a.out.join("report.json"), render_json(&reports)).map_err(runtime)?;
    for r in &reports {
        println!(
            "pass@{}: {}% over {} samples ({} metric-errors, {} incomplete)",
            r.k,
            r.overall.display(),
            r.overall.scored,
            r.metric_errors,
            r.incomplete_samples.len()
        );
    }
    Ok(())
}

fn tpo_cmd(a: TpoArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(n) = a.steps {
        cfg.tpo.n_steps = n;
    }
    if let Some(n) = a.candidates {
        cfg.tpo.n_candidates = n;
    }
    if let Some(s) = a.seed {
        cfg.tpo.base_seed = s;
    }
    cfg.tpo.validate().map_err(config)?;
    let judge = cfg
        .build_judge()?
        .ok_or_else(|| config("tpo needs a [judge] section (kind = \"http\" or \"scripted\")"))?;
    let tpl = templates(&cfg)?;
    let ds = load(&a.dataset)?;
    let gen = cfg.build_generator(&ds)?;
    let wanted: Option<Vec<String>> = a.samples.map(|s| s.split(',').map(|x| x.trim().to_string()).collect());
    if let Some(w) = &wanted {
        if let Some(miss) = w.iter().find(|id| ds.get(id).is_none()) {
            return Err(config(format!("unknown sample `{miss}`")));
        }
    }
    let mut incomplete = 0;
    for s in &ds.samples {
        if wanted.as_ref().is_some_and(|w| !w.contains(&s.id)) {
            continue;
        }
        let trace: TpoTrace = tpo::run_tpo(s, gen.as_ref(), judge.as_ref(), &cfg.tpo, &tpl).map_err(config)?;
        trace.save(&a.out.join(&s.id)).map_err(runtime)?;
        if !trace.complete {
            incomplete += 1;
            eprintln!("{}: {}", s.id, trace.error.as_deref().unwrap_or("incomplete"));
        }
        println!("{}\t{}", s.id, trace.final_prompt());
    }
    if incomplete > 0 {
        return Err(runtime(format!("{incomplete} run(s) ended early")));
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), HarnessError> {
    let ks: Vec<usize> = a
        .k
        .split(',')
        .map(|k| k.trim().parse::<usize>().map_err(|e| config(format!("bad k `{k}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(config("k values must be at least 1"));
    }
    let infos = load_infos(&a.dataset)?;
    let verdicts = read_verdicts(&a.verdicts).map_err(|e| runtime(format!("{}: {e}", a.verdicts.display())))?;
    let reports = aggregate_report(&verdicts, &infos, &ks, a.model.as_deref())?;
    let text = match a.format.as_str() {
        "csv" => render_csv(&reports),
        "md" => render_markdown(&reports),
        _ => render_json(&reports),
    };
    write_text(a.out.as_deref(), &text)
}

fn author(a: AuthorArgs) -> Result<(), HarnessError> {
    let cfg = load_config(a.config.as_deref())?;
    let judge = if a.offline { None } else { cfg.build_judge()? };
    let tpl = templates(&cfg)?;
    let ds = load(&a.dataset)?;
    #[derive(Serialize)]
    struct Line<'a> {
        sample_id: &'a str,
        task: &'a str,
        prompt: String,
    }
    let mut text = String::new();
    for s in ds.samples.iter().filter(|s| a.dimension.is_none_or(|d| d == s.dimension)) {
        let prompt = tpo::author_prompt(s, judge.as_deref(), &tpl).map_err(runtime)?;
        text.push_str(&to_json_line(&Line {
            sample_id: &s.id,
            task: s.task.name(),
            prompt,
        }));
        text.push('\n');
    }
    write_text(a.out.as_deref(), &text)
}

fn stub(a: StubArgs) -> Result<(), HarnessError> {
    let mut opts = StubOptions::default();
    if !a.replies.is_empty() {
        opts.chat_replies = a.replies;
    }
    opts.fail_first = a.fail_first;
    if let Some(d) = &a.dataset {
        let ds = load(d)?;
        opts.generator = Some(Arc::new(OracleGenerator::from_dataset(&ds, None).map_err(runtime)?));
    }
    let server = StubServer::start(a.port, opts).map_err(runtime)?;
    println!("listening on http://{}", server.addr());
    let _ = std::io::stdout().flush();
    server.join();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(argv("frobnicate")), 1);
        assert_eq!(run(argv("gen --bogus 1 --out x")), 1);
        assert_eq!(run(argv("report --verdicts v --dataset d --format xml")), 1);
        assert_eq!(run(argv("--help")), 0);
    }

    #[test]
    fn missing_inputs_are_runtime_errors() {
        let dir = std::env::temp_dir().join("tivi-cli-missing");
        let v = dir.join("none.jsonl");
        let code = run(vec![
            "report".into(),
            "--verdicts".into(),
            v.display().to_string(),
            "--dataset".into(),
            dir.join("nothing").display().to_string(),
        ]);
        assert_eq!(code, 2);
    }
}
