//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy as _, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use tivi_core::harness::{aggregate_report, cli, load_infos, pass_at_k_outcomes, render_csv, render_markdown};
use tivi_core::imgproc::{homography_from_points, hsv, otsu_threshold, ssim, GrayImage};
use tivi_core::model::{read_verdicts, Difficulty, Task};
use tivi_core::modelio::stub::{StubOptions, StubServer};
use tivi_core::modelio::{FnJudge, HttpConfig, HttpJudge, JudgeClient, OracleGenerator, ScriptedJudge};
use tivi_core::model::Frame;
use tivi_core::taskgen::{self, CorruptionMode};
use tivi_core::tpo::{run_tpo, PromptTemplateSet, TpoConfig};
use tivi_core::track::TrackConfig;
use tivi_core::verify::expr::parse_expression;
use tivi_core::verify::{verify_final, Deps, VerifyConfig};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn oracle_soundness() -> Outcome {
    let deps = Deps::default();
    let (cfg, tcfg) = (VerifyConfig::default(), TrackConfig::default());
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut n = 0;
    for task in Task::SUPPORTED {
        for d in Difficulty::ALL {
            for seed in 0..5 {
                n += 1;
                let s = taskgen::generate(task, d, seed).map_err(|e| e.to_string())?;
                let clip = taskgen::render_gt_video(&s).map_err(|e| e.to_string())?;
                match verify_final(&s, &clip, &deps, &cfg, &tcfg) {
                    Ok(v) if v.pass => {}
                    other => failed.push(format!("{}/{}/{seed}: {other:?}", task.slug(), d.slug())),
                }
            }
        }
    }
    let took = start.elapsed();
    check(failed.is_empty(), format!("{} of {n} failed: {}", failed.len(), failed.join("; ")))?;
    check(took < Duration::from_secs(300), format!("{n}/{n} passed but took {took:.1?} (limit 300 s)"))?;
    Ok(format!("{n}/{n} ground-truth clips pass, single-threaded in {:.1} s", took.as_secs_f64()))
}

fn corruption_sensitivity() -> Outcome {
    let cases: Vec<(Task, CorruptionMode, Difficulty)> = Task::SUPPORTED
        .into_iter()
        .flat_map(|t| {
            CorruptionMode::applicable(t)
                .into_iter()
                .flat_map(move |m| Difficulty::ALL.into_iter().map(move |d| (t, m, d)))
        })
        .collect();
    let pairs = cases.len() / 3;
    let survivors: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(i, &(t, m, d))| {
            let seed = i as u64 % 5;
            let run = || -> Result<bool, String> {
                let s = taskgen::generate(t, d, seed).map_err(|e| e.to_string())?;
                let clip = taskgen::corrupt(&s, m, 1000 + i as u64).map_err(|e| e.to_string())?;
                let v = verify_final(&s, &clip, &Deps::default(), &VerifyConfig::default(), &TrackConfig::default())
                    .map_err(|e| e.to_string())?;
                Ok(!v.pass && !v.is_metric_error())
            };
            match run() {
                Ok(true) => None,
                Ok(false) => Some(format!("{}/{m}/{}/{seed} passed", t.slug(), d.slug())),
                Err(e) => Some(format!("{}/{m}/{}/{seed}: {e}", t.slug(), d.slug())),
            }
        })
        .collect();
    check(cases.len() >= 60, format!("only {} negative cases", cases.len()))?;
    check(survivors.is_empty(), format!("{} of {} survived: {}", survivors.len(), cases.len(), survivors.join("; ")))?;
    Ok(format!("{} corrupted clips over {pairs} (task, mode) pairs all fail", cases.len()))
}

fn pixel_goldens() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for i in 0..20 {
        let (w, h) = (rng.random_range(8..64u32), rng.random_range(8..64u32));
        let data: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
        let img = GrayImage::new(w, h, data).map_err(|e| e.to_string())?;
        let s = ssim(&img, &img).map_err(|e| e.to_string())?;
        check((s - 1.0).abs() <= 1e-6, format!("ssim(a,a) = {s} on image {i}"))?;
    }

    for i in 0..200 {
        let mut hist = [0u64; 256];
        if i % 4 == 0 {
            for _ in 0..rng.random_range(1..6) {
                hist[rng.random_range(0..256)] += rng.random_range(1..500);
            }
        } else {
            hist.iter_mut().for_each(|c| *c = rng.random_range(0..200));
        }
        let (got, want) = (otsu_threshold(&hist), otsu_reference(&hist));
        check(got == want, format!("otsu histogram {i}: {got:?} vs exhaustive {want:?}"))?;
    }

    let mut worst = 0f64;
    for i in 0..100 {
        let base = [(100.0, 100.0), (900.0, 100.0), (900.0, 900.0), (100.0, 900.0)];
        let mut jitter = || rng.random_range(-150.0..150.0);
        let src: [(f64, f64); 4] = std::array::from_fn(|k| (base[k].0 + jitter(), base[k].1 + jitter()));
        let dst: [(f64, f64); 4] = std::array::from_fn(|k| (base[k].0 + jitter(), base[k].1 + jitter()));
        let h = homography_from_points(&src, &dst).map_err(|e| format!("quad {i}: {e}"))?;
        for (s, d) in src.iter().zip(&dst) {
            let (x, y) = h.apply(s.0, s.1).ok_or(format!("quad {i}: point at infinity"))?;
            worst = worst.max(((x - d.0).powi(2) + (y - d.1).powi(2)).sqrt());
        }
    }
    check(worst < 0.5, format!("homography residual {worst} px"))?;

    for _ in 0..10_000 {
        let p: [u8; 3] = rng.random();
        let got = hsv(p);
        let (h, s, v) = hsv_reference(p[0], p[1], p[2]);
        check(
            hue_gap(got.h, h) < 1e-6 && (got.s - s).abs() < 1e-6 && (got.v - v).abs() < 1e-6,
            format!("hsv {p:?}: ({}, {}, {}) vs ({h}, {s}, {v})", got.h, got.s, got.v),
        )?;
    }
    Ok(format!("ssim(a,a)=1, 200 Otsu histograms, 100 quads (worst {worst:.2e} px), 10^4 HSV pixels"))
}

fn parser_oracle() -> Outcome {
    let strategy = expr_strategy();
    let mut runner = TestRunner::deterministic();
    let mut valued = 0;
    for _ in 0..1000 {
        let text = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let ours = parse_expression(&text).ok().and_then(|e| e.eval().ok()).map(|r| r.0);
        let reference = brute_eval(&text);
        check(ours == reference, format!("`{text}`: {ours:?} vs {reference:?}"))?;
        valued += usize::from(ours.is_some());
    }
    let v = parse_expression("2+3×4").map_err(|e| e.to_string())?.eval().map_err(|e| e.to_string())?;
    check(v.0 == Q::from_integer(14), format!("2+3×4 = {}", v.0))?;
    Ok(format!("1000 expressions agree ({valued} with a value), 2+3×4 = 14"))
}

fn pass_at_k() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let rows = rng.random_range(1..40);
        let cols = rng.random_range(0..8);
        let err_rate = if i % 2 == 0 { 0.0 } else { 0.15 };
        let m: Vec<Vec<Option<bool>>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| (!rng.random_bool(err_rate)).then(|| rng.random_bool(0.3)))
                    .collect()
            })
            .collect();
        let mut prev: Option<f64> = None;
        for k in 1..=6 {
            let r = pass_at_k_outcomes(&m, k).map_err(|e| e.to_string())?;
            let want = enumerate_pass_at_k(&m, k);
            check((r.passed, r.scored, r.incomplete.clone()) == want, format!("matrix {i}, k={k}"))?;
            // Monotonicity is defined over the same, fully scored sample set.
            if err_rate == 0.0 && k <= cols {
                let acc = r.accuracy().unwrap_or(0.0);
                check(prev.is_none_or(|p| p <= acc), format!("matrix {i}: pass@{k} dropped"))?;
                prev = Some(acc);
            }
        }
    }
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let infos = load_infos(&fixtures.join("table_samples.json")).map_err(|e| e.to_string())?;
    let mut shown = Vec::new();
    for (file, k, want) in [
        ("wan2.1_pass1.jsonl", 1, "8.40"),
        ("sora2_pass1.jsonl", 1, "27.90"),
        ("wan2.2_pass5.jsonl", 5, "16.47"),
    ] {
        let vs = read_verdicts(&fixtures.join(file)).map_err(|e| e.to_string())?;
        let reports = aggregate_report(&vs, &infos, &[k], None).map_err(|e| e.to_string())?;
        check(reports[0].overall.display() == want, format!("{file}: {}", reports[0].overall.display()))?;
        check(render_csv(&reports).contains(&format!("overall,pass@{k},{k},{want}")), format!("{file}: csv"))?;
        check(render_markdown(&reports).contains(&format!("| {want} |")), format!("{file}: markdown"))?;
        shown.push(want);
    }
    Ok(format!("100 matrices match enumeration and are monotone; fixtures render {}", shown.join(", ")))
}

fn tpo_loop() -> Outcome {
    let s = taskgen::generate(Task::MazeSolving, Difficulty::Medium, 2).map_err(|e| e.to_string())?;
    let gen = OracleGenerator::new(std::slice::from_ref(&s), None);
    let tpl = PromptTemplateSet::builtin();
    for n_steps in [1, 2, 4] {
        for n_candidates in [2, 4] {
            let judge = ScriptedJudge::new(["loss", "gradient", "next prompt"]).cycling();
            let cfg = TpoConfig {
                n_steps,
                n_candidates,
                ..TpoConfig::default()
            };
            let t = run_tpo(&s, &gen, &judge, &cfg, &tpl).map_err(|e| e.to_string())?;
            let tag = format!("n_steps={n_steps} n_candidates={n_candidates}");
            check(t.complete, format!("{tag}: {:?}", t.error))?;
            check(t.prompts.len() == n_steps + 1, format!("{tag}: {} prompts", t.prompts.len()))?;
            check(judge.calls() == 3 * n_steps, format!("{tag}: {} judge calls", judge.calls()))?;
            check(t.steps.iter().all(|st| st.candidates.len() == n_candidates), format!("{tag}: candidates"))?;
        }
    }
    let judge = FnJudge::new(|i, _, text| {
        Ok(match i % 3 {
            0 => "candidate 2 crosses a wall".to_string(),
            1 => format!("ΔG{}: forbid crossing walls", i / 3 + 1),
            _ => format!("```\nReach the goal. {}\n```", text.split_whitespace().filter(|w| w.starts_with("ΔG")).collect::<Vec<_>>().join(" ")),
        })
    });
    let t = run_tpo(&s, &gen, &judge, &TpoConfig::default(), &tpl).map_err(|e| e.to_string())?;
    check(t.prompts[1].contains("ΔG1") && t.prompts[2].contains("ΔG2"), format!("markers lost: {:?}", t.prompts))?;
    check(!t.prompts[1].contains("```"), "fences kept in updated prompt")?;
    Ok("6 width/depth settings give n_steps+1 prompts and 3·n_steps judge calls; gradient markers propagate".into())
}

fn wire_format() -> Outcome {
    let server = StubServer::start(
        0,
        StubOptions {
            fail_first: 2,
            chat_replies: vec!["answer".into()],
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let judge = HttpJudge::new(HttpConfig {
        backoff_base_ms: 10,
        ..HttpConfig::new(&server.url("/chat"), "")
    })
    .map_err(|e| e.to_string())?;
    let images: Vec<Frame> = (0..3).map(|i| Frame::filled(5, 4, [i * 60, 0, 0])).collect();
    let reply = judge.chat(&images, "which video solves the maze?").map_err(|e| e.to_string())?;
    check(reply == "answer", format!("reply `{reply}`"))?;
    check(server.hits() == 3, format!("{} hits, expected 2 failures + 1 success", server.hits()))?;
    let log = server.requests();
    check(log.len() == 1 && log[0].images == 3, format!("logged {log:?}"))?;
    check(log[0].text == "which video solves the maze?", "text altered on the wire")?;
    Ok("text and 3 images round-trip; 2 injected 500s then success after 3 attempts".into())
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if let Ok(b) = std::fs::read(&p) {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), b);
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| tmp.path().join(s).display().to_string();
    let run = |args: &[String]| cli::run(args.iter().cloned());
    let gen = |out: String| {
        let args: Vec<String> = ["gen", "--per-task", "1", "--seed", "42", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([out])
            .collect();
        run(&args)
    };
    check(gen(p("a")) == 0 && gen(p("b")) == 0, "gen failed")?;
    let (a, b) = (tree_bytes(&tmp.path().join("a")), tree_bytes(&tmp.path().join("b")));
    check(!a.is_empty() && a == b, "datasets differ")?;

    std::fs::write(p("cfg.toml"), "[generator]\nnoise = \"shuffled_bars\"\nnoise_tasks = [\"sorting\"]\n")
        .map_err(|e| e.to_string())?;
    for (out, workers) in [("e1", "1"), ("e2", "4")] {
        let args: Vec<String> = ["eval", "--dataset", &p("a"), "--config", &p("cfg.toml"), "--k", "2", "--workers", workers, "--out", &p(out)]
            .iter()
            .map(|s| s.to_string())
            .collect();
        check(run(&args) == 0, format!("eval {out} failed"))?;
    }
    let v1 = std::fs::read(p("e1/verdicts.jsonl")).map_err(|e| e.to_string())?;
    let v2 = std::fs::read(p("e2/verdicts.jsonl")).map_err(|e| e.to_string())?;
    check(v1 == v2, "verdict JSONL differs between runs")?;
    Ok(format!(
        "two gen runs give identical {} files; eval JSONL identical ({} bytes) at 1 and 4 workers",
        a.len(),
        v1.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle soundness", oracle_soundness),
        ("corruption sensitivity", corruption_sensitivity),
        ("pixel-math goldens", pixel_goldens),
        ("parser oracle", parser_oracle),
        ("pass@k", pass_at_k),
        ("prompt optimisation loop", tpo_loop),
        ("wire format", wire_format),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
