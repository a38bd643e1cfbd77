use std::sync::Arc;

use tivi_core::model::{Difficulty, Frame, Task, VideoClip};
use tivi_core::modelio::{ClientError, FnJudge, JudgeClient, OracleGenerator, PatchHistogramEmbedder, ScriptedJudge};
use tivi_core::taskgen;
use tivi_core::tpo::{
    author_prompt, post_rewrite, pre_rewrite, rank_by_reward, run_tpo, textual_gradient, textual_loss, update_prompt,
    PromptTemplateSet, RewardScorer, TemplateKind, TpoConfig, TpoError,
};

fn maze() -> tivi_core::TaskSample {
    taskgen::generate(Task::MazeSolving, Difficulty::Easy, 3).unwrap()
}

/// Loss, gradient and update replies keyed on the call position; the
/// gradient of step t carries the marker `ΔG{t}` and the updater appends
/// every marker it finds in the request.
fn marker_judge() -> FnJudge {
    FnJudge::new(|i, _, text| {
        let step = i / 3 + 1;
        Ok(match i % 3 {
            0 => format!("critique {step}: candidate 1 stalls, candidate 2 crosses a wall"),
            1 => format!("ΔG{step}: say that walls must never be crossed"),
            _ => {
                let markers: Vec<&str> = text.split_whitespace().filter(|w| w.starts_with("ΔG")).collect();
                format!("```\nMove the red block to the goal without crossing walls. {}\n```", markers.join(" "))
            }
        })
    })
}

#[test]
fn trace_shapes_and_call_budget() {
    let s = maze();
    let gen = OracleGenerator::new(std::slice::from_ref(&s), None);
    for n_steps in [1, 2, 4] {
        for n_candidates in [2, 4] {
            let judge = marker_judge();
            let cfg = TpoConfig {
                n_steps,
                n_candidates,
                ..TpoConfig::default()
            };
            let t = run_tpo(&s, &gen, &judge, &cfg, &PromptTemplateSet::builtin()).unwrap();
            assert!(t.complete, "{:?}", t.error);
            assert_eq!(t.prompts.len(), n_steps + 1);
            assert_eq!(t.losses.len(), n_steps);
            assert_eq!(t.gradients.len(), n_steps);
            assert_eq!(judge.transcript().len(), 3 * n_steps);
            assert!(t.steps.iter().all(|st| st.candidates.len() == n_candidates));
            let mut seeds: Vec<u64> = t.steps.iter().flat_map(|st| st.candidates.iter().map(|c| c.seed)).collect();
            seeds.sort_unstable();
            seeds.dedup();
            assert_eq!(seeds.len(), n_steps * n_candidates);
            assert_eq!(t.prompts[0], s.prompt);
        }
    }
}

#[test]
fn gradient_marker_reaches_next_prompt() {
    let s = maze();
    let gen = OracleGenerator::new(std::slice::from_ref(&s), None);
    let judge = marker_judge();
    let t = run_tpo(&s, &gen, &judge, &TpoConfig::default(), &PromptTemplateSet::builtin()).unwrap();
    assert!(t.prompts[1].contains("ΔG1"), "{}", t.prompts[1]);
    assert!(!t.prompts[1].contains("```"));
    assert!(t.prompts[2].contains("ΔG2"));
    // The loss request carries the prompt and the task definition; the
    // gradient request carries the loss verbatim.
    let tr = judge.transcript();
    assert!(tr[0].text.contains(&s.prompt));
    assert!(tr[0].text.contains(s.task.definition()));
    assert_eq!(tr[0].images, 8);
    assert!(tr[1].text.contains(&t.losses[0]));
    assert_eq!(tr[1].images, 0);
}

#[test]
fn runs_are_deterministic() {
    let s = maze();
    let gen = OracleGenerator::new(std::slice::from_ref(&s), None);
    let a = run_tpo(&s, &gen, &marker_judge(), &TpoConfig::default(), &PromptTemplateSet::builtin()).unwrap();
    let b = run_tpo(&s, &gen, &marker_judge(), &TpoConfig::default(), &PromptTemplateSet::builtin()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn empty_update_keeps_prompt() {
    let s = maze();
    let gen = OracleGenerator::new(std::slice::from_ref(&s), None);
    let judge = ScriptedJudge::new(["loss", "gradient", "  "]);
    let cfg = TpoConfig {
        n_steps: 1,
        ..TpoConfig::default()
    };
    let t = run_tpo(&s, &gen, &judge, &cfg, &PromptTemplateSet::builtin()).unwrap();
    assert_eq!(t.prompts, [s.prompt.clone(), s.prompt.clone()]);
    assert!(t.steps[0].update_error.is_some());
    let err = update_prompt("p", "g", &ScriptedJudge::new([""]), &PromptTemplateSet::builtin());
    assert!(matches!(err, Err(TpoError::Empty(_))));
}

#[test]
fn failures_leave_a_partial_trace() {
    let s = maze();
    let gen = OracleGenerator::new(std::slice::from_ref(&s), None);
    // Script runs out during step 2's gradient call.
    let judge = ScriptedJudge::new(["l1", "g1", "p1", "l2"]);
    let t = run_tpo(&s, &gen, &judge, &TpoConfig::default(), &PromptTemplateSet::builtin()).unwrap();
    assert!(!t.complete);
    assert_eq!(t.prompts, [s.prompt.clone(), "p1".to_string()]);
    assert_eq!(t.losses, ["l1", "l2"]);
    assert!(t.error.as_deref().unwrap().contains("step 2"));

    // An unknown initial frame makes the generator fail in step 1.
    let other = taskgen::generate(Task::SudokuCompletion, Difficulty::Easy, 0).unwrap();
    let t = run_tpo(&other, &gen, &marker_judge(), &TpoConfig::default(), &PromptTemplateSet::builtin()).unwrap();
    assert!(!t.complete && t.prompts.len() == 1 && t.losses.is_empty());
}

#[test]
fn step_functions() {
    let tpl = PromptTemplateSet::builtin();
    let clip = VideoClip::new(vec![Frame::filled(4, 4, [1, 2, 3]); 3], 8.0).unwrap();
    let j = ScriptedJudge::new(["video 1 reaches the goal; video 2 crosses a wall"]);
    let (loss, _) = textual_loss(&[clip.clone(), clip.clone()], "P", "DEF", &j, &tpl, 8).unwrap();
    assert_eq!(loss, "video 1 reaches the goal; video 2 crosses a wall");
    assert_eq!(j.transcript()[0].images, 3);
    assert!(matches!(
        textual_gradient("P", "", &ScriptedJudge::new(["x"]), &tpl),
        Err(TpoError::Precondition(_))
    ));
    let j = ScriptedJudge::new(["ok"]);
    assert_eq!(textual_gradient("P", "LOSS TEXT", &j, &tpl).unwrap(), "ok");
    assert!(j.transcript()[0].text.contains("LOSS TEXT"));
    assert_eq!(update_prompt("P", "G", &ScriptedJudge::new(["```\nNEW\n```"]), &tpl).unwrap(), "NEW");

    // A broken template is rejected before the judge is called.
    let bad = tpl.clone().with(TemplateKind::Loss, "{current_prompt} only");
    let j = ScriptedJudge::new(["never"]);
    assert!(matches!(
        textual_loss(&[clip.clone(), clip], "P", "D", &j, &bad, 8),
        Err(TpoError::Config(_))
    ));
    assert_eq!(j.calls(), 0);
}

#[test]
fn baselines() {
    let tpl = PromptTemplateSet::builtin();
    let s = maze();
    let j = ScriptedJudge::new(["An enriched prompt"]);
    let r = pre_rewrite("short prompt here", &s.initial, &j, &tpl).unwrap();
    assert_eq!((r.prompt.as_str(), r.truncated), ("An enriched prompt", false));
    assert_eq!(j.calls(), 1);
    let long = "word ".repeat(50);
    let r = pre_rewrite("two words", &s.initial, &ScriptedJudge::new([long]), &tpl).unwrap();
    assert!(r.truncated && r.prompt.split_whitespace().count() == 4);

    let clip = taskgen::render_gt_video(&s).unwrap();
    let j = ScriptedJudge::new(["revised"]);
    assert_eq!(post_rewrite("p", &clip, &j, &tpl).unwrap(), "revised");
    assert_eq!((j.calls(), j.transcript()[0].images), (1, 8));

    let judge = ScriptedJudge::new(["3", "7"]);
    let r = rank_by_reward(&[clip.clone(), clip.clone()], "p", &RewardScorer::JudgeScore { judge: &judge }, &tpl).unwrap();
    assert_eq!((r.best, r.worst), (1, 0));
    let judge = ScriptedJudge::new(["5", "5"]);
    let r = rank_by_reward(&[clip.clone(), clip.clone()], "p", &RewardScorer::JudgeScore { judge: &judge }, &tpl).unwrap();
    assert_eq!((r.best, r.worst), (0, 0));
    let judge = ScriptedJudge::new(["great"]);
    assert!(matches!(
        rank_by_reward(&[clip.clone()], "p", &RewardScorer::JudgeScore { judge: &judge }, &tpl),
        Err(TpoError::Unparseable(_))
    ));

    let emb = PatchHistogramEmbedder;
    let stat = taskgen::corrupt(&s, taskgen::CorruptionMode::StaticVideo, 0).unwrap();
    let r = rank_by_reward(
        &[stat, clip],
        "p",
        &RewardScorer::EmbedderSim {
            embedder: &emb,
            target: Some(&s.target),
        },
        &tpl,
    )
    .unwrap();
    assert_eq!((r.best, r.worst), (1, 0));
}

#[test]
fn authoring() {
    let tpl = PromptTemplateSet::builtin();
    let s = maze();
    let j = ScriptedJudge::new(["authored"]);
    assert_eq!(author_prompt(&s, Some(&j as &dyn JudgeClient), &tpl).unwrap(), "authored");
    assert_eq!(j.transcript()[0].images, 2);
    let offline = author_prompt(&s, None, &tpl).unwrap();
    assert_eq!(offline, s.prompt);
    let tivi_core::GroundTruth::MazeTruth { goal_color, .. } = &s.truth else { panic!() };
    assert!(offline.contains(goal_color.as_str()), "{offline}");
}

#[test]
fn judge_errors_propagate() {
    let j = FnJudge::new(|_, _, _| Err(ClientError::Transport("down".into())));
    let r = textual_gradient("p", "l", &j, &PromptTemplateSet::builtin());
    assert!(matches!(r, Err(TpoError::Judge(ClientError::Transport(_)))));
    let _ = Arc::new(j);
}
