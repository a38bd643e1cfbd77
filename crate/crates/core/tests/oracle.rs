// Seeds disjoint from the acceptance run, checked in parallel.

use rayon::prelude::*;

use tivi_core::model::{Difficulty, Task};
use tivi_core::taskgen::{self, CorruptionMode};
use tivi_core::track::TrackConfig;
use tivi_core::verify::{verify_final, Deps, VerifyConfig};

const SEEDS: std::ops::Range<u64> = 5..8;

fn cases() -> Vec<(Task, Difficulty, u64)> {
    Task::SUPPORTED
        .into_iter()
        .flat_map(|t| Difficulty::ALL.into_iter().flat_map(move |d| SEEDS.map(move |s| (t, d, s))))
        .collect()
}

#[test]
fn ground_truth_videos_pass() {
    let (cfg, tcfg) = (VerifyConfig::default(), TrackConfig::default());
    let failures: Vec<String> = cases()
        .into_par_iter()
        .filter_map(|(task, d, seed)| {
            let s = taskgen::generate(task, d, seed).unwrap();
            let clip = taskgen::render_gt_video(&s).unwrap();
            let v = verify_final(&s, &clip, &Deps::default(), &cfg, &tcfg).unwrap();
            (!v.pass).then(|| format!("{task:?}/{d:?}/{seed}: {:?}", v.evidence))
        })
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn corruptions_fail() {
    let (cfg, tcfg) = (VerifyConfig::default(), TrackConfig::default());
    let runs: Vec<(Task, Difficulty, u64, CorruptionMode)> = cases()
        .into_iter()
        .flat_map(|(t, d, s)| CorruptionMode::applicable(t).into_iter().map(move |m| (t, d, s, m)))
        .collect();
    let survivors: Vec<String> = runs
        .into_par_iter()
        .filter_map(|(task, d, seed, mode)| {
            let s = taskgen::generate(task, d, seed).unwrap();
            let clip = taskgen::corrupt(&s, mode, seed + 100).unwrap();
            let v = verify_final(&s, &clip, &Deps::default(), &cfg, &tcfg).unwrap();
            (v.pass || v.is_metric_error()).then(|| format!("{task:?}/{mode}/{d:?}/{seed}: {:?}", v.evidence))
        })
        .collect();
    assert!(survivors.is_empty(), "{}", survivors.join("\n"));
}
