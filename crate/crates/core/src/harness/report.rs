use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{Difficulty, Dimension, SampleInfo, Task, Verdict};

use super::passk::{outcome, pass_at_k_outcomes, Outcome};
use super::HarnessError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub passed: usize,
    pub scored: usize,
    /// Samples excluded for lack of `k` usable generations.
    pub incomplete: usize,
}

impl Stat {
    fn add(&mut self, o: &Stat) {
        self.passed += o.passed;
        self.scored += o.scored;
        self.incomplete += o.incomplete;
    }

    pub fn percent(&self) -> Option<f64> {
        (self.scored > 0).then(|| 100.0 * self.passed as f64 / self.scored as f64)
    }

    /// Two decimals, or `n/a` for an empty group.
    pub fn display(&self) -> String {
        self.percent().map_or_else(|| "n/a".to_string(), |p| format!("{p:.2}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub difficulty: Difficulty,
    pub stat: Stat,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: Dimension,
    pub title: String,
    pub cells: Vec<CellReport>,
    pub overall: Stat,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    pub dimension: Dimension,
    pub stat: Stat,
    /// `None` when the dataset holds no scored sample of this task.
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub k: usize,
    pub model: Option<String>,
    pub samples: usize,
    pub generations: usize,
    pub metric_errors: usize,
    pub dimensions: Vec<DimensionReport>,
    /// All 24 tasks in taxonomy order.
    pub tasks: Vec<TaskReport>,
    pub overall: Stat,
    pub accuracy: Option<f64>,
    pub incomplete_samples: Vec<String>,
}

impl Report {
    pub fn dimension(&self, d: Dimension) -> &DimensionReport {
        self.dimensions.iter().find(|r| r.dimension == d).expect("every dimension is reported")
    }
}

/// Group verdicts by sample and compute one report per `k`. Samples in
/// `infos` without verdicts count as incomplete.
pub fn aggregate_report(
    verdicts: &[Verdict],
    infos: &[SampleInfo],
    k_values: &[usize],
    model: Option<&str>,
) -> Result<Vec<Report>, HarnessError> {
    let index: HashMap<&str, usize> = infos.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    if index.len() != infos.len() {
        return Err(HarnessError::Config("duplicate sample id in dataset".into()));
    }
    let mut per_sample: Vec<Vec<(usize, Outcome)>> = vec![Vec::new(); infos.len()];
    for v in verdicts {
        let &i = index
            .get(v.sample_id.as_str())
            .ok_or_else(|| HarnessError::Orphan(v.sample_id.clone()))?;
        per_sample[i].push((v.generation_index, outcome(v)));
    }
    let outcomes: Vec<Vec<Outcome>> = per_sample
        .into_iter()
        .map(|mut v| {
            v.sort_by_key(|(g, _)| *g);
            v.into_iter().map(|(_, o)| o).collect()
        })
        .collect();
    let metric_errors = verdicts.iter().filter(|v| v.is_metric_error()).count();

    k_values
        .iter()
        .map(|&k| {
            let r = pass_at_k_outcomes(&outcomes, k)?;
            let mut stats = vec![
                Stat {
                    passed: 0,
                    scored: 1,
                    incomplete: 0
                };
                infos.len()
            ];
            for &i in &r.incomplete {
                stats[i] = Stat {
                    passed: 0,
                    scored: 0,
                    incomplete: 1,
                };
            }
            for (i, o) in outcomes.iter().enumerate() {
                if stats[i].scored == 1 && o.iter().filter_map(|x| *x).take(k).any(|p| p) {
                    stats[i].passed = 1;
                }
            }
            Ok(build(k, model, infos, &stats, verdicts.len(), metric_errors))
        })
        .collect()
}

fn build(k: usize, model: Option<&str>, infos: &[SampleInfo], stats: &[Stat], generations: usize, metric_errors: usize) -> Report {
    let mut cells: BTreeMap<(Dimension, Difficulty), Stat> = BTreeMap::new();
    let mut tasks: BTreeMap<Task, Stat> = BTreeMap::new();
    let mut overall = Stat::default();
    for (s, st) in infos.iter().zip(stats) {
        cells.entry((s.dimension, s.difficulty)).or_default().add(st);
        tasks.entry(s.task).or_default().add(st);
        overall.add(st);
    }
    let dimensions = Dimension::ALL
        .iter()
        .map(|&d| {
            let mut total = Stat::default();
            let cells = Difficulty::ALL
                .iter()
                .map(|&diff| {
                    let stat = cells.get(&(d, diff)).copied().unwrap_or_default();
                    total.add(&stat);
                    CellReport {
                        difficulty: diff,
                        stat,
                        accuracy: stat.percent(),
                    }
                })
                .collect();
            DimensionReport {
                dimension: d,
                title: d.title().to_string(),
                cells,
                overall: total,
                accuracy: total.percent(),
            }
        })
        .collect();
    let tasks = Task::all()
        .into_iter()
        .map(|t| {
            let stat = tasks.get(&t).copied().unwrap_or_default();
            TaskReport {
                task: t,
                dimension: t.dimension(),
                stat,
                accuracy: stat.percent(),
            }
        })
        .collect();
    Report {
        k,
        model: model.map(str::to_string),
        samples: infos.len(),
        generations,
        metric_errors,
        dimensions,
        tasks,
        overall,
        accuracy: overall.percent(),
        incomplete_samples: infos
            .iter()
            .zip(stats)
            .filter(|(_, st)| st.incomplete > 0)
            .map(|(s, _)| s.id.clone())
            .collect(),
    }
}

pub fn render_json(reports: &[Report]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

pub const CSV_HEADER: &str = "group,metric,k,accuracy";

pub fn render_csv(reports: &[Report]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let metric = format!("pass@{}", r.k);
        let mut row = |group: String, st: &Stat| {
            let _ = writeln!(out, "{group},{metric},{},{}", r.k, st.display());
        };
        for d in &r.dimensions {
            for c in &d.cells {
                row(format!("{}/{}", d.dimension.slug(), c.difficulty.slug()), &c.stat);
            }
            row(format!("{}/overall", d.dimension.slug()), &d.overall);
        }
        row("overall".into(), &r.overall);
        for t in &r.tasks {
            row(format!("task/{}", t.task.slug()), &t.stat);
        }
    }
    out
}

/// One table per `k` with Easy / Med. / Hard / Over. columns per dimension
/// and an Overall column, followed by the per-task breakdown.
pub fn render_markdown(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        let model = r.model.as_deref().unwrap_or("model");
        let _ = writeln!(out, "## Pass@{}\n", r.k);
        let mut head = String::from("| Model |");
        let mut rule = String::from("|---|");
        let mut body = format!("| {model} |");
        for d in &r.dimensions {
            for c in &d.cells {
                let _ = write!(head, " {} {} |", d.title, c.difficulty.short());
                rule.push_str("---:|");
                let _ = write!(body, " {} |", c.stat.display());
            }
            let _ = write!(head, " {} Over. |", d.title);
            rule.push_str("---:|");
            let _ = write!(body, " {} |", d.overall.display());
        }
        head.push_str(" Overall |");
        rule.push_str("---:|");
        let _ = write!(body, " {} |", r.overall.display());
        let _ = writeln!(out, "{head}\n{rule}\n{body}\n");

        let _ = writeln!(out, "| Task | Dimension | Samples | Pass@{} |\n|---|---|---:|---:|", r.k);
        for t in &r.tasks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                t.task.name(),
                t.dimension.title(),
                t.stat.scored,
                t.stat.display()
            );
        }
        let _ = writeln!(
            out,
            "\n{} samples, {} generations, {} metric-errors, {} incomplete samples.\n",
            r.samples,
            r.generations,
            r.metric_errors,
            r.incomplete_samples.len()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Evidence, Metric};

    fn info(id: &str, task: Task, d: Difficulty) -> SampleInfo {
        SampleInfo {
            id: id.into(),
            dimension: task.dimension(),
            task,
            difficulty: d,
        }
    }

    fn v(id: &str, g: usize, pass: bool) -> Verdict {
        Verdict::new(Metric::Qa, pass, Evidence::Qa { answers: vec![] }).for_generation(id, g, g as u64)
    }

    #[test]
    fn single_passing_sample() {
        let infos = [info("a", Task::MazeSolving, Difficulty::Easy)];
        let r = &aggregate_report(&[v("a", 0, true)], &infos, &[1], None).unwrap()[0];
        assert_eq!(r.accuracy, Some(100.0));
        assert_eq!(r.dimension(Dimension::Structural).accuracy, Some(100.0));
        assert_eq!(r.dimension(Dimension::SymbolicLogical).accuracy, None);
        assert_eq!(r.tasks.len(), 24);
        assert!(render_csv(std::slice::from_ref(r)).starts_with("group,metric,k,accuracy\n"));
    }

    #[test]
    fn orphan_rejected() {
        let infos = [info("a", Task::MazeSolving, Difficulty::Easy)];
        assert!(matches!(
            aggregate_report(&[v("zzz", 0, true)], &infos, &[1], None),
            Err(HarnessError::Orphan(_))
        ));
    }

    #[test]
    fn generation_order_is_respected() {
        let infos = [info("a", Task::MazeSolving, Difficulty::Easy)];
        let r = aggregate_report(&[v("a", 1, true), v("a", 0, false)], &infos, &[1, 2], None).unwrap();
        assert_eq!(r[0].accuracy, Some(0.0));
        assert_eq!(r[1].accuracy, Some(100.0));
    }
}
