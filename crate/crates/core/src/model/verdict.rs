use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, Rational};

/// Verifier that produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sudoku,
    Arithmetic,
    MultiChoice,
    DigitSequence,
    Sorting,
    Match3,
    EmbeddingRegion,
    GroundedCount,
    GroundedOddOneOut,
    MazeTrajectory,
    Elimination,
    Qa,
    /// Infrastructure failures before any verifier ran (generation failed,
    /// configuration mismatch).
    Harness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelTally {
    pub label: String,
    pub expected: usize,
    pub observed: usize,
}

/// Classification of one sampled trajectory point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointClass {
    pub frame: usize,
    pub cell: Option<Cell>,
    pub detected: bool,
    pub free: bool,
    /// Set on the point that broke a rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaAnswer {
    pub question: String,
    pub expected: bool,
    pub answer: Option<bool>,
    pub reply: String,
}

/// Machine-readable record backing a verdict; one variant per metric family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Sudoku {
        read_back: Option<Vec<Vec<u8>>>,
        unrecognized: Vec<Cell>,
        mismatches: Vec<Cell>,
        note: Option<String>,
    },
    Arithmetic {
        read_text: String,
        expected_text: String,
        textual_match: bool,
        computed: Option<Rational>,
        equivalent: bool,
        note: Option<String>,
    },
    MultiChoice {
        red_regions: usize,
        letter: Option<char>,
        score: f64,
        note: Option<String>,
    },
    DigitSequence {
        read: Vec<Option<u8>>,
        expected: Vec<u8>,
        note: Option<String>,
    },
    Sorting {
        detected: usize,
        expected: usize,
        heights: Vec<u32>,
        observed_ranks: Vec<usize>,
        expected_ranks: Vec<usize>,
        observed_ties: Vec<bool>,
        expected_ties: Vec<bool>,
    },
    Match3 {
        ssim: f64,
        edge_overlap: f64,
        resized: bool,
    },
    Embedding {
        similarity: f64,
    },
    Grounded {
        tallies: Vec<LabelTally>,
        selected_center: Option<(f64, f64)>,
        note: Option<String>,
    },
    Maze {
        points: Vec<PointClass>,
        failed: Option<String>,
    },
    Elimination {
        sampled: Vec<usize>,
        presence: Vec<Vec<String>>,
        observed_order: Vec<Vec<String>>,
        note: Option<String>,
    },
    Qa {
        answers: Vec<QaAnswer>,
    },
    Error {
        message: String,
    },
}

/// Outcome for one (sample, generation) pair.
///
/// `error` is set for metric-errors: the harness (not the model) failed, so
/// the generation is excluded from Pass@k instead of counted as a miss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub sample_id: String,
    pub generation_index: usize,
    #[serde(default)]
    pub seed: u64,
    pub metric: Metric,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub evidence: Evidence,
}

impl Verdict {
    pub fn new(metric: Metric, pass: bool, evidence: Evidence) -> Self {
        Verdict {
            sample_id: String::new(),
            generation_index: 0,
            seed: 0,
            metric,
            pass,
            error: None,
            evidence,
        }
    }

    pub fn metric_error(metric: Metric, message: impl Into<String>) -> Self {
        let message = message.into();
        Verdict {
            sample_id: String::new(),
            generation_index: 0,
            seed: 0,
            metric,
            pass: false,
            error: Some(message.clone()),
            evidence: Evidence::Error { message },
        }
    }

    pub fn is_metric_error(&self) -> bool {
        self.error.is_some()
    }

    pub fn for_generation(mut self, sample_id: &str, generation_index: usize, seed: u64) -> Self {
        self.sample_id = sample_id.to_string();
        self.generation_index = generation_index;
        self.seed = seed;
        self
    }
}

/// Writes one JSON object per line. An empty list produces an empty file.
pub fn write_verdicts(verdicts: &[Verdict], path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in verdicts {
        serde_json::to_writer(&mut w, v)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_verdicts(path: &Path) -> std::io::Result<Vec<Verdict>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), n + 1),
            )
        })?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_writes_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.jsonl");
        write_verdicts(&[], &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap().len(), 0);
        assert!(read_verdicts(&p).unwrap().is_empty());
    }

    #[test]
    fn pass_verdict_is_one_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.jsonl");
        let v = Verdict::new(Metric::Match3, true, Evidence::Match3 {
            ssim: 1.0,
            edge_overlap: 1.0,
            resized: false,
        })
        .for_generation("s", 0, 42);
        write_verdicts(&[v.clone()], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("\"pass\":true"));
        assert!(text.starts_with("{\"sample_id\":\"s\",\"generation_index\":0,\"seed\":42,"));
        assert_eq!(read_verdicts(&p).unwrap(), vec![v]);
    }
}
