use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{Difficulty, Dimension, Frame, FrameError, GroundTruth, Task, TaskSample, VideoClip};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("sample `{sample}`: missing file {path}")]
    MissingFile { sample: String, path: PathBuf },
    #[error("sample `{sample}`: {reason}")]
    Invalid { sample: String, reason: String },
    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Frame { path: PathBuf, source: FrameError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One manifest row. Paths are relative to the dataset root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: String,
    pub dimension: Dimension,
    pub task: Task,
    pub difficulty: Difficulty,
    pub initial: String,
    pub target: String,
    pub prompt: String,
    pub seed: u64,
    pub truth: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_video: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub samples: Vec<SampleEntry>,
}

/// Labels of a sample without its pixels; enough for report aggregation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub id: String,
    pub dimension: Dimension,
    pub task: Task,
    pub difficulty: Difficulty,
}

impl Manifest {
    pub fn infos(&self) -> Vec<SampleInfo> {
        self.samples
            .iter()
            .map(|s| SampleInfo {
                id: s.id.clone(),
                dimension: s.dimension,
                task: s.task,
                difficulty: s.difficulty,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub samples: Vec<TaskSample>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Option<&TaskSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Ground-truth clip stored alongside the sample, if any.
    pub fn gt_video(&self, id: &str) -> Result<Option<VideoClip>, DatasetError> {
        let Some(entry) = self.manifest.samples.iter().find(|e| e.id == id) else {
            return Ok(None);
        };
        entry
            .gt_video
            .as_ref()
            .map(|rel| read_clip(&self.root.join(rel)))
            .transpose()
    }
}

fn read_frame(path: &Path) -> Result<Frame, DatasetError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Frame::from_png(&bytes).map_err(|source| DatasetError::Frame {
        path: path.to_path_buf(),
        source,
    })
}

fn write_frame(frame: &Frame, path: &Path) -> Result<(), DatasetError> {
    let png = frame.to_png().map_err(|source| DatasetError::Frame {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, png).map_err(io_err(path))
}

pub fn read_manifest(root: &Path) -> Result<Manifest, DatasetError> {
    let path = root.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|source| DatasetError::Json { path, source })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(DatasetError::SchemaVersion {
            found: manifest.schema_version,
        });
    }
    let mut seen = HashSet::new();
    for s in &manifest.samples {
        if !seen.insert(s.id.as_str()) {
            return Err(DatasetError::DuplicateId(s.id.clone()));
        }
    }
    Ok(manifest)
}

/// Loads `root/manifest.json` and materializes every sample, decoding its
/// frames and validating invariants.
pub fn load_dataset(root: &Path) -> Result<Dataset, DatasetError> {
    let manifest = read_manifest(root)?;
    let mut samples = Vec::with_capacity(manifest.samples.len());
    for entry in &manifest.samples {
        samples.push(materialize(root, entry)?);
    }
    Ok(Dataset {
        root: root.to_path_buf(),
        manifest,
        samples,
    })
}

fn require(root: &Path, sample: &str, rel: &str) -> Result<PathBuf, DatasetError> {
    let path = root.join(rel);
    if path.exists() {
        Ok(path)
    } else {
        Err(DatasetError::MissingFile {
            sample: sample.to_string(),
            path,
        })
    }
}

fn materialize(root: &Path, entry: &SampleEntry) -> Result<TaskSample, DatasetError> {
    let invalid = |reason: String| DatasetError::Invalid {
        sample: entry.id.clone(),
        reason,
    };
    let initial = read_frame(&require(root, &entry.id, &entry.initial)?)?;
    let target = read_frame(&require(root, &entry.id, &entry.target)?)?;
    if let Some(gt) = &entry.gt_video {
        require(root, &entry.id, &format!("{gt}/clip.json"))?;
    }
    let truth = decode_truth(root, &entry.id, &entry.truth)?;
    let sample = TaskSample {
        id: entry.id.clone(),
        dimension: entry.dimension,
        task: entry.task,
        difficulty: entry.difficulty,
        initial,
        target,
        prompt: entry.prompt.clone(),
        truth,
        seed: entry.seed,
    };
    sample.validate().map_err(invalid)?;
    Ok(sample)
}

/// Pixel targets are stored as a PNG next to the sample and referenced by
/// relative path; every other variant is plain JSON.
fn decode_truth(root: &Path, id: &str, value: &Value) -> Result<GroundTruth, DatasetError> {
    if value.get("kind").and_then(Value::as_str) == Some("pixel_target") {
        let rel = value
            .get("reference")
            .and_then(Value::as_str)
            .ok_or_else(|| DatasetError::Invalid {
                sample: id.to_string(),
                reason: "pixel_target.reference must be a relative png path".into(),
            })?;
        let frame = read_frame(&require(root, id, rel)?)?;
        return Ok(GroundTruth::PixelTarget { reference: frame });
    }
    serde_json::from_value(value.clone()).map_err(|e| DatasetError::Invalid {
        sample: id.to_string(),
        reason: format!("truth: {e}"),
    })
}

fn encode_truth(truth: &GroundTruth, root: &Path, dir_rel: &str) -> Result<Value, DatasetError> {
    if let GroundTruth::PixelTarget { reference } = truth {
        let rel = format!("{dir_rel}/truth_reference.png");
        write_frame(reference, &root.join(&rel))?;
        return Ok(serde_json::json!({"kind": "pixel_target", "reference": rel}));
    }
    Ok(serde_json::to_value(truth).expect("ground truth serializes"))
}

/// Writes samples (and optionally their ground-truth clips) under `root` in
/// the manifest layout. `gt` is called once per sample so clips never need to
/// be held in memory together.
pub fn write_dataset(
    root: &Path,
    samples: &[TaskSample],
    mut gt: impl FnMut(&TaskSample) -> Option<VideoClip>,
) -> Result<Manifest, DatasetError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    let mut entries = Vec::with_capacity(samples.len());
    let mut seen = HashSet::new();
    for s in samples {
        if !seen.insert(s.id.as_str()) {
            return Err(DatasetError::DuplicateId(s.id.clone()));
        }
        let dir_rel = format!("samples/{}", s.id);
        let dir = root.join(&dir_rel);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        write_frame(&s.initial, &dir.join("initial.png"))?;
        write_frame(&s.target, &dir.join("target.png"))?;
        let gt_video = match gt(s) {
            Some(clip) => {
                let rel = format!("{dir_rel}/gt");
                write_clip(&clip, &root.join(&rel))?;
                Some(rel)
            }
            None => None,
        };
        entries.push(SampleEntry {
            id: s.id.clone(),
            dimension: s.dimension,
            task: s.task,
            difficulty: s.difficulty,
            initial: format!("{dir_rel}/initial.png"),
            target: format!("{dir_rel}/target.png"),
            prompt: s.prompt.clone(),
            seed: s.seed,
            truth: encode_truth(&s.truth, root, &dir_rel)?,
            gt_video,
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        samples: entries,
    };
    let path = root.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(manifest)
}

#[derive(Serialize, Deserialize)]
struct ClipMeta {
    fps: f64,
    count: usize,
}

/// A clip on disk is a directory of `frame_%04d.png` plus `clip.json`.
pub fn write_clip(clip: &VideoClip, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, f) in clip.frames().iter().enumerate() {
        write_frame(f, &dir.join(format!("frame_{i:04}.png")))?;
    }
    let meta = ClipMeta {
        fps: clip.fps(),
        count: clip.len(),
    };
    let path = dir.join("clip.json");
    fs::write(&path, serde_json::to_string(&meta).expect("clip meta serializes"))
        .map_err(io_err(&path))
}

pub fn read_clip(dir: &Path) -> Result<VideoClip, DatasetError> {
    let path = dir.join("clip.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let meta: ClipMeta =
        serde_json::from_str(&text).map_err(|source| DatasetError::Json { path, source })?;
    let frames = (0..meta.count)
        .map(|i| read_frame(&dir.join(format!("frame_{i:04}.png"))))
        .collect::<Result<Vec<_>, _>>()?;
    VideoClip::new(frames, meta.fps).map_err(|source| DatasetError::Frame {
        path: dir.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_manifest_loads() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("manifest.json"),
            r#"{"schema_version":1,"samples":[]}"#,
        )
        .unwrap();
        let ds = load_dataset(dir.path()).unwrap();
        assert!(ds.samples.is_empty());
        assert_eq!(ds.manifest.schema_version, 1);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("manifest.json"),
            r#"{"schema_version":2,"samples":[]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_dataset(dir.path()),
            Err(DatasetError::SchemaVersion { found: 2 })
        ));
    }

    #[test]
    fn missing_initial_names_the_sample() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = serde_json::json!({
            "schema_version": 1,
            "samples": [{
                "id": "maze-easy-000",
                "dimension": "structural",
                "task": "maze solving",
                "difficulty": "easy",
                "initial": "samples/maze-easy-000/initial.png",
                "target": "samples/maze-easy-000/target.png",
                "prompt": "p",
                "seed": 1,
                "truth": {"kind": "choice_letter", "letter": "A"}
            }]
        });
        fs::write(dir.path().join("manifest.json"), manifest.to_string()).unwrap();
        match load_dataset(dir.path()) {
            Err(DatasetError::MissingFile { sample, path }) => {
                assert_eq!(sample, "maze-easy-000");
                assert!(path.ends_with("initial.png"));
            }
            other => panic!("expected missing file, got {other:?}"),
        }
    }

    #[test]
    fn clip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let clip = VideoClip::new(
            vec![Frame::filled(3, 2, [1, 2, 3]), Frame::filled(3, 2, [9, 8, 7])],
            12.0,
        )
        .unwrap();
        write_clip(&clip, &dir.path().join("c")).unwrap();
        assert!(dir.path().join("c/frame_0001.png").exists());
        assert_eq!(read_clip(&dir.path().join("c")).unwrap(), clip);
    }
}
