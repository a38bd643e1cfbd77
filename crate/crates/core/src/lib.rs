//! Visual-reasoning benchmark harness for image-to-video generation models.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: frames, clips, samples, ground truth, verdicts and the on-disk dataset layout.
//! - [`imgproc`]: the pixel-math primitives the verifiers are built on (HSV, Otsu, components,
//!   quads, homographies, Sobel, SSIM, template matching, the glyph atlas).
//! - [`taskgen`]: procedural generators for ten task scenarios with ground-truth videos and
//!   controlled corruptions.
//! - [`verify`] and [`track`]: final-state and process-and-goal verifiers.
//! - [`modelio`]: generator / judge / embedder / grounder contracts, mocks and HTTP clients.
//! - [`tpo`]: test-time prompt optimisation and the rewriting baselines.
//! - [`harness`]: Pass@k, evaluation runs, reports and the command line.

pub mod harness;
pub mod imgproc;
pub mod model;
pub mod modelio;
pub mod taskgen;
pub mod tpo;
pub mod track;
pub mod verify;

pub use model::{
    BBox, Difficulty, Dimension, Frame, GroundTruth, Rational, Task, TaskSample, Verdict, VideoClip,
};
