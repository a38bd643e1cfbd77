//! Image-processing primitives used by the verifiers and generators.
//!
//! Conventions: pixel centers sit at integer coordinates, connectivity is
//! 4-neighborhood, and "ink" is dark pixels on a light background.

pub mod color;
pub mod components;
pub mod draw;
pub mod edges;
pub mod glyphs;
pub mod gray;
pub mod homography;
pub mod palette;
pub mod quad;
pub mod ssim;
pub mod template;
pub mod threshold;

pub use color::{hsv, rgb_to_hsv, Hsv, HueBand};
pub use components::{connected_components, label_components, Component, Labeling};
pub use draw::Canvas;
pub use edges::edge_map;
pub use glyphs::{GlyphAtlas, GlyphMatch};
pub use gray::{ink_mask, luma, GrayImage, Mask};
pub use homography::{homography_from_points, resize_bilinear, warp_onto, warp_perspective, Homography};
pub use quad::find_quad;
pub use ssim::ssim;
pub use template::{match_template, ncc, TemplateMatch};
pub use threshold::{binarize, otsu_threshold, Binarized, Threshold};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImgError {
    #[error("image too small: need at least {need:?}, got {got:?}")]
    TooSmall { need: (u32, u32), got: (u32, u32) },
    #[error("buffer length {actual} does not match expected {expected}")]
    Buffer { expected: usize, actual: usize },
    #[error("dimension mismatch: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("degenerate shape: {0}")]
    Degenerate(String),
    #[error("three of the four points are collinear")]
    Collinear,
    #[error("template has zero variance")]
    FlatTemplate,
    #[error("template {template:?} larger than image {image:?}")]
    TemplateTooLarge { template: (u32, u32), image: (u32, u32) },
    #[error("homography is singular")]
    Singular,
}
