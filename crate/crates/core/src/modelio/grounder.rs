use std::collections::BTreeMap;

use crate::imgproc::palette::color_of_label;
use crate::imgproc::{connected_components, hsv, Mask};
use crate::model::{Frame, LabeledBox};

use super::{ClientError, Detection, Grounder};

/// Grounds labels whose first word names a palette color ("red block",
/// "gray node") by HSV segmentation. Confidence is the fill ratio of the
/// component inside its box.
#[derive(Clone, Copy, Debug)]
pub struct HsvGrounder {
    pub min_area: usize,
}

impl Default for HsvGrounder {
    fn default() -> Self {
        HsvGrounder { min_area: 30 }
    }
}

impl Grounder for HsvGrounder {
    fn ground(&self, frame: &Frame, label: &str) -> Result<Vec<Detection>, ClientError> {
        let color = color_of_label(label)
            .ok_or_else(|| ClientError::Backend(format!("label `{label}` does not start with a known color")))?;
        let (w, h) = frame.dims();
        let mask = Mask::from_fn(w, h, |x, y| color.matches(hsv(frame.get(x, y))));
        let mut out: Vec<Detection> = connected_components(&mask)
            .into_iter()
            .filter(|c| c.pixel_count >= self.min_area)
            .map(|c| Detection {
                bbox: c.bbox,
                confidence: c.pixel_count as f64 / c.bbox.area() as f64,
            })
            .collect();
        out.sort_by(|a, b| b.bbox.area().cmp(&a.bbox.area()).then((a.bbox.y, a.bbox.x).cmp(&(b.bbox.y, b.bbox.x))));
        Ok(out)
    }
}

/// Returns fixed boxes per label regardless of the frame.
#[derive(Clone, Debug, Default)]
pub struct StaticGrounder {
    boxes: BTreeMap<String, Vec<Detection>>,
}

impl StaticGrounder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_objects(objects: &[LabeledBox]) -> Self {
        let mut g = Self::new();
        for o in objects {
            g.boxes.entry(o.label.clone()).or_default().push(Detection {
                bbox: o.bbox,
                confidence: 1.0,
            });
        }
        g
    }

    pub fn with(mut self, label: &str, detections: Vec<Detection>) -> Self {
        self.boxes.insert(label.to_string(), detections);
        self
    }
}

impl Grounder for StaticGrounder {
    fn ground(&self, _frame: &Frame, label: &str) -> Result<Vec<Detection>, ClientError> {
        Ok(self.boxes.get(label).cloned().unwrap_or_default())
    }
}
