use crate::model::BBox;

use super::Mask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    pub pixel_count: usize,
    pub bbox: BBox,
}

/// Labeling result: `labels[i]` is `0` for background, otherwise the owning
/// component's `id + 1`.
#[derive(Clone, Debug)]
pub struct Labeling {
    pub components: Vec<Component>,
    pub labels: Vec<u32>,
    pub width: u32,
}

impl Labeling {
    /// Pixel coordinates of one component, scan order.
    pub fn pixels(&self, id: usize) -> Vec<(u32, u32)> {
        let want = id as u32 + 1;
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == want)
            .map(|(i, _)| ((i % self.width as usize) as u32, (i / self.width as usize) as u32))
            .collect()
    }
}

/// 4-connected components, sorted by descending pixel count and then by the
/// `(y, x)` of their bounding box. Ids follow that order.
pub fn connected_components(mask: &Mask) -> Vec<Component> {
    label_components(mask).components
}

pub fn label_components(mask: &Mask) -> Labeling {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut raw = vec![0u32; w * h];
    let mut found: Vec<(usize, BBox)> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.data[start] || raw[start] != 0 {
            continue;
        }
        let label = found.len() as u32 + 1;
        raw[start] = label;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut count = 0;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            count += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            let mut visit = |j: usize| {
                if mask.data[j] && raw[j] == 0 {
                    raw[j] = label;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        found.push((
            count,
            BBox::new(x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32),
        ));
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, ba) = found[a];
        let (cb, bb) = found[b];
        cb.cmp(&ca).then(ba.y.cmp(&bb.y)).then(ba.x.cmp(&bb.x))
    });
    let mut remap = vec![0u32; found.len() + 1];
    let mut components = Vec::with_capacity(found.len());
    for (new_id, &old) in order.iter().enumerate() {
        remap[old + 1] = new_id as u32 + 1;
        components.push(Component {
            id: new_id,
            pixel_count: found[old].0,
            bbox: found[old].1,
        });
    }
    for l in raw.iter_mut() {
        *l = remap[*l as usize];
    }
    Labeling {
        components,
        labels: raw,
        width: mask.width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&Mask::new(5, 5)).is_empty());
    }

    #[test]
    fn two_rectangles() {
        let m = Mask::from_fn(40, 30, |x, y| {
            (2..12).contains(&x) && (3..8).contains(&y) || (20..35).contains(&x) && (10..28).contains(&y)
        });
        let c = connected_components(&m);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].pixel_count, 15 * 18);
        assert_eq!(c[0].bbox, BBox::new(20, 10, 15, 18));
        assert_eq!(c[1].pixel_count, 10 * 5);
        assert_eq!(c[1].id, 1);
    }

    #[test]
    fn diagonal_pixels_are_separate() {
        let m = Mask::from_fn(2, 2, |x, y| x == y);
        assert_eq!(connected_components(&m).len(), 2);
    }
}
