//! Verifiers based on color segmentation, image similarity and grounding.

use std::collections::BTreeMap;

use crate::imgproc::{connected_components, edge_map, hsv, ssim, GrayImage, HueBand, Mask};
use crate::model::{BBox, Evidence, Frame, GroundMode, LabelTally, LabeledBox, Metric, Verdict};
use crate::modelio::{cosine, Embedder, Grounder};

use super::VerifyConfig;

/// Bars whose heights differ by at most this many pixels count as tied.
pub const TIE_TOLERANCE_PX: u32 = 2;
const EDGE_ON: u8 = 64;

/// Rank of each element when sorted by value; runs of values within
/// `TIE_TOLERANCE_PX` of their neighbour keep their left-to-right order.
/// Also returns, per sorted position, whether it ties with the next one.
fn ranks(values: &[u32]) -> (Vec<usize>, Vec<bool>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by_key(|&i| (values[i], i));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &idx {
        match groups.last_mut() {
            Some(g) if values[i] - values[*g.last().unwrap()] <= TIE_TOLERANCE_PX => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut rank = vec![0; values.len()];
    let mut ties = Vec::new();
    let mut next = 0;
    for mut g in groups {
        g.sort_unstable();
        for (k, &i) in g.iter().enumerate() {
            rank[i] = next;
            next += 1;
            ties.push(k + 1 < g.len());
        }
    }
    ties.pop();
    (rank, ties)
}

pub fn verify_sorting(last: &Frame, heights: &[u32], order: &[usize], count: usize) -> Verdict {
    let band = HueBand::new(200.0, 260.0, 0.4, 0.2);
    let (w, h) = last.dims();
    let mask = Mask::from_fn(w, h, |x, y| band.contains(hsv(last.get(x, y))));
    let mut bars: Vec<BBox> = connected_components(&mask)
        .into_iter()
        .filter(|c| c.pixel_count >= 50)
        .map(|c| c.bbox)
        .collect();
    bars.sort_by_key(|b| (b.x, b.y));
    let observed: Vec<u32> = bars.iter().map(|b| b.h).collect();
    let (observed_ranks, observed_ties) = ranks(&observed);
    let sorted_truth: Vec<u32> = order.iter().filter_map(|&i| heights.get(i).copied()).collect();
    let (expected_ranks, expected_ties) = ranks(&sorted_truth);
    let pass = bars.len() == count && observed_ranks == expected_ranks && observed_ties == expected_ties;
    Verdict::new(
        Metric::Sorting,
        pass,
        Evidence::Sorting {
            detected: bars.len(),
            expected: count,
            heights: observed,
            observed_ranks,
            expected_ranks,
            observed_ties,
            expected_ties,
        },
    )
}

fn edges_on(img: &GrayImage) -> Option<Vec<bool>> {
    edge_map(img).ok().map(|e| e.data.iter().map(|&v| v > EDGE_ON).collect())
}

pub fn verify_match3(last: &Frame, reference: &Frame, cfg: &VerifyConfig) -> Verdict {
    let a = GrayImage::from_frame(last);
    let mut b = GrayImage::from_frame(reference);
    let resized = a.width != b.width || a.height != b.height;
    if resized {
        b = b.resize_nearest(a.width, a.height);
    }
    let Ok(score) = ssim(&a, &b) else {
        return Verdict::metric_error(Metric::Match3, format!("frame {}x{} too small for SSIM", a.width, a.height));
    };
    let (Some(ea), Some(eb)) = (edges_on(&a), edges_on(&b)) else {
        return Verdict::metric_error(Metric::Match3, "frame too small for edge detection");
    };
    let truth_edges = eb.iter().filter(|&&v| v).count();
    let both = ea.iter().zip(&eb).filter(|(x, y)| **x && **y).count();
    let edge_overlap = if truth_edges == 0 {
        1.0
    } else {
        both as f64 / truth_edges as f64
    };
    let pass = score >= cfg.ssim_threshold && edge_overlap >= cfg.edge_overlap_threshold;
    Verdict::new(
        Metric::Match3,
        pass,
        Evidence::Match3 {
            ssim: score,
            edge_overlap,
            resized,
        },
    )
}

pub fn verify_embedding_region(
    last: &Frame,
    bbox: BBox,
    reference: &[f64],
    embedder: &dyn Embedder,
    cfg: &VerifyConfig,
) -> Verdict {
    let Some(crop) = last.crop(bbox) else {
        return Verdict::metric_error(Metric::EmbeddingRegion, format!("target box {bbox:?} lies outside the frame"));
    };
    let e = match embedder.embed(&crop) {
        Ok(e) => e,
        Err(err) => return Verdict::metric_error(Metric::EmbeddingRegion, format!("embedder failed: {err}")),
    };
    match cosine(&e, reference) {
        Some(similarity) => Verdict::new(
            Metric::EmbeddingRegion,
            similarity >= cfg.embed_threshold,
            Evidence::Embedding { similarity },
        ),
        None => Verdict::metric_error(
            Metric::EmbeddingRegion,
            format!("embedding of length {} is incomparable with reference of length {}", e.len(), reference.len()),
        ),
    }
}

pub fn verify_grounded(last: &Frame, objects: &[LabeledBox], mode: &GroundMode, grounder: &dyn Grounder) -> Verdict {
    match mode {
        GroundMode::Count => {
            let mut expected: BTreeMap<&str, usize> = BTreeMap::new();
            for o in objects {
                *expected.entry(o.label.as_str()).or_default() += 1;
            }
            let mut tallies = Vec::with_capacity(expected.len());
            for (label, n) in expected {
                match grounder.ground(last, label) {
                    Ok(d) => tallies.push(LabelTally {
                        label: label.to_string(),
                        expected: n,
                        observed: d.len(),
                    }),
                    Err(e) => {
                        return Verdict::metric_error(Metric::GroundedCount, format!("grounding `{label}` failed: {e}"))
                    }
                }
            }
            let pass = tallies.iter().all(|t| t.expected == t.observed);
            Verdict::new(
                Metric::GroundedCount,
                pass,
                Evidence::Grounded {
                    tallies,
                    selected_center: None,
                    note: None,
                },
            )
        }
        GroundMode::OddOneOut {
            selected_label,
            odd_index,
        } => {
            let Some(odd) = objects.get(*odd_index) else {
                return Verdict::metric_error(Metric::GroundedOddOneOut, format!("odd index {odd_index} out of range"));
            };
            let dets = match grounder.ground(last, selected_label) {
                Ok(d) => d,
                Err(e) => {
                    return Verdict::metric_error(
                        Metric::GroundedOddOneOut,
                        format!("grounding `{selected_label}` failed: {e}"),
                    )
                }
            };
            // Highest confidence wins; the grounder's order breaks ties.
            let top = dets.iter().reduce(|a, b| if b.confidence > a.confidence { b } else { a });
            let center = top.map(|d| d.bbox.center());
            let pass = center.is_some_and(|(x, y)| odd.bbox.contains_point(x, y));
            Verdict::new(
                Metric::GroundedOddOneOut,
                pass,
                Evidence::Grounded {
                    tallies: Vec::new(),
                    selected_center: center,
                    note: top.is_none().then(|| format!("no `{selected_label}` detected")),
                },
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_ranks_follow_x() {
        assert_eq!(ranks(&[30, 10, 20]), (vec![2, 0, 1], vec![false, false]));
        assert_eq!(ranks(&[10, 11, 40]), (vec![0, 1, 2], vec![true, false]));
        assert_eq!(ranks(&[11, 10, 40]), (vec![0, 1, 2], vec![true, false]));
        assert_eq!(ranks(&[]), (vec![], vec![]));
    }
}
