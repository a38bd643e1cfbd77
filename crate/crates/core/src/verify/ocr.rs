//! Verifiers that read rendered glyphs back out of the final frame.

use crate::imgproc::glyphs::{read_row, segment_glyphs, union, DIGITS, LETTERS, OPERATORS};
use crate::imgproc::{
    binarize, connected_components, edge_map, find_quad, homography_from_points, hsv, ink_mask, luma, warp_perspective,
    GlyphAtlas, GrayImage, Mask, Threshold,
};
use crate::model::{BBox, Cell, Evidence, Frame, Metric, Rational, Verdict};

use super::expr::parse_expression;
use super::VerifyConfig;

/// Rectified side length per sudoku cell.
const CELL_PX: u32 = 90;
/// Fraction of a cell trimmed on every side before reading it.
const CELL_MARGIN: f64 = 0.12;

fn full(frame: &Frame) -> BBox {
    BBox::new(0, 0, frame.width(), frame.height())
}

/// Dark pixels relative to an Otsu split of the frame's luma.
fn otsu_ink(frame: &Frame) -> Mask {
    let gray = GrayImage::from_frame(frame);
    let b = binarize(&gray, Threshold::Otsu);
    if b.fallback {
        return Mask::new(frame.width(), frame.height());
    }
    let mut m = b.mask;
    for v in m.data.iter_mut() {
        *v = !*v;
    }
    m
}

/// The text row with the most glyphs (ties: the wider row).
fn main_row(mask: &Mask, region: BBox) -> Vec<BBox> {
    segment_glyphs(mask, region)
        .into_iter()
        .max_by_key(|r| {
            let w = r.last().map_or(0, |l| l.right()) - r.first().map_or(0, |f| f.x);
            (r.len(), w)
        })
        .unwrap_or_default()
}

/// Union of the non-speck components inside `region`.
fn ink_box(mask: &Mask, region: BBox, min_px: usize) -> Option<BBox> {
    let sub = crate::imgproc::glyphs::crop_mask(mask, region)?;
    connected_components(&sub)
        .into_iter()
        .filter(|c| c.pixel_count >= min_px)
        .map(|c| BBox::new(c.bbox.x + region.x, c.bbox.y + region.y, c.bbox.w, c.bbox.h))
        .reduce(union)
}

pub fn verify_sudoku(last: &Frame, solution: &[Vec<u8>], cfg: &VerifyConfig) -> Verdict {
    let n = solution.len();
    let fail = |note: &str| {
        Verdict::new(
            Metric::Sudoku,
            false,
            Evidence::Sudoku {
                read_back: None,
                unrecognized: Vec::new(),
                mismatches: Vec::new(),
                note: Some(note.to_string()),
            },
        )
    };
    if n == 0 || solution.iter().any(|r| r.len() != n) {
        return Verdict::metric_error(Metric::Sudoku, "truth grid is not square");
    }
    let Ok(edges) = edge_map(&GrayImage::from_frame(last)) else {
        return fail("grid not found: frame too small");
    };
    let b = binarize(&edges, Threshold::Otsu);
    if b.fallback {
        return fail("grid not found: no edges");
    }
    let Ok(quad) = find_quad(&b.mask) else {
        return fail("grid not found: no quadrilateral");
    };
    let side = CELL_PX * n as u32;
    let s = side as f64;
    let Ok(h) = homography_from_points(&quad, &[(0.0, 0.0), (s, 0.0), (s, s), (0.0, s)]) else {
        return fail("grid not found: degenerate quadrilateral");
    };
    let rect = warp_perspective(last, &h, side, side);
    let ink = Mask::from_fn(side, side, |x, y| luma(rect.get(x, y)) < 128);

    let margin = (CELL_PX as f64 * CELL_MARGIN).round() as u32;
    let inner = CELL_PX - 2 * margin;
    let blank_below = 4.max((inner * inner / 100) as usize);
    let vocab: Vec<char> = DIGITS[1..=n.min(9)].to_vec();
    let atlas = GlyphAtlas::builtin();

    let mut grid = vec![vec![0u8; n]; n];
    let mut unrecognized = Vec::new();
    let mut mismatches = Vec::new();
    for (r, row) in grid.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            let region = BBox::new(c as u32 * CELL_PX + margin, r as u32 * CELL_PX + margin, inner, inner);
            if ink.count_in(region) < blank_below {
                // Blank cell: reads as 0, which never equals a solution digit.
                mismatches.push(Cell::new(r, c));
                continue;
            }
            let m = ink_box(&ink, region, 3).and_then(|bb| atlas.recognize(&ink, bb, &vocab));
            match m.filter(|m| m.score >= cfg.ncc_threshold) {
                Some(m) => {
                    *slot = m.ch.to_digit(10).unwrap_or(0) as u8;
                    if *slot != solution[r][c] {
                        mismatches.push(Cell::new(r, c));
                    }
                }
                None => unrecognized.push(Cell::new(r, c)),
            }
        }
    }
    let pass = unrecognized.is_empty() && mismatches.is_empty();
    Verdict::new(
        Metric::Sudoku,
        pass,
        Evidence::Sudoku {
            read_back: Some(grid),
            note: (!unrecognized.is_empty()).then(|| format!("{} unrecognized cell(s)", unrecognized.len())),
            unrecognized,
            mismatches,
        },
    )
}

pub fn verify_arithmetic(last: &Frame, value: Rational, cfg: &VerifyConfig) -> Verdict {
    let expected_text = value.to_string();
    let ink = otsu_ink(last);
    let row = main_row(&ink, full(last));
    let vocab: Vec<char> = DIGITS.iter().chain(OPERATORS).copied().collect();
    let text: String = read_row(&ink, &row, &vocab, cfg.ncc_threshold)
        .into_iter()
        .map(|c| c.unwrap_or('?'))
        .collect();
    let Some((_, rhs)) = text.split_once('=') else {
        return Verdict::new(
            Metric::Arithmetic,
            false,
            Evidence::Arithmetic {
                read_text: text,
                expected_text,
                textual_match: false,
                computed: None,
                equivalent: false,
                note: Some("no `=` glyph found".into()),
            },
        );
    };
    let rhs = rhs.to_string();
    let textual_match = rhs == expected_text;
    let (computed, note) = match parse_expression(&rhs) {
        Ok(e) => match e.eval() {
            Ok(v) => (Some(v), None),
            Err(err) => (None, Some(err.to_string())),
        },
        Err(err) => (None, Some(err.to_string())),
    };
    let equivalent = computed == Some(value);
    Verdict::new(
        Metric::Arithmetic,
        textual_match || equivalent,
        Evidence::Arithmetic {
            read_text: rhs,
            expected_text,
            textual_match,
            computed,
            equivalent,
            note,
        },
    )
}

pub fn verify_multichoice(last: &Frame, letter: char, cfg: &VerifyConfig) -> Verdict {
    let (w, h) = last.dims();
    let red = Mask::from_fn(w, h, |x, y| {
        let c = hsv(last.get(x, y));
        cfg.red_hue_bands.iter().any(|b| b.contains(c))
    });
    let regions: Vec<_> = connected_components(&red)
        .into_iter()
        .filter(|c| c.pixel_count > 100)
        .collect();
    let evidence = |red_regions: usize, letter: Option<char>, score: f64, note: Option<String>| Evidence::MultiChoice {
        red_regions,
        letter,
        score,
        note,
    };
    if regions.len() != 1 {
        let note = format!("ambiguous selection: {} red regions", regions.len());
        return Verdict::new(Metric::MultiChoice, false, evidence(regions.len(), None, 0.0, Some(note)));
    }
    let bb = regions[0].bbox;
    let inset = 2.max(bb.w.min(bb.h) / 20);
    if bb.w <= 2 * inset || bb.h <= 2 * inset {
        return Verdict::new(Metric::MultiChoice, false, evidence(1, None, 0.0, Some("red region too small".into())));
    }
    let inside = BBox::new(bb.x + inset, bb.y + inset, bb.w - 2 * inset, bb.h - 2 * inset);
    // Dark neutral ink only: the red frame itself is dark in luma.
    let ink = ink_mask(last, 100);
    let top = segment_glyphs(&ink, inside).into_iter().next().unwrap_or_default();
    let atlas = GlyphAtlas::builtin();
    let best = top
        .iter()
        .filter_map(|&g| atlas.recognize(&ink, g, LETTERS))
        .max_by(|a, b| a.score.total_cmp(&b.score));
    match best {
        Some(m) if m.score >= cfg.ncc_threshold => {
            Verdict::new(Metric::MultiChoice, m.ch == letter, evidence(1, Some(m.ch), m.score, None))
        }
        Some(m) => Verdict::new(
            Metric::MultiChoice,
            false,
            evidence(1, None, m.score, Some(format!("best letter `{}` below threshold", m.ch))),
        ),
        None => Verdict::new(Metric::MultiChoice, false, evidence(1, None, 0.0, Some("no letter in selection".into()))),
    }
}

pub fn verify_digit_sequence(last: &Frame, digits: &[u8], cfg: &VerifyConfig) -> Verdict {
    let ink = otsu_ink(last);
    let row = main_row(&ink, full(last));
    let read: Vec<Option<u8>> = read_row(&ink, &row, DIGITS, cfg.ncc_threshold)
        .into_iter()
        .map(|c| c.and_then(|c| c.to_digit(10)).map(|d| d as u8))
        .collect();
    let note = if read.iter().any(Option::is_none) {
        Some("unrecognized glyph".to_string())
    } else if read.len() != digits.len() {
        Some(format!("read {} digits, expected {}", read.len(), digits.len()))
    } else {
        None
    };
    let pass = read.len() == digits.len() && read.iter().zip(digits).all(|(r, d)| *r == Some(*d));
    Verdict::new(
        Metric::DigitSequence,
        pass,
        Evidence::DigitSequence {
            read,
            expected: digits.to_vec(),
            note,
        },
    )
}
