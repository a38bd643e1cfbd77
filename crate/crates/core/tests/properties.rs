use proptest::prelude::*;

use tivi_core::harness::{pass_at_k_outcomes, Outcome};
use tivi_core::imgproc::{homography_from_points, hsv, otsu_threshold, ssim, GrayImage};
use tivi_core::model::{Cell, Frame, MazeGrid, VideoClip};
use tivi_core::modelio::http::{decode_chat, encode_chat};
use tivi_core::modelio::JudgeAdapter;
use tivi_core::tpo::stitch_vertical;
use tivi_core::track::{verify_maze_trajectory, TrackPoint, Trajectory};
use tivi_core::verify::expr::parse_expression;

mod common;
use common::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn otsu_matches_exhaustive(counts in prop::collection::vec(0u64..200, 256), sparse in prop::collection::vec(0usize..256, 0..6)) {
        let mut hist = [0u64; 256];
        if sparse.is_empty() {
            hist.copy_from_slice(&counts);
        } else {
            // A few occupied bins exercise the degenerate and tie cases.
            for (j, &b) in sparse.iter().enumerate() {
                hist[b] += counts[j] + 1;
            }
        }
        prop_assert_eq!(otsu_threshold(&hist), otsu_reference(&hist));
    }

    #[test]
    fn ssim_of_identical_images_is_one(w in 8u32..48, h in 8u32..48, seed in any::<u64>()) {
        let data: Vec<u8> = (0..(w * h) as u64).map(|i| ((i.wrapping_mul(0x9E37_79B9).wrapping_add(seed)) >> 7) as u8).collect();
        let img = GrayImage::new(w, h, data).unwrap();
        prop_assert!((ssim(&img, &img).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn homography_maps_corners(jit in prop::collection::vec(-120.0f64..120.0, 16)) {
        let base = [(100.0, 100.0), (900.0, 100.0), (900.0, 900.0), (100.0, 900.0)];
        let src: [(f64, f64); 4] = std::array::from_fn(|i| (base[i].0 + jit[2 * i], base[i].1 + jit[2 * i + 1]));
        let dst: [(f64, f64); 4] = std::array::from_fn(|i| (base[i].0 + jit[8 + 2 * i], base[i].1 + jit[9 + 2 * i]));
        let h = homography_from_points(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            let (x, y) = h.apply(s.0, s.1).unwrap();
            prop_assert!(((x - d.0).powi(2) + (y - d.1).powi(2)).sqrt() < 0.5);
        }
    }

    #[test]
    fn hsv_matches_reference(px in prop::collection::vec(any::<[u8; 3]>(), 50)) {
        for p in px {
            let got = hsv(p);
            let (h, s, v) = hsv_reference(p[0], p[1], p[2]);
            prop_assert!(hue_gap(got.h, h) < 1e-6, "{p:?}: {} vs {h}", got.h);
            prop_assert!((got.s - s).abs() < 1e-6 && (got.v - v).abs() < 1e-6);
        }
    }

    #[test]
    fn parser_agrees_with_brute_force(text in expr_strategy()) {
        let ours = parse_expression(&text).ok().and_then(|e| e.eval().ok()).map(|r| r.0);
        prop_assert_eq!(ours, brute_eval(&text), "{}", text);
    }

    #[test]
    fn pass_at_k_matches_enumeration(m in prop::collection::vec(prop::collection::vec(prop::option::weighted(0.9, any::<bool>()), 0..7), 1..30), k in 1usize..6) {
        let r = pass_at_k_outcomes(&m, k).unwrap();
        let (passed, scored, incomplete) = enumerate_pass_at_k(&m, k);
        prop_assert_eq!((r.passed, r.scored, r.incomplete), (passed, scored, incomplete));
    }

    #[test]
    fn pass_at_k_is_monotone(m in prop::collection::vec(prop::collection::vec(any::<bool>(), 8), 1..30), k1 in 1usize..8, dk in 0usize..4) {
        let m: Vec<Vec<Outcome>> = m.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        let k2 = (k1 + dk).min(8);
        let a = pass_at_k_outcomes(&m, k1).unwrap().accuracy().unwrap();
        let b = pass_at_k_outcomes(&m, k2).unwrap().accuracy().unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn stitch_preserves_pixels(w in 1u32..12, h in 1u32..8, n in 1usize..5, clips in 1usize..4, seed in any::<u8>()) {
        let mk = |c: usize| {
            let frames = (0..n).map(|i| {
                let px = (0..w * h * 3).map(|j| (j as usize * 7 + i * 31 + c * 101 + seed as usize) as u8).collect();
                Frame::new(w, h, px).unwrap()
            }).collect();
            VideoClip::new(frames, 8.0).unwrap()
        };
        let src: Vec<VideoClip> = (0..clips).map(mk).collect();
        let (out, padded) = stitch_vertical(&src).unwrap();
        prop_assert!(!padded);
        prop_assert_eq!(out.dims(), (w, h * clips as u32));
        for (i, f) in out.frames().iter().enumerate() {
            for (c, clip) in src.iter().enumerate() {
                for y in 0..h {
                    for x in 0..w {
                        prop_assert_eq!(f.get(x, y + c as u32 * h), clip.frames()[i].get(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn chat_wire_round_trip(text in "\\PC{0,200}", n in 0usize..4, shade in any::<u8>()) {
        let a = JudgeAdapter::default();
        let frames: Vec<Frame> = (0..n).map(|i| Frame::filled(3 + i as u32, 2, [shade, i as u8, 9])).collect();
        let body = encode_chat("m", &text, &frames, &a).unwrap();
        let (t, back) = decode_chat(&body, &a).unwrap();
        prop_assert_eq!(t, text);
        prop_assert_eq!(back, frames);
    }
}

// Maze rules on a serpentine corridor: a frame-by-frame walk passes, and a
// wall jump fails.
fn serpentine(rows: usize, cols: usize) -> MazeGrid {
    let mut grid = vec!["#".repeat(2 * cols + 1)];
    for r in 0..rows {
        let mut line = String::from("#");
        line.push_str(&".".repeat(2 * cols - 1));
        line.push('#');
        grid.push(line);
        if r + 1 < rows {
            let mut wall: Vec<char> = "#".repeat(2 * cols + 1).chars().collect();
            let gap = if r % 2 == 0 { 2 * cols - 1 } else { 1 };
            wall[gap] = '.';
            grid.push(wall.into_iter().collect());
        }
    }
    grid.push("#".repeat(2 * cols + 1));
    MazeGrid {
        grid,
        origin: (0, 0),
        cell_px: 10,
    }
}

fn walk(m: &MazeGrid) -> Vec<Cell> {
    m.shortest_path(Cell::new(1, 1), Cell::new(m.rows() - 2, 1)).unwrap()
}

fn pt(frame: usize, c: Cell) -> TrackPoint {
    TrackPoint {
        frame,
        x: c.col as f64 * 10.0 + 5.0,
        y: c.row as f64 * 10.0 + 5.0,
        detected: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn dense_walks_pass_and_jumps_fail(rows in 2usize..5, cols in 2usize..6, hold in prop::collection::vec(1usize..4, 64)) {
        let m = serpentine(rows, cols);
        let path = walk(&m);
        // Dwell a random number of frames per cell, sampled every frame.
        let mut cells = Vec::new();
        for (i, c) in path.iter().enumerate() {
            for _ in 0..hold[i % hold.len()] {
                cells.push(*c);
            }
        }
        let mut t = Trajectory { points: cells.iter().enumerate().map(|(k, &c)| pt(k, c)).collect() };
        let v = verify_maze_trajectory(&t, &m, path[0], *path.last().unwrap(), 2);
        prop_assert!(v.pass, "{:?}", v.evidence);
        // A missed sample widens the allowed step to the index gap.
        if t.points.len() > 3 {
            t.points[1].detected = false;
            let v = verify_maze_trajectory(&t, &m, path[0], *path.last().unwrap(), 2);
            prop_assert!(v.pass, "{:?}", v.evidence);
        }
        // Jump straight through the first horizontal wall.
        let jump = Trajectory { points: vec![pt(0, Cell::new(1, 1)), pt(1, Cell::new(3, 1))] };
        let v = verify_maze_trajectory(&jump, &m, Cell::new(1, 1), Cell::new(3, 1), 2);
        prop_assert!(!v.pass);
    }
}

#[test]
fn precedence() {
    let v = parse_expression("2+3×4").unwrap().eval().unwrap();
    assert_eq!(v.0, Q::from_integer(14));
    assert_eq!(brute_eval("2+3×4"), Some(Q::from_integer(14)));
    assert_eq!(brute_eval("(2+3)×4"), Some(Q::from_integer(20)));
    assert_eq!(brute_eval("7÷0"), None);
}
