use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::imgproc::palette::INK;
use crate::imgproc::{homography_from_points, warp_onto, Canvas, Homography};
use crate::model::{Dimension, Frame, GroundTruth};

use super::{hold_len, prompt, CorruptionMode, GenError, Instance, Params, Rng};

const FILL: [u8; 3] = [30, 40, 150];

pub(crate) struct Sudoku {
    box_rows: usize,
    box_cols: usize,
    puzzle: Vec<Vec<u8>>,
    solution: Vec<Vec<u8>>,
    /// Blank cells in the order the video fills them.
    fill_order: Vec<(usize, usize)>,
    layout: Layout,
    warp: Option<Homography>,
    bg: [u8; 3],
    width: u32,
    height: u32,
}

#[derive(Clone, Copy)]
struct Layout {
    x: u32,
    y: u32,
    side: u32,
    n: u32,
}

impl Layout {
    fn cell(&self) -> f64 {
        self.side as f64 / self.n as f64
    }
}

fn candidates(g: &[Vec<u8>], r: usize, c: usize, br: usize, bc: usize) -> Vec<u8> {
    let n = br * bc;
    let mut used = vec![false; n + 1];
    for i in 0..n {
        used[g[r][i] as usize] = true;
        used[g[i][c] as usize] = true;
    }
    let (r0, c0) = (r / br * br, c / bc * bc);
    for rr in r0..r0 + br {
        for cc in c0..c0 + bc {
            used[g[rr][cc] as usize] = true;
        }
    }
    (1..=n as u8).filter(|&d| !used[d as usize]).collect()
}

fn fill(g: &mut Vec<Vec<u8>>, br: usize, bc: usize, rng: &mut Rng) -> bool {
    let n = br * bc;
    let Some(pos) = (0..n * n).find(|&i| g[i / n][i % n] == 0) else {
        return true;
    };
    let (r, c) = (pos / n, pos % n);
    let mut cand = candidates(g, r, c, br, bc);
    cand.shuffle(rng);
    for d in cand {
        g[r][c] = d;
        if fill(g, br, bc, rng) {
            return true;
        }
    }
    g[r][c] = 0;
    false
}

/// Number of completions of `grid` (0 = blank), counting no further than
/// `limit`.
pub fn count_solutions(grid: &[Vec<u8>], box_rows: usize, box_cols: usize, limit: usize) -> usize {
    let mut g = grid.to_vec();
    fn go(g: &mut Vec<Vec<u8>>, br: usize, bc: usize, limit: usize) -> usize {
        let n = br * bc;
        // Most-constrained blank first.
        let mut best: Option<(usize, usize, Vec<u8>)> = None;
        for r in 0..n {
            for c in 0..n {
                if g[r][c] == 0 {
                    let cand = candidates(g, r, c, br, bc);
                    if best.as_ref().is_none_or(|b| cand.len() < b.2.len()) {
                        best = Some((r, c, cand));
                    }
                }
            }
        }
        let Some((r, c, cand)) = best else {
            return 1;
        };
        let mut total = 0;
        for d in cand {
            g[r][c] = d;
            total += go(g, br, bc, limit - total);
            if total >= limit {
                break;
            }
        }
        g[r][c] = 0;
        total
    }
    go(&mut g, box_rows, box_cols, limit)
}

/// Every row, column and box holds each digit `1..=n` exactly once.
pub fn is_valid_solution(grid: &[Vec<u8>], box_rows: usize, box_cols: usize) -> bool {
    let n = box_rows * box_cols;
    if grid.len() != n || grid.iter().any(|r| r.len() != n) {
        return false;
    }
    let full = |it: &mut dyn Iterator<Item = u8>| {
        let mut v: Vec<u8> = it.collect();
        v.sort_unstable();
        v == (1..=n as u8).collect::<Vec<_>>()
    };
    (0..n).all(|r| full(&mut grid[r].iter().copied()))
        && (0..n).all(|c| full(&mut (0..n).map(|r| grid[r][c])))
        && (0..n).all(|b| {
            let (r0, c0) = (b / (n / box_cols) * box_rows, b % (n / box_cols) * box_cols);
            full(&mut (r0..r0 + box_rows).flat_map(|r| (c0..c0 + box_cols).map(move |c| (r, c))).map(|(r, c)| grid[r][c]))
        })
}

impl Sudoku {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Sudoku, GenError> {
        let (br, bc) = p.difficulty.pick((2, 2), (2, 3), (3, 3));
        let n = br * bc;
        let blanks = p.difficulty.pick(6, 12, 30);
        let mut solution = vec![vec![0u8; n]; n];
        if !fill(&mut solution, br, bc, rng) {
            return Err(GenError::Failed("sudoku fill failed".into()));
        }
        let mut puzzle = solution.clone();
        let mut cells: Vec<(usize, usize)> = (0..n * n).map(|i| (i / n, i % n)).collect();
        cells.shuffle(rng);
        let mut removed = Vec::new();
        for (r, c) in cells {
            if removed.len() == blanks {
                break;
            }
            let keep = puzzle[r][c];
            puzzle[r][c] = 0;
            if count_solutions(&puzzle, br, bc, 2) == 1 {
                removed.push((r, c));
            } else {
                puzzle[r][c] = keep;
            }
        }
        if removed.len() < blanks {
            return Err(GenError::Failed(format!("could only blank {} cells", removed.len())));
        }
        let mut fill_order = removed;
        fill_order.sort();

        let short = p.width.min(p.height);
        let side = (short as f64 * 0.8) as u32 / n as u32 * n as u32;
        let layout = Layout {
            x: (p.width - side) / 2,
            y: (p.height - side) / 2,
            side,
            n: n as u32,
        };
        let warp = if p.difficulty == crate::model::Difficulty::Easy {
            None
        } else {
            let j = side as f64 * 0.035;
            let (x0, y0, x1, y1) = (
                layout.x as f64,
                layout.y as f64,
                (layout.x + side) as f64,
                (layout.y + side) as f64,
            );
            let src = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
            let mut dst = src;
            for d in dst.iter_mut() {
                d.0 += rng.random_range(-j..=j);
                d.1 += rng.random_range(-j..=j);
            }
            Some(homography_from_points(&src, &dst).map_err(|e| GenError::Failed(e.to_string()))?)
        };
        Ok(Sudoku {
            box_rows: br,
            box_cols: bc,
            puzzle,
            solution,
            fill_order,
            layout,
            warp,
            bg: p.bg,
            width: p.width,
            height: p.height,
        })
    }

    fn render(&self, grid: &[Vec<u8>]) -> Frame {
        let l = self.layout;
        let n = l.n as usize;
        let mut c = Canvas::new(self.width, self.height, self.bg);
        c.fill_rect(l.x as i64, l.y as i64, l.side as i64, l.side as i64, [255, 255, 255]);
        let unit = (l.side as f64 / 300.0).max(1.0);
        let cell = l.cell();
        for i in 0..=n {
            let t = if i == 0 || i == n {
                3.0 * unit
            } else if i % self.box_cols == 0 && i % n != 0 {
                2.0 * unit
            } else {
                unit
            };
            let t = t.round().max(1.0) as i64;
            let pos = (l.x as f64 + i as f64 * cell).round() as i64;
            c.fill_rect(pos - t / 2, l.y as i64 - t / 2, t, l.side as i64 + t, INK);
        }
        for i in 0..=n {
            let t = if i == 0 || i == n {
                3.0 * unit
            } else if i % self.box_rows == 0 && i % n != 0 {
                2.0 * unit
            } else {
                unit
            };
            let t = t.round().max(1.0) as i64;
            let pos = (l.y as f64 + i as f64 * cell).round() as i64;
            c.fill_rect(l.x as i64 - t / 2, pos - t / 2, l.side as i64 + t, t, INK);
        }
        let scale = ((cell * 0.55) / 7.0).floor().max(2.0) as u32;
        for r in 0..n {
            for col in 0..n {
                let d = grid[r][col];
                if d == 0 {
                    continue;
                }
                let color = if self.puzzle[r][col] != 0 { INK } else { FILL };
                let cx = l.x as f64 + (col as f64 + 0.5) * cell;
                let cy = l.y as f64 + (r as f64 + 0.5) * cell;
                c.text_centered(cx, cy, scale, &d.to_string(), color);
            }
        }
        match &self.warp {
            None => c.into_frame(),
            Some(h) => {
                let flat = c.into_frame();
                let mut out = Canvas::new(self.width, self.height, self.bg);
                warp_onto(&mut out, &flat, h);
                out.into_frame()
            }
        }
    }

    fn state(&self, k: usize) -> Vec<Vec<u8>> {
        let mut g = self.puzzle.clone();
        for &(r, c) in &self.fill_order[..k.min(self.fill_order.len())] {
            g[r][c] = self.solution[r][c];
        }
        g
    }
}

impl Instance for Sudoku {
    fn truth(&self) -> GroundTruth {
        GroundTruth::SudokuGrid {
            box_rows: self.box_rows,
            box_cols: self.box_cols,
            puzzle: self.puzzle.clone(),
            solution: self.solution.clone(),
        }
    }

    fn prompt(&self) -> String {
        let n = self.box_rows * self.box_cols;
        prompt::compose(
            Dimension::SymbolicLogical,
            &format!("A {n}x{n} Sudoku grid with some digits given and some cells left blank."),
            &format!("The blank cells are filled in one at a time with digits from 1 to {n}, so every row, column and box ends up with each digit exactly once."),
            "The given digits never change and the finished grid is fully filled.",
        )
    }

    fn frame_count(&self) -> usize {
        hold_len(self.fill_order.len())
    }

    fn frame(&self, i: usize) -> Frame {
        self.render(&self.state(i))
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongDigit {
            return None;
        }
        let n = (self.box_rows * self.box_cols) as u8;
        let &(r, c) = self.fill_order.get(rng.random_range(0..self.fill_order.len()))?;
        let mut wrong = self.solution.clone();
        let right = wrong[r][c];
        let alt: Vec<u8> = (1..=n).filter(|&d| d != right).collect();
        wrong[r][c] = alt[rng.random_range(0..alt.len())];
        let last = self.render(&wrong);
        let total = self.frame_count();
        let k = self.fill_order.len();
        Some((0..total).map(|i| if i >= k { last.clone() } else { self.frame(i) }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_counts() {
        let solved = vec![vec![1, 2, 3, 4], vec![3, 4, 1, 2], vec![2, 1, 4, 3], vec![4, 3, 2, 1]];
        assert!(is_valid_solution(&solved, 2, 2));
        assert_eq!(count_solutions(&solved, 2, 2, 2), 1);
        let empty = vec![vec![0u8; 4]; 4];
        assert_eq!(count_solutions(&empty, 2, 2, 1000), 288);
        let mut bad = solved.clone();
        bad[0].swap(0, 1);
        assert!(!is_valid_solution(&bad, 2, 2));
    }
}
