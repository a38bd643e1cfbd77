use rand::Rng as _;

use crate::imgproc::palette::NamedColor;
use crate::imgproc::Canvas;
use crate::model::{Dimension, Frame, GroundTruth};

use super::{pick_colors, prompt, CorruptionMode, GenError, Instance, Params, Rng, MIN_FRAMES};

const EMPTY: [u8; 3] = [60, 60, 60];
const GRID: [u8; 3] = [30, 30, 30];
const TRIES: usize = 5_000;

type Board = Vec<Vec<Option<u8>>>;

pub(crate) struct Match3 {
    kinds: Vec<&'static NamedColor>,
    initial: Board,
    swapped: Board,
    cleared: Board,
    settled: Board,
    /// Leftmost column of the cleared triple.
    window: usize,
    cell: u32,
    origin: (u32, u32),
    width: u32,
    height: u32,
    bg: [u8; 3],
}

fn has_triple(b: &Board) -> bool {
    let (rows, cols) = (b.len(), b[0].len());
    let same = |a: Option<u8>, x: Option<u8>, y: Option<u8>| a.is_some() && a == x && a == y;
    for r in 0..rows {
        for c in 0..cols {
            if c + 2 < cols && same(b[r][c], b[r][c + 1], b[r][c + 2]) {
                return true;
            }
            if r + 2 < rows && same(b[r][c], b[r + 1][c], b[r + 2][c]) {
                return true;
            }
        }
    }
    false
}

/// Clear the bottom cells of columns `w..w+3` and let those columns fall.
fn clear_and_settle(b: &Board, w: usize) -> (Board, Board) {
    let rows = b.len();
    let mut cleared = b.clone();
    for c in w..w + 3 {
        cleared[rows - 1][c] = None;
    }
    let mut settled = cleared.clone();
    for c in w..w + 3 {
        for r in (1..rows).rev() {
            settled[r][c] = settled[r - 1][c];
        }
        settled[0][c] = None;
    }
    (cleared, settled)
}

fn mirror(b: &mut Board) {
    for row in b.iter_mut() {
        row.reverse();
    }
}

/// Random board whose bottom row reads `K K X K` at `j..j+4` and which has
/// no triple anywhere; vertically adjacent tiles always differ.
fn random_board(n: usize, kinds: u8, j: usize, rng: &mut Rng) -> Option<Board> {
    let mut b: Board = vec![vec![None; n]; n];
    let k = rng.random_range(0..kinds);
    let x = loop {
        let v = rng.random_range(0..kinds);
        if v != k {
            break v;
        }
    };
    let last = n - 1;
    b[last][j] = Some(k);
    b[last][j + 1] = Some(k);
    b[last][j + 2] = Some(x);
    b[last][j + 3] = Some(k);
    for r in (0..n).rev() {
        for c in 0..n {
            if b[r][c].is_some() {
                continue;
            }
            let mut ok: Vec<u8> = (0..kinds)
                .filter(|&v| {
                    let below = r + 1 < n && b[r + 1][c] == Some(v);
                    let left2 = c >= 2 && b[r][c - 1] == Some(v) && b[r][c - 2] == Some(v);
                    let right2 = c + 2 < n && b[r][c + 1] == Some(v) && b[r][c + 2] == Some(v);
                    !below && !left2 && !right2
                })
                .collect();
            if r == last {
                // Tiles beside the pattern must not extend the future triple.
                ok.retain(|&v| !(v == k && (c + 1 == j || c == j + 4)));
            }
            if ok.is_empty() {
                return None;
            }
            b[r][c] = Some(ok[rng.random_range(0..ok.len())]);
        }
    }
    // Vertical neighbours across the forced bottom row.
    for c in 0..n {
        if n >= 2 && b[last - 1][c] == b[last][c] {
            return None;
        }
    }
    Some(b)
}

impl Match3 {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Match3, GenError> {
        let n = p.difficulty.pick(6, 7, 8);
        let n_kinds = p.difficulty.pick(4, 5, 5);
        let kinds = pick_colors(p, rng, n_kinds, &[]);
        if kinds.len() < n_kinds {
            return Err(GenError::Failed("palette too small for match-3".into()));
        }
        for _ in 0..TRIES {
            let j = rng.random_range(0..=n - 4);
            let Some(mut initial) = random_board(n, n_kinds as u8, j, rng) else {
                continue;
            };
            if has_triple(&initial) {
                continue;
            }
            let (mut swap, mut window) = ((j + 2, j + 3), j);
            if rng.random_bool(0.5) {
                mirror(&mut initial);
                swap = (n - 1 - (j + 3), n - 1 - (j + 2));
                window = n - 1 - (j + 2);
            }
            let mut swapped = initial.clone();
            swapped[n - 1].swap(swap.0, swap.1);
            let (cleared, settled) = clear_and_settle(&swapped, window);
            if has_triple(&cleared) || has_triple(&settled) {
                continue;
            }
            let short = p.width.min(p.height);
            let cell = (short as f64 * 0.96) as u32 / n as u32;
            let origin = ((p.width - cell * n as u32) / 2, (p.height - cell * n as u32) / 2);
            return Ok(Match3 {
                kinds,
                initial,
                swapped,
                cleared,
                settled,
                window,
                cell,
                origin,
                width: p.width,
                height: p.height,
                bg: p.bg,
            });
        }
        Err(GenError::Failed("no admissible match-3 board".into()))
    }

    fn tile(&self, c: &mut Canvas, x0: i64, y0: i64, kind: u8) {
        let s = self.cell as i64;
        let base = self.kinds[kind as usize].rgb;
        let period = (s / 8).max(4);
        let half = period / 2;
        for dy in 2..s - 2 {
            for dx in 2..s - 2 {
                let stripe = match kind % 5 {
                    0 => dy % period < half,
                    1 => dx % period < half,
                    2 => (dx / period + dy / period) % 2 == 0,
                    3 => (dx + dy) % period < half,
                    _ => (dx - dy).rem_euclid(period) < half,
                };
                c.set(x0 + dx, y0 + dy, if stripe { [255, 255, 255] } else { base });
            }
        }
    }

    fn render(&self, b: &Board) -> Frame {
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let n = b.len() as i64;
        let s = self.cell as i64;
        let (ox, oy) = (self.origin.0 as i64, self.origin.1 as i64);
        c.fill_rect(ox, oy, n * s, n * s, GRID);
        for (r, row) in b.iter().enumerate() {
            for (col, t) in row.iter().enumerate() {
                let (x, y) = (ox + col as i64 * s, oy + r as i64 * s);
                match t {
                    Some(k) => self.tile(&mut c, x, y, *k),
                    None => c.fill_rect(x + 2, y + 2, s - 4, s - 4, EMPTY),
                }
            }
        }
        c.into_frame()
    }

    fn board_at(&self, i: usize) -> &Board {
        match i {
            0..=4 => &self.initial,
            5..=7 => &self.swapped,
            8..=10 => &self.cleared,
            _ => &self.settled,
        }
    }
}

impl Instance for Match3 {
    fn truth(&self) -> GroundTruth {
        GroundTruth::PixelTarget {
            reference: self.render(&self.settled),
        }
    }

    fn prompt(&self) -> String {
        let n = self.initial.len();
        prompt::compose(
            Dimension::Structural,
            &format!("A {n}x{n} match-3 board of striped colored tiles; one swap of two neighbouring tiles in the bottom row lines up three identical tiles."),
            "Swap exactly those two tiles, let the three matching tiles vanish, and let the tiles above them drop down one cell.",
            "The board ends with empty slots only at the top of the three affected columns.",
        )
    }

    fn frame_count(&self) -> usize {
        MIN_FRAMES
    }

    fn frame(&self, i: usize) -> Frame {
        self.render(self.board_at(i))
    }

    fn corrupt(&self, mode: CorruptionMode, _rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::OffTargetRegion {
            return None;
        }
        let n = self.initial.len();
        // Farthest window from the true one, so most columns disagree.
        let wrong = (0..=n - 3)
            .filter(|&w| w != self.window)
            .max_by_key(|&w| (w.abs_diff(self.window), usize::MAX - w))?;
        let (cleared, settled) = clear_and_settle(&self.swapped, wrong);
        Some(
            (0..MIN_FRAMES)
                .map(|i| match i {
                    0..=7 => self.frame(i),
                    8..=10 => self.render(&cleared),
                    _ => self.render(&settled),
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settle_shifts_columns() {
        let b: Board = vec![vec![Some(0), Some(1), Some(2)], vec![Some(3), Some(3), Some(3)]];
        let (cleared, settled) = clear_and_settle(&b, 0);
        assert_eq!(cleared[1], vec![None, None, None]);
        assert_eq!(settled[0], vec![None, None, None]);
        assert_eq!(settled[1], vec![Some(0), Some(1), Some(2)]);
        assert!(has_triple(&b));
        assert!(!has_triple(&settled));
    }
}
