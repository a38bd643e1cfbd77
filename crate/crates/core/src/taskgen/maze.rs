use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::imgproc::palette::{self, NamedColor};
use crate::imgproc::Canvas;
use crate::model::{Cell, Difficulty, Dimension, Frame, GroundTruth, MazeGrid};

use super::{hold_len, pick_colors, prompt, CorruptionMode, GenError, Instance, Params, Rng};

const WALL: [u8; 3] = [40, 40, 40];
pub(crate) const AGENT_LABEL: &str = "red block";

pub(crate) struct Maze {
    grid: MazeGrid,
    start: Cell,
    goal: Cell,
    goal_color: &'static NamedColor,
    path: Vec<Cell>,
    base: Frame,
}

/// Rooms per side for each difficulty.
fn rooms(d: Difficulty) -> usize {
    d.pick(5, 7, 9)
}

/// Target window for the shortest-path length in grid steps.
fn path_window(d: Difficulty) -> (usize, usize) {
    d.pick((8, 20), (16, 32), (24, 48))
}

/// Recursive backtracker over an `n × n` room lattice; returns `(2n+1)²`
/// rows of `#`/`.`.
fn carve(n: usize, rng: &mut Rng) -> Vec<Vec<u8>> {
    let g = 2 * n + 1;
    let mut cells = vec![vec![b'#'; g]; g];
    let mut seen = vec![vec![false; n]; n];
    let mut stack = vec![(0usize, 0usize)];
    seen[0][0] = true;
    cells[1][1] = b'.';
    while let Some(&(r, c)) = stack.last() {
        let mut next = Vec::with_capacity(4);
        if r > 0 && !seen[r - 1][c] {
            next.push((r - 1, c));
        }
        if c > 0 && !seen[r][c - 1] {
            next.push((r, c - 1));
        }
        if r + 1 < n && !seen[r + 1][c] {
            next.push((r + 1, c));
        }
        if c + 1 < n && !seen[r][c + 1] {
            next.push((r, c + 1));
        }
        match next.choose(rng) {
            Some(&(nr, nc)) => {
                seen[nr][nc] = true;
                cells[2 * nr + 1][2 * nc + 1] = b'.';
                cells[r + nr + 1][c + nc + 1] = b'.';
                stack.push((nr, nc));
            }
            None => {
                stack.pop();
            }
        }
    }
    cells
}

impl Maze {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Maze, GenError> {
        let n = rooms(p.difficulty);
        let g = 2 * n + 1;
        let rows = carve(n, rng);
        let cell_px = p.width.min(p.height) / g as u32;
        let origin = ((p.width - cell_px * g as u32) / 2, (p.height - cell_px * g as u32) / 2);
        let grid = MazeGrid {
            grid: rows.iter().map(|r| String::from_utf8(r.clone()).unwrap()).collect(),
            origin,
            cell_px,
        };

        let rooms: Vec<Cell> = (0..n)
            .flat_map(|r| (0..n).map(move |c| Cell::new(2 * r + 1, 2 * c + 1)))
            .collect();
        let (lo, hi) = path_window(p.difficulty);
        let mut in_window = Vec::new();
        let mut best: Option<(usize, Cell, Cell)> = None;
        for (i, &a) in rooms.iter().enumerate() {
            let dist = bfs_distances(&grid, a);
            for &b in &rooms[i + 1..] {
                let d = dist[b.row][b.col];
                if (lo..=hi).contains(&d) {
                    in_window.push((a, b));
                }
                let miss = if d < lo { lo - d } else { d.saturating_sub(hi) };
                if best.is_none_or(|(m, _, _)| miss < m) {
                    best = Some((miss, a, b));
                }
            }
        }
        let (mut start, mut goal) = match in_window.choose(rng) {
            Some(&pair) => pair,
            None => {
                let (_, a, b) = best.ok_or_else(|| GenError::Failed("maze has one room".into()))?;
                (a, b)
            }
        };
        if rng.random_bool(0.5) {
            std::mem::swap(&mut start, &mut goal);
        }
        let path = grid
            .shortest_path(start, goal)
            .ok_or_else(|| GenError::Failed("maze goal unreachable".into()))?;

        let goal_color = pick_colors(p, rng, 1, &["red", "magenta", "orange"])
            .into_iter()
            .next()
            .unwrap_or(palette::named("green").unwrap());

        let mut canvas = Canvas::new(p.width, p.height, p.bg);
        for r in 0..g {
            for c in 0..g {
                let color = if rows[r][c] == b'#' {
                    Some(WALL)
                } else if Cell::new(r, c) == goal {
                    Some(goal_color.rgb)
                } else {
                    None
                };
                if let Some(col) = color {
                    canvas.fill_rect(
                        (origin.0 + c as u32 * cell_px) as i64,
                        (origin.1 + r as u32 * cell_px) as i64,
                        cell_px as i64,
                        cell_px as i64,
                        col,
                    );
                }
            }
        }
        Ok(Maze {
            grid,
            start,
            goal,
            goal_color,
            path,
            base: canvas.into_frame(),
        })
    }

    fn render(&self, at: Cell) -> Frame {
        let mut c = Canvas::from_frame(&self.base);
        let (cx, cy) = self.grid.center(at);
        let half = (self.grid.cell_px as f64 * 0.3).round() as i64;
        c.fill_rect(
            cx.floor() as i64 - half,
            cy.floor() as i64 - half,
            2 * half,
            2 * half,
            palette::rgb("red"),
        );
        c.into_frame()
    }

    fn render_path(&self, path: &[Cell]) -> Vec<Frame> {
        (0..hold_len(path.len() - 1))
            .map(|i| self.render(path[i.min(path.len() - 1)]))
            .collect()
    }

    /// Route through one wall cell: prefer a shortcut between two path
    /// cells, otherwise step into a wall and back.
    fn wall_cross_path(&self, rng: &mut Rng) -> Vec<Cell> {
        let (rows, cols) = (self.grid.rows(), self.grid.cols());
        let wall_neighbors = |c: Cell| -> Vec<Cell> {
            let mut v = Vec::new();
            if c.row > 0 {
                v.push(Cell::new(c.row - 1, c.col));
            }
            if c.col > 0 {
                v.push(Cell::new(c.row, c.col - 1));
            }
            if c.row + 1 < rows {
                v.push(Cell::new(c.row + 1, c.col));
            }
            if c.col + 1 < cols {
                v.push(Cell::new(c.row, c.col + 1));
            }
            v.retain(|&n| !self.grid.is_free(n));
            v
        };
        let mut shortcuts = Vec::new();
        for (i, &a) in self.path.iter().enumerate() {
            for w in wall_neighbors(a) {
                for (j, &b) in self.path.iter().enumerate().skip(i + 3) {
                    if w.manhattan(b) == 1 {
                        shortcuts.push((i, w, j));
                    }
                }
            }
        }
        if let Some(&(i, w, j)) = shortcuts.choose(rng) {
            let mut p = self.path[..=i].to_vec();
            p.push(w);
            p.extend_from_slice(&self.path[j..]);
            return p;
        }
        let mut dips: Vec<(usize, Cell)> = Vec::new();
        for (i, &a) in self.path.iter().enumerate() {
            for w in wall_neighbors(a) {
                dips.push((i, w));
            }
        }
        dips.shuffle(rng);
        let (i, w) = dips[0];
        let mut p = self.path[..=i].to_vec();
        p.push(w);
        p.extend_from_slice(&self.path[i..]);
        p
    }
}

pub(crate) fn bfs_distances(grid: &MazeGrid, from: Cell) -> Vec<Vec<usize>> {
    let mut dist = vec![vec![usize::MAX; grid.cols()]; grid.rows()];
    let mut q = std::collections::VecDeque::from([from]);
    dist[from.row][from.col] = 0;
    while let Some(c) = q.pop_front() {
        for n in grid.free_neighbors(c) {
            if dist[n.row][n.col] == usize::MAX {
                dist[n.row][n.col] = dist[c.row][c.col] + 1;
                q.push_back(n);
            }
        }
    }
    dist
}

impl Instance for Maze {
    fn truth(&self) -> GroundTruth {
        GroundTruth::MazeTruth {
            maze: self.grid.clone(),
            start: self.start,
            goal: self.goal,
            agent_label: AGENT_LABEL.into(),
            goal_color: self.goal_color.name.into(),
        }
    }

    fn prompt(&self) -> String {
        let g = self.goal_color.name;
        prompt::compose(
            Dimension::Structural,
            &format!("A top-down maze with dark walls; a red block sits in its start cell and the goal cell is painted {g}."),
            &format!("The red block slides one cell at a time along the open corridors toward the {g} cell, never entering or crossing a wall."),
            &format!("It comes to rest inside the {g} goal cell."),
        )
    }

    fn frame_count(&self) -> usize {
        hold_len(self.path.len() - 1)
    }

    fn frame(&self, i: usize) -> Frame {
        self.render(self.path[i.min(self.path.len() - 1)])
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        match mode {
            CorruptionMode::WallCross => Some(self.render_path(&self.wall_cross_path(rng))),
            _ => None,
        }
    }
}
