use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{BBox, Frame, Task};

/// Exact rational value, serialized as `{"num": n, "den": d}` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational(pub Ratio<i64>);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn integer(v: i64) -> Self {
        Rational(Ratio::from_integer(v))
    }

    pub fn num(&self) -> i64 {
        *self.0.numer()
    }

    pub fn den(&self) -> i64 {
        *self.0.denom()
    }
}

impl From<Ratio<i64>> for Rational {
    fn from(r: Ratio<i64>) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den() == 1 {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: i64,
    den: i64,
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            num: self.num(),
            den: self.den(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RationalRepr::deserialize(d)?;
        if r.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(r.num, r.den))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledBox {
    pub label: String,
    pub bbox: BBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredLabel {
    pub label: String,
    pub color: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaItem {
    pub question: String,
    pub answer: bool,
}

/// How an [`GroundTruth::ObjectSet`] is checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundMode {
    /// Detections per label must equal the truth's count per label.
    #[default]
    Count,
    /// The object the model marked (grounded with `selected_label`) must sit
    /// inside `objects[odd_index]`.
    OddOneOut {
        selected_label: String,
        odd_index: usize,
    },
}

/// Block maze: `grid` rows use `#` for wall cells and `.` for free cells.
/// `origin` and `cell_px` place the grid in the frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MazeGrid {
    pub grid: Vec<String>,
    pub origin: (u32, u32),
    pub cell_px: u32,
}

impl MazeGrid {
    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn cols(&self) -> usize {
        self.grid.first().map_or(0, |r| r.len())
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.grid
            .get(c.row)
            .and_then(|r| r.as_bytes().get(c.col))
            .is_some_and(|&b| b == b'.')
    }

    /// Cell under pixel `(x, y)`, or `None` outside the grid.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<Cell> {
        let fx = (x - self.origin.0 as f64) / self.cell_px as f64;
        let fy = (y - self.origin.1 as f64) / self.cell_px as f64;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (col, row) = (fx.floor() as usize, fy.floor() as usize);
        (row < self.rows() && col < self.cols()).then_some(Cell::new(row, col))
    }

    /// Pixel center of a cell.
    pub fn center(&self, c: Cell) -> (f64, f64) {
        (
            self.origin.0 as f64 + (c.col as f64 + 0.5) * self.cell_px as f64,
            self.origin.1 as f64 + (c.row as f64 + 0.5) * self.cell_px as f64,
        )
    }

    pub fn free_neighbors(&self, c: Cell) -> Vec<Cell> {
        let mut out = Vec::with_capacity(4);
        if c.row > 0 {
            out.push(Cell::new(c.row - 1, c.col));
        }
        if c.col > 0 {
            out.push(Cell::new(c.row, c.col - 1));
        }
        out.push(Cell::new(c.row + 1, c.col));
        out.push(Cell::new(c.row, c.col + 1));
        out.retain(|&n| self.is_free(n));
        out
    }

    /// Breadth-first shortest path over free cells, inclusive of both ends.
    pub fn shortest_path(&self, from: Cell, to: Cell) -> Option<Vec<Cell>> {
        use std::collections::{HashMap, VecDeque};
        if !self.is_free(from) || !self.is_free(to) {
            return None;
        }
        let mut prev: HashMap<Cell, Cell> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        prev.insert(from, from);
        while let Some(c) = queue.pop_front() {
            if c == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for n in self.free_neighbors(c) {
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(n) {
                    e.insert(c);
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Per-task answer payloads, serialized with a `kind` discriminator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    /// `puzzle` uses 0 for blanks; `solution` is the completed grid.
    SudokuGrid {
        box_rows: usize,
        box_cols: usize,
        puzzle: Vec<Vec<u8>>,
        solution: Vec<Vec<u8>>,
    },
    ExprResult {
        expression: String,
        value: Rational,
    },
    ChoiceLetter {
        letter: char,
    },
    DigitSequence {
        digits: Vec<u8>,
    },
    /// `heights` in initial left-to-right order; `order` is the permutation of
    /// initial indices that sorts them ascending.
    BarOrder {
        heights: Vec<u32>,
        order: Vec<usize>,
        count: usize,
    },
    TargetRegion {
        bbox: BBox,
        reference: Vec<f64>,
    },
    ObjectSet {
        objects: Vec<LabeledBox>,
        #[serde(default)]
        mode: GroundMode,
    },
    MazeTruth {
        maze: MazeGrid,
        start: Cell,
        goal: Cell,
        agent_label: String,
        goal_color: String,
    },
    EliminationOrder {
        order: Vec<ColoredLabel>,
    },
    #[serde(rename = "qa_set")]
    QaSet {
        questions: Vec<QaItem>,
    },
    PixelTarget {
        reference: Frame,
    },
}

impl GroundTruth {
    pub fn kind(&self) -> &'static str {
        match self {
            GroundTruth::SudokuGrid { .. } => "sudoku_grid",
            GroundTruth::ExprResult { .. } => "expr_result",
            GroundTruth::ChoiceLetter { .. } => "choice_letter",
            GroundTruth::DigitSequence { .. } => "digit_sequence",
            GroundTruth::BarOrder { .. } => "bar_order",
            GroundTruth::TargetRegion { .. } => "target_region",
            GroundTruth::ObjectSet { .. } => "object_set",
            GroundTruth::MazeTruth { .. } => "maze_truth",
            GroundTruth::EliminationOrder { .. } => "elimination_order",
            GroundTruth::QaSet { .. } => "qa_set",
            GroundTruth::PixelTarget { .. } => "pixel_target",
        }
    }

    /// Truth variants a built-in generator emits for `task`. Externally
    /// supplied samples of other scenarios may use any verifiable variant.
    pub fn expected_kind(task: Task) -> Option<&'static str> {
        Some(match task {
            Task::MazeSolving => "maze_truth",
            Task::SudokuCompletion => "sudoku_grid",
            Task::SortingNumbers => "bar_order",
            Task::ArithmeticOperations => "expr_result",
            Task::CountingObjects | Task::GraphTraversal => "object_set",
            Task::VisualDeduction => "choice_letter",
            Task::RuleExtrapolation => "digit_sequence",
            Task::GameMoveReasoning => "pixel_target",
            Task::TemporalOrdering => "elimination_order",
            _ => return None,
        })
    }

    /// Internal consistency checks per variant.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            GroundTruth::SudokuGrid {
                box_rows,
                box_cols,
                puzzle,
                solution,
            } => {
                let n = box_rows * box_cols;
                if ![4, 6, 9].contains(&n) {
                    return Err(format!("sudoku size {n} not in {{4,6,9}}"));
                }
                let square = |g: &Vec<Vec<u8>>| g.len() == n && g.iter().all(|r| r.len() == n);
                if !square(puzzle) || !square(solution) {
                    return Err("sudoku grids must be n x n".into());
                }
                for r in 0..n {
                    for c in 0..n {
                        let s = solution[r][c];
                        if s == 0 || s as usize > n {
                            return Err(format!("solution cell ({r},{c}) = {s} out of range"));
                        }
                        if puzzle[r][c] != 0 && puzzle[r][c] != s {
                            return Err(format!("puzzle cell ({r},{c}) contradicts solution"));
                        }
                    }
                }
                Ok(())
            }
            GroundTruth::ExprResult { expression, .. } => {
                if expression.trim().is_empty() {
                    Err("empty expression".into())
                } else {
                    Ok(())
                }
            }
            GroundTruth::ChoiceLetter { letter } => {
                if ('A'..='D').contains(letter) {
                    Ok(())
                } else {
                    Err(format!("choice letter `{letter}` outside A-D"))
                }
            }
            GroundTruth::DigitSequence { digits } => {
                if digits.is_empty() || digits.iter().any(|&d| d > 9) {
                    Err("digit sequence must be non-empty single digits".into())
                } else {
                    Ok(())
                }
            }
            GroundTruth::BarOrder {
                heights,
                order,
                count,
            } => {
                if heights.len() != *count || order.len() != *count {
                    return Err("bar count disagrees with heights/order".into());
                }
                let mut seen = vec![false; *count];
                for &i in order {
                    if i >= *count || std::mem::replace(&mut seen[i], true) {
                        return Err("order is not a permutation".into());
                    }
                }
                if order.windows(2).any(|w| heights[w[0]] > heights[w[1]]) {
                    return Err("order does not sort heights ascending".into());
                }
                Ok(())
            }
            GroundTruth::TargetRegion { reference, .. } => {
                if reference.is_empty() || reference.iter().any(|v| !v.is_finite()) {
                    Err("reference embedding must be non-empty and finite".into())
                } else {
                    Ok(())
                }
            }
            GroundTruth::ObjectSet { objects, mode } => match mode {
                GroundMode::Count => Ok(()),
                GroundMode::OddOneOut { odd_index, .. } => {
                    if *odd_index < objects.len() {
                        Ok(())
                    } else {
                        Err("odd_index out of range".into())
                    }
                }
            },
            GroundTruth::MazeTruth {
                maze, start, goal, ..
            } => {
                if maze.rows() == 0 || maze.grid.iter().any(|r| r.len() != maze.cols()) {
                    return Err("maze grid must be rectangular".into());
                }
                if maze.grid.iter().any(|r| r.bytes().any(|b| b != b'#' && b != b'.')) {
                    return Err("maze grid may only contain `#` and `.`".into());
                }
                if start == goal {
                    return Err("maze start equals goal".into());
                }
                if !maze.is_free(*start) || !maze.is_free(*goal) {
                    return Err("maze start and goal must be free cells".into());
                }
                if maze.cell_px == 0 {
                    return Err("maze cell_px must be positive".into());
                }
                Ok(())
            }
            GroundTruth::EliminationOrder { order } => {
                let mut labels: Vec<&str> = order.iter().map(|o| o.label.as_str()).collect();
                labels.sort();
                labels.dedup();
                if order.is_empty() || labels.len() != order.len() {
                    Err("elimination order must list distinct labels".into())
                } else {
                    Ok(())
                }
            }
            GroundTruth::QaSet { questions } => {
                if (2..=3).contains(&questions.len()) {
                    Ok(())
                } else {
                    Err(format!("QA set must have 2 or 3 questions, got {}", questions.len()))
                }
            }
            GroundTruth::PixelTarget { .. } => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_serialization() {
        let t = GroundTruth::ExprResult {
            expression: "3+4".into(),
            value: Rational::new(14, 2),
        };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"kind":"expr_result","expression":"3+4","value":{"num":7,"den":1}}"#);
        let back: GroundTruth = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.kind(), "expr_result");
    }

    #[test]
    fn validation_catches_inconsistency() {
        let maze = MazeGrid {
            grid: vec!["###".into(), "#..".into(), "###".into()],
            origin: (0, 0),
            cell_px: 10,
        };
        let mk = |start, goal| GroundTruth::MazeTruth {
            maze: maze.clone(),
            start,
            goal,
            agent_label: "blue block".into(),
            goal_color: "red".into(),
        };
        assert!(mk(Cell::new(1, 1), Cell::new(1, 2)).validate().is_ok());
        assert!(mk(Cell::new(1, 1), Cell::new(1, 1)).validate().is_err());
        assert!(mk(Cell::new(0, 0), Cell::new(1, 2)).validate().is_err());

        let qa = |n| GroundTruth::QaSet {
            questions: (0..n)
                .map(|i| QaItem {
                    question: format!("q{i}?"),
                    answer: true,
                })
                .collect(),
        };
        assert!(qa(1).validate().is_err());
        assert!(qa(2).validate().is_ok());
        assert!(qa(3).validate().is_ok());
        assert!(qa(4).validate().is_err());
    }

    #[test]
    fn maze_geometry() {
        let maze = MazeGrid {
            grid: vec!["#####".into(), "#...#".into(), "#.#.#".into(), "#####".into()],
            origin: (10, 20),
            cell_px: 10,
        };
        assert_eq!(maze.cell_at(25.0, 35.0), Some(Cell::new(1, 1)));
        assert_eq!(maze.cell_at(5.0, 35.0), None);
        let p = maze.shortest_path(Cell::new(2, 1), Cell::new(2, 3)).unwrap();
        assert_eq!(p.len(), 5);
    }
}
