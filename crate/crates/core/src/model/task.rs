use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four reasoning dimensions of the benchmark taxonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Structural,
    SpatialPattern,
    SymbolicLogical,
    PlanningExecution,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Structural,
        Dimension::SpatialPattern,
        Dimension::SymbolicLogical,
        Dimension::PlanningExecution,
    ];

    /// Column-group title used by report tables.
    pub fn title(self) -> &'static str {
        match self {
            Dimension::Structural => "Structural & Search",
            Dimension::SpatialPattern => "Spatial & Visual Pattern",
            Dimension::SymbolicLogical => "Symbolic & Logical",
            Dimension::PlanningExecution => "Planning & Execution",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Dimension::Structural => "structural",
            Dimension::SpatialPattern => "spatial_pattern",
            Dimension::SymbolicLogical => "symbolic_logical",
            Dimension::PlanningExecution => "planning_execution",
        }
    }

    pub fn tasks(self) -> [Task; 6] {
        use Task::*;
        match self {
            Dimension::Structural => [
                GraphTraversal,
                MazeSolving,
                SortingNumbers,
                TemporalOrdering,
                RuleExtrapolation,
                GameMoveReasoning,
            ],
            Dimension::SpatialPattern => [
                ShapeFitting,
                ConnectingColors,
                PatternRecognition,
                OddOneOut,
                CountingObjects,
                VisualAnalogy,
            ],
            Dimension::SymbolicLogical => [
                SudokuCompletion,
                ArithmeticOperations,
                SymbolicReasoning,
                VisualDeduction,
                TransitiveReasoning,
                GameRuleReasoning,
            ],
            Dimension::PlanningExecution => [
                ToolUse,
                RobotNavigation,
                GoalDirectedPlanning,
                MultiStepManipulation,
                VisualInstructionFollowing,
                GameStrategyPlanning,
            ],
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Dimension::ALL
            .into_iter()
            .find(|d| {
                d.slug() == norm
                    || d.slug().split('_').next() == Some(norm.as_str())
                    || d.title().eq_ignore_ascii_case(s.trim())
            })
            .ok_or_else(|| format!("unknown dimension `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    /// Picks one of three values by tier.
    pub fn pick<T: Copy>(self, easy: T, medium: T, hard: T) -> T {
        match self {
            Difficulty::Easy => easy,
            Difficulty::Medium => medium,
            Difficulty::Hard => hard,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Difficulty::Easy => "Easy",
            Difficulty::Medium => "Med.",
            Difficulty::Hard => "Hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" | "e" => Ok(Difficulty::Easy),
            "medium" | "med" | "med." | "m" => Ok(Difficulty::Medium),
            "hard" | "h" => Ok(Difficulty::Hard),
            _ => Err(format!("unknown difficulty `{s}`")),
        }
    }
}

/// The 24 task scenarios, six per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "graph traversal")]
    GraphTraversal,
    #[serde(rename = "maze solving")]
    MazeSolving,
    #[serde(rename = "sorting numbers")]
    SortingNumbers,
    #[serde(rename = "temporal ordering")]
    TemporalOrdering,
    #[serde(rename = "rule extrapolation")]
    RuleExtrapolation,
    #[serde(rename = "game move reasoning")]
    GameMoveReasoning,
    #[serde(rename = "shape fitting")]
    ShapeFitting,
    #[serde(rename = "connecting colors")]
    ConnectingColors,
    #[serde(rename = "pattern recognition")]
    PatternRecognition,
    #[serde(rename = "odd-one-out")]
    OddOneOut,
    #[serde(rename = "counting objects")]
    CountingObjects,
    #[serde(rename = "visual analogy")]
    VisualAnalogy,
    #[serde(rename = "simple Sudoku completion")]
    SudokuCompletion,
    #[serde(rename = "arithmetic operations")]
    ArithmeticOperations,
    #[serde(rename = "symbolic reasoning")]
    SymbolicReasoning,
    #[serde(rename = "visual deduction")]
    VisualDeduction,
    #[serde(rename = "transitive reasoning")]
    TransitiveReasoning,
    #[serde(rename = "game rule reasoning")]
    GameRuleReasoning,
    #[serde(rename = "tool use")]
    ToolUse,
    #[serde(rename = "robot navigation")]
    RobotNavigation,
    #[serde(rename = "goal-directed planning")]
    GoalDirectedPlanning,
    #[serde(rename = "multi-step manipulation")]
    MultiStepManipulation,
    #[serde(rename = "visual instruction following")]
    VisualInstructionFollowing,
    #[serde(rename = "game strategy planning")]
    GameStrategyPlanning,
}

impl Task {
    /// All 24 scenarios in taxonomy order (dimension by dimension).
    pub fn all() -> Vec<Task> {
        Dimension::ALL.iter().flat_map(|d| d.tasks()).collect()
    }

    /// The ten scenarios with built-in generators.
    pub const SUPPORTED: [Task; 10] = [
        Task::MazeSolving,
        Task::SudokuCompletion,
        Task::SortingNumbers,
        Task::ArithmeticOperations,
        Task::CountingObjects,
        Task::VisualDeduction,
        Task::RuleExtrapolation,
        Task::GameMoveReasoning,
        Task::TemporalOrdering,
        Task::GraphTraversal,
    ];

    pub fn dimension(self) -> Dimension {
        Dimension::ALL
            .into_iter()
            .find(|d| d.tasks().contains(&self))
            .expect("every task belongs to a dimension")
    }

    pub fn is_supported(self) -> bool {
        Task::SUPPORTED.contains(&self)
    }

    /// Scenario name as it appears in manifests.
    pub fn name(self) -> &'static str {
        use Task::*;
        match self {
            GraphTraversal => "graph traversal",
            MazeSolving => "maze solving",
            SortingNumbers => "sorting numbers",
            TemporalOrdering => "temporal ordering",
            RuleExtrapolation => "rule extrapolation",
            GameMoveReasoning => "game move reasoning",
            ShapeFitting => "shape fitting",
            ConnectingColors => "connecting colors",
            PatternRecognition => "pattern recognition",
            OddOneOut => "odd-one-out",
            CountingObjects => "counting objects",
            VisualAnalogy => "visual analogy",
            SudokuCompletion => "simple Sudoku completion",
            ArithmeticOperations => "arithmetic operations",
            SymbolicReasoning => "symbolic reasoning",
            VisualDeduction => "visual deduction",
            TransitiveReasoning => "transitive reasoning",
            GameRuleReasoning => "game rule reasoning",
            ToolUse => "tool use",
            RobotNavigation => "robot navigation",
            GoalDirectedPlanning => "goal-directed planning",
            MultiStepManipulation => "multi-step manipulation",
            VisualInstructionFollowing => "visual instruction following",
            GameStrategyPlanning => "game strategy planning",
        }
    }

    /// Short identifier used on the command line and in sample ids.
    pub fn slug(self) -> String {
        use Task::*;
        match self {
            MazeSolving => "maze".into(),
            SudokuCompletion => "sudoku".into(),
            SortingNumbers => "sorting".into(),
            ArithmeticOperations => "arithmetic".into(),
            CountingObjects => "counting".into(),
            VisualDeduction => "multichoice".into(),
            RuleExtrapolation => "sequence".into(),
            GameMoveReasoning => "match3".into(),
            TemporalOrdering => "elimination".into(),
            GraphTraversal => "graph".into(),
            other => other.name().replace(' ', "-").to_ascii_lowercase(),
        }
    }

    /// One-sentence statement of what a correct video must show; fed to the
    /// judge as the task definition during prompt optimisation.
    pub fn definition(self) -> &'static str {
        use Task::*;
        match self {
            MazeSolving => "Maze solving: the colored block must travel from its start cell to the goal cell through free corridor cells only, never entering or crossing a wall, and stop on the goal.",
            SudokuCompletion => "Sudoku completion: every blank cell must be filled so each row, column and box contains each digit exactly once, without changing the given digits.",
            SortingNumbers => "Sorting: the blue bars must be rearranged so their heights increase strictly from left to right, keeping every bar.",
            ArithmeticOperations => "Arithmetic: the correct value of the expression must be written to the right of the equals sign.",
            CountingObjects => "Counting: objects of the indicated color must be added until their number equals the number shown, leaving the other objects untouched.",
            VisualDeduction => "Visual deduction: the option box whose content continues the pattern must be marked with a red frame, and only that box.",
            RuleExtrapolation => "Rule extrapolation: the blank slots of the digit sequence must be filled so the sequence continues its rule.",
            GameMoveReasoning => "Match-3 move: two adjacent tiles must be swapped to form a line of three identical tiles, which then clears and lets the tiles above fall down.",
            TemporalOrdering => "Sequential elimination: the balls must disappear one at a time in the order given by the numbers drawn on them until none is left.",
            GraphTraversal => "Graph traversal: starting from the green node, every node connected to it through edges must turn green one at a time, while unconnected nodes stay gray.",
            _ => "Reach the target state shown in the reference while respecting the rules implied by the scene.",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Task::all()
            .into_iter()
            .find(|t| t.slug() == s.to_ascii_lowercase() || t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy_is_complete() {
        let all = Task::all();
        assert_eq!(all.len(), 24);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 24);
        for d in Dimension::ALL {
            for t in d.tasks() {
                assert_eq!(t.dimension(), d);
            }
        }
    }

    #[test]
    fn names_parse_back() {
        for t in Task::all() {
            assert_eq!(t.name().parse::<Task>().unwrap(), t);
            assert_eq!(t.slug().parse::<Task>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.name()));
        }
        assert_eq!("structural".parse::<Dimension>().unwrap(), Dimension::Structural);
        assert_eq!("symbolic".parse::<Dimension>().unwrap(), Dimension::SymbolicLogical);
        assert_eq!("Med.".parse::<Difficulty>().unwrap(), Difficulty::Medium);
    }
}
