//! Process-and-goal verifiers: sample frames uniformly, ground a labeled
//! object in each, and check the resulting trajectory or presence sequence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{uniform_indices, Cell, ColoredLabel, Evidence, MazeGrid, Metric, PointClass, Verdict, VideoClip};
use crate::modelio::{ClientError, Grounder};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConfig {
    pub n_samples: usize,
    /// Longest tolerated run of frames without a detection.
    pub max_missed: usize,
    /// Maze trajectories sample every frame when the clip is longer than
    /// `n_samples`; a one-cell-per-frame agent would otherwise appear to jump.
    pub dense_maze: bool,
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            n_samples: 16,
            max_missed: 2,
            dense_maze: true,
        }
    }
}

impl TrackConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        if self.n_samples < 2 {
            return Err(TrackError::TooFewSamples(self.n_samples));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("n_samples must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("grounder failed on frame {frame}: {source}")]
    Grounder { frame: usize, source: ClientError },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
    pub detected: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrackPoint>,
}

impl Trajectory {
    pub fn detected(&self) -> usize {
        self.points.iter().filter(|p| p.detected).count()
    }
}

/// Ground `label` in uniformly sampled frames; the most confident detection
/// gives the position. Missed frames repeat the last known position with
/// `detected = false`.
pub fn extract_trajectory(
    clip: &VideoClip,
    grounder: &dyn Grounder,
    label: &str,
    n_samples: usize,
) -> Result<Trajectory, TrackError> {
    if n_samples < 2 {
        return Err(TrackError::TooFewSamples(n_samples));
    }
    let mut points = Vec::with_capacity(n_samples);
    let mut last = (0.0, 0.0);
    for i in clip.uniform_indices(n_samples) {
        let dets = grounder
            .ground(&clip.frames()[i], label)
            .map_err(|source| TrackError::Grounder { frame: i, source })?;
        let top = dets.iter().reduce(|a, b| if b.confidence > a.confidence { b } else { a });
        let detected = top.is_some();
        if let Some(d) = top {
            last = d.bbox.center();
        }
        points.push(TrackPoint {
            frame: i,
            x: last.0,
            y: last.1,
            detected,
        });
    }
    Ok(Trajectory { points })
}

/// Free-cell BFS distance, `None` when unreachable.
fn maze_distance(maze: &MazeGrid, a: Cell, b: Cell) -> Option<usize> {
    if a == b {
        return maze.is_free(a).then_some(0);
    }
    maze.shortest_path(a, b).map(|p| p.len() - 1)
}

/// Rules, checked in order on every point:
/// (a) detected points lie in free cells;
/// (b) the maze distance between consecutive detected points is at most
///     their distance in samples, so with no misses they share a cell or are
///     4-adjacent, and a wall is never jumped;
/// (c) the first detected point is in `start`, the last in `goal`;
/// (d) no more than `max_missed` consecutive samples lack a detection.
pub fn verify_maze_trajectory(traj: &Trajectory, maze: &MazeGrid, start: Cell, goal: Cell, max_missed: usize) -> Verdict {
    if traj.detected() < 2 {
        return Verdict::metric_error(
            Metric::MazeTrajectory,
            format!("only {} of {} sampled points detected", traj.detected(), traj.points.len()),
        );
    }
    let mut points: Vec<PointClass> = traj
        .points
        .iter()
        .map(|p| {
            let cell = if p.detected { maze.cell_at(p.x, p.y) } else { None };
            PointClass {
                frame: p.frame,
                cell,
                detected: p.detected,
                free: cell.is_some_and(|c| maze.is_free(c)),
                violation: None,
            }
        })
        .collect();
    let mut failed: Option<String> = None;
    let mut flag = |points: &mut Vec<PointClass>, i: usize, msg: String| {
        if points[i].violation.is_none() {
            points[i].violation = Some(msg.clone());
        }
        if failed.is_none() {
            failed = Some(format!("frame {}: {msg}", points[i].frame));
        }
    };

    let detected: Vec<usize> = (0..points.len()).filter(|&i| points[i].detected).collect();
    for &i in &detected {
        if !points[i].free {
            let msg = match points[i].cell {
                Some(c) => format!("agent inside wall cell ({}, {})", c.row, c.col),
                None => "agent outside the maze".to_string(),
            };
            flag(&mut points, i, msg);
        }
    }
    for w in detected.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (Some(a), Some(b)) = (points[i].cell, points[j].cell) else { continue };
        if !points[i].free || !points[j].free {
            continue;
        }
        let allowed = j - i;
        match maze_distance(maze, a, b) {
            Some(d) if d <= allowed => {}
            Some(d) => flag(&mut points, j, format!("moved {d} cells in {allowed} step(s)")),
            None => flag(&mut points, j, "cell unreachable from the previous one".to_string()),
        }
    }
    let (first, last) = (detected[0], detected[detected.len() - 1]);
    if points[first].cell != Some(start) {
        flag(&mut points, first, "first position is not the start cell".to_string());
    }
    if points[last].cell != Some(goal) {
        flag(&mut points, last, "final position is not the goal cell".to_string());
    }
    let mut run = 0;
    for i in 0..points.len() {
        if points[i].detected {
            run = 0;
        } else {
            run += 1;
            if run == max_missed + 1 {
                flag(&mut points, i, format!("more than {max_missed} consecutive missed detections"));
            }
        }
    }
    Verdict::new(
        Metric::MazeTrajectory,
        failed.is_none(),
        Evidence::Maze { points, failed },
    )
}

/// Sample count for a maze clip under `cfg`.
pub fn maze_samples(clip: &VideoClip, cfg: &TrackConfig) -> usize {
    if cfg.dense_maze {
        cfg.n_samples.max(clip.len())
    } else {
        cfg.n_samples
    }
}

pub fn verify_maze(
    clip: &VideoClip,
    maze: &MazeGrid,
    start: Cell,
    goal: Cell,
    agent_label: &str,
    grounder: &dyn Grounder,
    cfg: &TrackConfig,
) -> Verdict {
    match extract_trajectory(clip, grounder, agent_label, maze_samples(clip, cfg)) {
        Ok(t) => verify_maze_trajectory(&t, maze, start, goal, cfg.max_missed),
        Err(e) => Verdict::metric_error(Metric::MazeTrajectory, e.to_string()),
    }
}

/// Presence of every truth label in uniformly sampled frames. Passes iff
/// presence never grows back, the objects vanish in truth order (objects
/// vanishing between the same two samples form an unordered group), and the
/// last sample is empty.
pub fn verify_elimination(clip: &VideoClip, order: &[ColoredLabel], grounder: &dyn Grounder, n_samples: usize) -> Verdict {
    if n_samples < 2 {
        return Verdict::metric_error(Metric::Elimination, TrackError::TooFewSamples(n_samples).to_string());
    }
    let sampled = uniform_indices(clip.len(), n_samples);
    let mut presence: Vec<Vec<String>> = Vec::with_capacity(sampled.len());
    for &i in &sampled {
        let mut here = Vec::new();
        for o in order {
            match grounder.ground(&clip.frames()[i], &o.label) {
                Ok(d) if !d.is_empty() => here.push(o.label.clone()),
                Ok(_) => {}
                Err(e) => {
                    return Verdict::metric_error(
                        Metric::Elimination,
                        format!("grounding `{}` on frame {i} failed: {e}", o.label),
                    )
                }
            }
        }
        presence.push(here);
    }

    let mut note = None;
    let all: BTreeSet<&str> = order.iter().map(|o| o.label.as_str()).collect();
    let mut prev = all.clone();
    let mut groups: Vec<Vec<String>> = Vec::new();
    for (k, p) in presence.iter().enumerate() {
        let now: BTreeSet<&str> = p.iter().map(String::as_str).collect();
        if let Some(back) = now.difference(&prev).next() {
            note.get_or_insert_with(|| format!("`{back}` reappears at frame {}", sampled[k]));
        }
        let gone: Vec<String> = order
            .iter()
            .filter(|o| prev.contains(o.label.as_str()) && !now.contains(o.label.as_str()))
            .map(|o| o.label.clone())
            .collect();
        if !gone.is_empty() {
            groups.push(gone);
        }
        prev = now;
    }

    let mut pos = 0;
    let mut order_ok = true;
    for g in &groups {
        let want: BTreeSet<&str> = order[pos.min(order.len())..(pos + g.len()).min(order.len())]
            .iter()
            .map(|o| o.label.as_str())
            .collect();
        let got: BTreeSet<&str> = g.iter().map(String::as_str).collect();
        if pos + g.len() > order.len() || want != got {
            order_ok = false;
            break;
        }
        pos += g.len();
    }
    if !order_ok {
        note.get_or_insert_with(|| "objects disappeared out of order".to_string());
    }
    let final_empty = presence.last().is_some_and(|p| p.is_empty());
    if !final_empty {
        note.get_or_insert_with(|| "objects remain in the final frame".to_string());
    }
    Verdict::new(
        Metric::Elimination,
        note.is_none(),
        Evidence::Elimination {
            sampled,
            presence,
            observed_order: groups,
            note,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corridor() -> MazeGrid {
        MazeGrid {
            grid: vec!["#####".into(), "#...#".into(), "#.#.#".into(), "#####".into()],
            origin: (0, 0),
            cell_px: 10,
        }
    }

    fn at(frame: usize, c: Cell) -> TrackPoint {
        TrackPoint {
            frame,
            x: c.col as f64 * 10.0 + 5.0,
            y: c.row as f64 * 10.0 + 5.0,
            detected: true,
        }
    }

    #[test]
    fn corridor_walk_passes_and_wall_jump_fails() {
        let m = corridor();
        let path = [Cell::new(2, 1), Cell::new(1, 1), Cell::new(1, 2), Cell::new(1, 3), Cell::new(2, 3)];
        let t = Trajectory {
            points: path.iter().enumerate().map(|(i, &c)| at(i, c)).collect(),
        };
        assert!(verify_maze_trajectory(&t, &m, path[0], path[4], 2).pass);
        let jump = Trajectory {
            points: vec![at(0, Cell::new(2, 1)), at(1, Cell::new(2, 2)), at(2, Cell::new(2, 3))],
        };
        let v = verify_maze_trajectory(&jump, &m, Cell::new(2, 1), Cell::new(2, 3), 2);
        assert!(!v.pass);
        let Evidence::Maze { points, .. } = v.evidence else { panic!() };
        assert!(points[1].violation.is_some());
    }
}
