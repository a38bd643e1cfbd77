use std::collections::VecDeque;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::imgproc::palette::{self, INK};
use crate::imgproc::Canvas;
use crate::model::{BBox, Dimension, Frame, GroundMode, GroundTruth, LabeledBox};

use super::{hold_len, prompt, CorruptionMode, GenError, Instance, Params, Rng};

pub(crate) const VISITED: &str = "green node";
pub(crate) const UNVISITED: &str = "gray node";
const GRAY: [u8; 3] = [128, 128, 128];

pub(crate) struct Graph {
    nodes: Vec<(i64, i64)>,
    edges: Vec<(usize, usize)>,
    /// Reachable nodes in breadth-first order from the start node.
    visit: Vec<usize>,
    radius: i64,
    width: u32,
    height: u32,
    bg: [u8; 3],
}

fn bfs(n: usize, edges: &[(usize, usize)], start: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = q.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    order
}

impl Graph {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Graph, GenError> {
        let n = p.difficulty.pick(4, 6, 8);
        let isolated = p.difficulty.pick(1, 1, 2);
        let (cx, cy) = (p.width as f64 / 2.0, p.height as f64 / 2.0);
        let ring = p.width.min(p.height) as f64 * 0.38;
        let step = std::f64::consts::TAU / n as f64;
        let phase = rng.random_range(0.0..step);
        let nodes: Vec<(i64, i64)> = (0..n)
            .map(|i| {
                let a = phase + i as f64 * step + rng.random_range(-0.15..=0.15) * step;
                ((cx + ring * a.cos()).round() as i64, (cy + ring * a.sin()).round() as i64)
            })
            .collect();

        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(rng);
        let (reach, lone) = ids.split_at(n - isolated);
        let mut edges = Vec::new();
        // Random spanning tree over the reachable part, plus a few chords.
        for i in 1..reach.len() {
            let j = rng.random_range(0..i);
            edges.push((reach[j].min(reach[i]), reach[j].max(reach[i])));
        }
        for _ in 0..reach.len() / 3 {
            let a = *reach.choose(rng).unwrap();
            let b = *reach.choose(rng).unwrap();
            let e = (a.min(b), a.max(b));
            if a != b && !edges.contains(&e) {
                edges.push(e);
            }
        }
        if lone.len() == 2 {
            edges.push((lone[0].min(lone[1]), lone[0].max(lone[1])));
        }
        edges.sort_unstable();
        let start = reach[0];
        let visit = bfs(n, &edges, start);
        if visit.len() != reach.len() {
            return Err(GenError::Failed("graph reachability mismatch".into()));
        }
        Ok(Graph {
            nodes,
            edges,
            visit,
            radius: (p.width.min(p.height) as f64 * 0.045).round() as i64,
            width: p.width,
            height: p.height,
            bg: p.bg,
        })
    }

    fn render(&self, green: &[usize]) -> Frame {
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let t = (self.width.min(self.height) as f64 / 180.0).max(2.0);
        for &(a, b) in &self.edges {
            let (pa, pb) = (self.nodes[a], self.nodes[b]);
            c.line((pa.0 as f64, pa.1 as f64), (pb.0 as f64, pb.1 as f64), t, INK);
        }
        for (i, &(x, y)) in self.nodes.iter().enumerate() {
            let color = if green.contains(&i) { palette::rgb("green") } else { GRAY };
            c.fill_circle(x as f64, y as f64, self.radius as f64, color);
        }
        c.into_frame()
    }

    fn bbox(&self, i: usize) -> BBox {
        let (x, y) = self.nodes[i];
        let r = self.radius;
        BBox::new((x - r) as u32, (y - r) as u32, (2 * r + 1) as u32, (2 * r + 1) as u32)
    }
}

impl Instance for Graph {
    fn truth(&self) -> GroundTruth {
        let objects = (0..self.nodes.len())
            .map(|i| LabeledBox {
                label: if self.visit.contains(&i) { VISITED } else { UNVISITED }.into(),
                bbox: self.bbox(i),
            })
            .collect();
        GroundTruth::ObjectSet {
            objects,
            mode: GroundMode::Count,
        }
    }

    fn prompt(&self) -> String {
        prompt::compose(
            Dimension::Structural,
            &format!("An undirected graph of {} round nodes joined by black edges; one node is green, the rest are gray.", self.nodes.len()),
            "Starting from the green node, the traversal spreads along the edges and turns each newly reached node green, one node at a time.",
            "Every node connected to the start ends green and every unconnected node stays gray.",
        )
    }

    fn frame_count(&self) -> usize {
        hold_len(self.visit.len() - 1)
    }

    fn frame(&self, i: usize) -> Frame {
        let k = (i + 1).min(self.visit.len());
        self.render(&self.visit[..k])
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongCount || self.visit.len() < 2 {
            return None;
        }
        let skip = self.visit[rng.random_range(1..self.visit.len())];
        let partial: Vec<usize> = self.visit.iter().copied().filter(|&v| v != skip).collect();
        let total = self.frame_count();
        Some(
            (0..total)
                .map(|i| {
                    let k = (i + 1).min(self.visit.len());
                    let shown: Vec<usize> = self.visit[..k].iter().copied().filter(|&v| v != skip).collect();
                    if i + 1 >= total {
                        self.render(&partial)
                    } else {
                        self.render(&shown)
                    }
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfs_visits_component_in_order() {
        let edges = vec![(0, 1), (1, 2), (0, 3)];
        assert_eq!(bfs(5, &edges, 0), vec![0, 1, 3, 2]);
        assert_eq!(bfs(5, &edges, 4), vec![4]);
    }
}
