//! Graph approximation of the induced length metric.
//!
//! Every leg of a path between two points of a common convex cell is the
//! ambient geodesic, which stays inside that cell. A shortest path in the
//! union therefore only changes cells inside pairwise cell intersections,
//! so the graph keeps sampled "transition" nodes from those intersections
//! and joins any two nodes that share a cell. Boundary samples of single
//! cells are added as further nodes for diameter estimates; they never
//! shorten a path and are skipped by point-to-point queries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scene::Scene;
use crate::error::{Error, Result};
use crate::model_spaces::{ModelPoint, ModelSpace};

/// Chords per full-dimensional region.
const MAX_CHORDS: usize = 60;
/// Sources of the diameter search.
const MAX_DIAMETER_SOURCES: usize = 160;
/// Points per one-dimensional region.
const MAX_LINE_POINTS: usize = 800;

/// A piecewise-geodesic curve in the scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthPath {
    pub vertices: Vec<ModelPoint>,
    pub length: f64,
    /// For each leg, a cell containing both of its ends, if one was recorded.
    pub leg_cells: Vec<Option<usize>>,
}

impl LengthPath {
    pub fn from_vertices(scene: &Scene, vertices: Vec<ModelPoint>) -> Self {
        let space = scene.space();
        let leg_cells = vertices.windows(2).map(|w| scene.common_cell(&w[0], &w[1])).collect();
        let length = vertices.windows(2).map(|w| space.dist(&w[0], &w[1])).sum();
        Self { vertices, length, leg_cells }
    }

    /// Arclength parametrization: the point at distance `s` from the start.
    pub fn point_at(&self, space: &ModelSpace, s: f64) -> ModelPoint {
        let mut remaining = s.max(0.0);
        for w in self.vertices.windows(2) {
            let d = space.dist(&w[0], &w[1]);
            if remaining <= d {
                if d == 0.0 {
                    return w[0].clone();
                }
                return space.interpolate(&w[0], &w[1], d, remaining / d);
            }
            remaining -= d;
        }
        self.vertices.last().cloned().expect("paths have at least one vertex")
    }
}

#[derive(Debug, Clone)]
struct Node {
    point: ModelPoint,
    cells: Vec<usize>,
    transition: bool,
}

/// Sampled nodes of a scene with cell-sharing adjacency.
#[derive(Debug, Clone)]
pub struct LengthGraph<'a> {
    scene: &'a Scene,
    nodes: Vec<Node>,
    resolution: f64,
}

fn share(a: &[usize], b: &[usize]) -> Option<usize> {
    a.iter().find(|c| b.contains(c)).copied()
}

impl<'a> LengthGraph<'a> {
    pub fn build(scene: &'a Scene, resolution: f64, seed: u64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidInput(format!("resolution {resolution} must be positive")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = scene.cells();
        let mut nodes: Vec<Node> = Vec::new();
        let push = |p: ModelPoint, transition: bool, nodes: &mut Vec<Node>| {
            let owners = scene.cells_containing(&p);
            if owners.is_empty() {
                return;
            }
            let transition = transition && owners.len() > 1;
            nodes.push(Node { point: p, cells: owners, transition });
        };
        for i in 0..cells.len() {
            for j in (i + 1)..cells.len() {
                let meet = cells[i].intersection(&cells[j]);
                for p in region_points(scene, &scene.sampler_for(&meet), resolution, &mut rng) {
                    push(p, true, &mut nodes);
                }
            }
        }
        for i in 0..cells.len() {
            for p in region_points(scene, &scene.sampler(i), resolution, &mut rng) {
                push(p, false, &mut nodes);
            }
        }
        Ok(Self { scene, nodes, resolution })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_points(&self) -> impl Iterator<Item = &ModelPoint> {
        self.nodes.iter().map(|n| &n.point)
    }

    fn edge(&self, a: &Node, b: &Node) -> Option<(f64, usize)> {
        let cell = share(&a.cells, &b.cells)?;
        let d = self.scene.space().dist(&a.point, &b.point);
        let bound = self.scene.space().diameter_bound();
        if bound.is_finite() && d >= bound * (1.0 - 1e-10) {
            return None;
        }
        Some((d, cell))
    }

    /// Dense Dijkstra over `n` nodes from `source`. Returns distances and
    /// predecessor links with the shared cell of each link.
    fn dijkstra<W>(n: usize, source: usize, weight: W) -> (Vec<f64>, Vec<Option<(usize, usize)>>)
    where
        W: Fn(usize, usize) -> Option<(f64, usize)>,
    {
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![None; n];
        let mut done = vec![false; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for v in 0..n {
                if done[v] {
                    continue;
                }
                if let Some((w, cell)) = weight(u, v) {
                    if dist[u] + w < dist[v] {
                        dist[v] = dist[u] + w;
                        prev[v] = Some((u, cell));
                    }
                }
            }
        }
        (dist, prev)
    }

    /// Shortest graph path from `x` to `y`.
    pub fn path(&self, x: &ModelPoint, y: &ModelPoint) -> Result<LengthPath> {
        let scene = self.scene;
        for p in [x, y] {
            if !scene.contains(p)?.inside {
                return Err(Error::InvalidInput("path endpoint is not a member of the scene".into()));
            }
        }
        let ends = [
            Node { point: x.clone(), cells: scene.cells_containing(x), transition: true },
            Node { point: y.clone(), cells: scene.cells_containing(y), transition: true },
        ];
        let mut members: Vec<&Node> = vec![&ends[0], &ends[1]];
        members.extend(self.nodes.iter().filter(|n| n.transition));
        let (dist, prev) = Self::dijkstra(members.len(), 0, |u, v| self.edge(members[u], members[v]));
        if !dist[1].is_finite() {
            return Err(Error::Disconnected);
        }
        let mut rev = vec![members[1].point.clone()];
        let mut cells_rev = Vec::new();
        let mut k = 1;
        while let Some((p, cell)) = prev[k] {
            rev.push(members[p].point.clone());
            cells_rev.push(Some(cell));
            k = p;
        }
        rev.reverse();
        cells_rev.reverse();
        Ok(LengthPath { vertices: rev, length: dist[1], leg_cells: cells_rev })
    }

    /// Largest graph distance from a strided subset of at most
    /// `MAX_DIAMETER_SOURCES` nodes to all nodes, with the pair realizing it.
    pub fn diameter(&self) -> Result<(f64, ModelPoint, ModelPoint)> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Scene("no sample points found in the scene".into()));
        }
        let mut weights = vec![None; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                let w = self.edge(&self.nodes[u], &self.nodes[v]);
                weights[u * n + v] = w;
                weights[v * n + u] = w;
            }
        }
        let stride = n.div_ceil(MAX_DIAMETER_SOURCES);
        let mut best = (0.0, 0, 0);
        for s in (0..n).step_by(stride) {
            let (dist, _) = Self::dijkstra(n, s, |u, v| weights[u * n + v]);
            for (t, d) in dist.iter().enumerate() {
                if !d.is_finite() {
                    return Err(Error::Disconnected);
                }
                if *d > best.0 {
                    best = (*d, s, t);
                }
            }
        }
        Ok((best.0, self.nodes[best.1].point.clone(), self.nodes[best.2].point.clone()))
    }
}

/// Sample points of one convex region: evenly spaced along a chord when the
/// region is at most one-dimensional, chord endpoints otherwise.
fn region_points(
    scene: &Scene,
    sampler: &super::cell::CellSampler<'_>,
    resolution: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<ModelPoint> {
    let Some(anchor) = sampler.find_anchor(rng) else {
        return Vec::new();
    };
    let mut pts = if sampler.effective_dim() <= 1 {
        sampler.chord_points(&anchor, resolution, MAX_LINE_POINTS, rng)
    } else {
        let probe = sampler.boundary_points(&anchor, 8, rng);
        let extent = probe
            .iter()
            .flat_map(|p| probe.iter().map(move |q| (p, q)))
            .map(|(p, q)| scene.space().dist(p, q))
            .fold(0.0, f64::max);
        let chords = ((4.0 * extent / resolution).ceil() as usize).clamp(8, MAX_CHORDS);
        let mut pts = probe;
        pts.extend(sampler.boundary_points(&anchor, chords, rng));
        pts
    };
    pts.push(anchor);
    dedup(scene.space(), pts, 1e-9)
}

fn dedup(space: &ModelSpace, pts: Vec<ModelPoint>, tol: f64) -> Vec<ModelPoint> {
    let mut out: Vec<ModelPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| space.dist(&p, q) < tol) {
            out.push(p);
        }
    }
    out
}

/// Approximates the induced length distance between `x` and `y`.
pub fn length_metric(scene: &Scene, x: &ModelPoint, y: &ModelPoint, resolution: f64, seed: u64) -> Result<LengthPath> {
    LengthGraph::build(scene, resolution, seed)?.path(x, y)
}

/// Estimate of the diameter of the scene in its induced length metric.
pub fn intrinsic_diameter(scene: &Scene, resolution: f64, seed: u64) -> Result<f64> {
    Ok(LengthGraph::build(scene, resolution, seed)?.diameter()?.0)
}
