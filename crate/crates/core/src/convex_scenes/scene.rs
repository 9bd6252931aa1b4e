use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cell::{CellSampler, ConvexCell};
use crate::error::{Error, Result};
use crate::model_spaces::{Geometry, ModelPoint, ModelSpace};

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Floor of the heuristic local-convexity radius.
pub const EPS_FLOOR: f64 = 1e-3;

/// Tolerance used by the samplers; tighter than membership so that sampled
/// points are members with room to spare.
const SAMPLER_TOL: f64 = 1e-12;

/// Pairs per cell below which validation tests every midpoint.
const MIDPOINT_BUDGET: usize = 200_000;

/// The `k`-th pair `(i, j)`, `j < i`, in row order.
fn pair_index(k: usize) -> (usize, usize) {
    let i = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).floor() as usize;
    let i = if i * (i - 1) / 2 > k { i - 1 } else { i };
    (i, k - i * (i - 1) / 2)
}

/// On-disk scene format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub kappa: f64,
    pub dim: usize,
    #[serde(default = "default_tol")]
    pub membership_tol: f64,
    #[serde(default)]
    pub eps_hint: Option<f64>,
    pub cells: Vec<ConvexCell>,
}

fn default_tol() -> f64 {
    DEFAULT_MEMBERSHIP_TOL
}

/// A closed subset of `M_k` given as a finite union of convex cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    space: ModelSpace,
    cells: Vec<ConvexCell>,
    membership_tol: f64,
    eps_hint: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub inside: bool,
    pub margin: f64,
}

/// Two members whose midpoint escapes the set under test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub q1: ModelPoint,
    pub q2: ModelPoint,
    pub midpoint: ModelPoint,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub index: usize,
    pub nonempty: bool,
    pub samples: usize,
    pub diameter_estimate: f64,
    pub nonconvex_witness: Option<Witness>,
    /// Set when a spherical cell spans more than the diameter bound.
    pub too_wide: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub cells: Vec<CellReport>,
    pub components: Vec<Vec<usize>>,
    pub connected: bool,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalCheck {
    pub center: ModelPoint,
    pub eps: f64,
    pub verdict: LocalVerdict,
    pub pairs_tested: usize,
    pub witness: Option<Witness>,
}

/// Where a local-convexity radius came from; recorded in certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", content = "value", rename_all = "snake_case")]
pub enum EpsSource {
    Hint(f64),
    Heuristic(f64),
}

impl EpsSource {
    pub fn value(&self) -> f64 {
        match *self {
            EpsSource::Hint(x) | EpsSource::Heuristic(x) => x,
        }
    }
}

impl Scene {
    pub fn new(
        space: ModelSpace,
        cells: Vec<ConvexCell>,
        membership_tol: f64,
        eps_hint: Option<f64>,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Scene("a scene needs at least one cell".into()));
        }
        if !(membership_tol > 0.0 && membership_tol.is_finite()) {
            return Err(Error::Scene(format!("membership_tol {membership_tol} must be positive")));
        }
        if let Some(e) = eps_hint {
            if !(e > 0.0 && e < space.diameter_bound() / 2.0) {
                return Err(Error::Scene(format!("eps_hint {e} must lie in (0, D/2)")));
            }
        }
        let n = space.ambient_dim();
        for (i, cell) in cells.iter().enumerate() {
            if cell.halfspaces.is_empty() && space.geometry() == Geometry::Spherical {
                return Err(Error::Scene(format!("cell {i}: the whole sphere is not a convex cell")));
            }
            for (j, h) in cell.halfspaces.iter().enumerate() {
                h.check().map_err(|e| {
                    let msg = match e {
                        Error::Scene(m) => m,
                        other => other.to_string(),
                    };
                    Error::Scene(format!("cell {i} half-space {j}: {msg}"))
                })?;
                if h.normal.len() != n {
                    return Err(Error::Scene(format!(
                        "cell {i} half-space {j}: normal has {} entries, expected {n}",
                        h.normal.len()
                    )));
                }
            }
        }
        Ok(Self { space, cells, membership_tol, eps_hint })
    }

    pub fn from_file(file: SceneFile) -> Result<Self> {
        let space = ModelSpace::new(file.kappa, file.dim)?;
        Self::new(space, file.cells, file.membership_tol, file.eps_hint)
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            kappa: self.space.kappa(),
            dim: self.space.dim(),
            membership_tol: self.membership_tol,
            eps_hint: self.eps_hint,
            cells: self.cells.clone(),
        }
    }

    /// Parses the JSON scene format; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SceneFile =
            serde_json::from_str(text).map_err(|e| Error::Scene(format!("malformed scene JSON: {e}")))?;
        Self::from_file(file)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        let space = ModelSpace::new(kappa, self.space.dim())?;
        Self::new(space, self.cells.clone(), self.membership_tol, self.eps_hint)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn cells(&self) -> &[ConvexCell] {
        &self.cells
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    pub fn eps_hint(&self) -> Option<f64> {
        self.eps_hint
    }

    pub fn add_cell(&mut self, cell: ConvexCell) {
        self.cells.push(cell);
    }

    /// Largest cell margin; nonnegative exactly for points of some cell.
    pub fn margin(&self, p: &ModelPoint) -> f64 {
        self.cells
            .iter()
            .map(|c| c.margin(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn is_member(&self, p: &ModelPoint) -> bool {
        self.margin(p) >= -self.membership_tol
    }

    pub fn contains(&self, p: &ModelPoint) -> Result<Membership> {
        self.space.check_point(p)?;
        let margin = self.margin(p);
        Ok(Membership { inside: margin >= -self.membership_tol, margin })
    }

    pub(crate) fn cells_containing(&self, p: &ModelPoint) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(p, self.membership_tol))
            .map(|(i, _)| i)
            .collect()
    }

    /// A cell holding both points, hence the whole geodesic between them.
    pub(crate) fn common_cell(&self, p: &ModelPoint, q: &ModelPoint) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| c.contains(p, self.membership_tol) && c.contains(q, self.membership_tol))
    }

    /// First sample of the geodesic `pq` (spacing at most `spacing`) that is
    /// not a member, with its margin.
    pub(crate) fn segment_escape(&self, p: &ModelPoint, q: &ModelPoint, spacing: f64) -> Result<Option<(ModelPoint, f64)>> {
        let seg = self.space.geodesic(p, q)?;
        for s in seg.samples(&self.space, spacing) {
            let m = self.margin(&s);
            if m < -self.membership_tol {
                return Ok(Some((s, m)));
            }
        }
        Ok(None)
    }

    pub(crate) fn sampler(&self, cell: usize) -> CellSampler<'_> {
        CellSampler::new(&self.space, &self.cells[cell], SAMPLER_TOL)
    }

    pub(crate) fn sampler_for<'a>(&'a self, cell: &'a ConvexCell) -> CellSampler<'a> {
        CellSampler::new(&self.space, cell, SAMPLER_TOL)
    }

    /// Interior anchors of all cells, `None` for cells found empty.
    pub(crate) fn anchors(&self, rng: &mut ChaCha8Rng) -> Vec<Option<ModelPoint>> {
        (0..self.cells.len()).map(|i| self.sampler(i).find_anchor(rng)).collect()
    }

    /// `n` member points spread round-robin over the nonempty cells.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<ModelPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_points_with(n, &mut rng)
    }

    pub(crate) fn sample_points_with(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<ModelPoint> {
        let anchors = self.anchors(rng);
        let live: Vec<usize> = (0..self.cells.len()).filter(|&i| anchors[i].is_some()).collect();
        if live.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(n);
        let per = n.div_ceil(live.len());
        for &i in &live {
            let a = anchors[i].as_ref().unwrap();
            out.extend(self.sampler(i).interior_points(a, per, rng));
        }
        // Interleave cells so that a prefix of the list covers all of them.
        let mut order: Vec<usize> = (0..out.len()).collect();
        order.sort_by_key(|&k| (k % per, k / per));
        let mut pts: Vec<ModelPoint> = order.into_iter().map(|k| out[k].clone()).collect();
        pts.truncate(n);
        pts
    }

    /// Checks nonemptiness, convexity and width of every cell, and
    /// connectedness of the cell-intersection graph.
    pub fn validate(&self, samples: usize, seed: u64) -> ValidationReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_cell = (samples / self.cells.len().max(1)).max(16);
        let bound = self.space.diameter_bound();
        let mut cells = Vec::with_capacity(self.cells.len());
        for (index, cell) in self.cells.iter().enumerate() {
            let sampler = self.sampler(index);
            let Some(anchor) = sampler.find_anchor(&mut rng) else {
                cells.push(CellReport {
                    index,
                    nonempty: false,
                    samples: 0,
                    diameter_estimate: 0.0,
                    nonconvex_witness: None,
                    too_wide: false,
                });
                continue;
            };
            let mut pts = sampler.boundary_points(&anchor, per_cell / 4 + 1, &mut rng);
            pts.extend(sampler.interior_points(&anchor, per_cell / 2 + 1, &mut rng));
            let mut diameter: f64 = 0.0;
            let mut too_wide = false;
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    let d = self.space.dist(&pts[i], &pts[j]);
                    diameter = diameter.max(d);
                    too_wide |= bound.is_finite() && d > bound * (1.0 - 1e-9);
                }
            }
            // Midpoint tests: every pair for small samples, a random budget otherwise.
            let n = pts.len();
            let all_pairs = n * (n - 1) / 2;
            let budget = all_pairs.min(MIDPOINT_BUDGET.max(16 * per_cell));
            let mut witness: Option<Witness> = None;
            for k in 0..budget {
                let (i, j) = if budget == all_pairs {
                    pair_index(k)
                } else {
                    let i = rng.gen_range(0..n);
                    let j = (i + rng.gen_range(1..n)) % n;
                    (i, j)
                };
                let d = self.space.dist(&pts[i], &pts[j]);
                if bound.is_finite() && d > bound * (1.0 - 1e-9) {
                    continue;
                }
                let m = self.space.interpolate(&pts[i], &pts[j], d, 0.5);
                let margin = cell.margin(&m);
                if margin < -self.membership_tol {
                    witness = Some(Witness { q1: pts[i].clone(), q2: pts[j].clone(), midpoint: m, margin });
                    break;
                }
            }
            cells.push(CellReport {
                index,
                nonempty: true,
                samples: pts.len(),
                diameter_estimate: diameter,
                nonconvex_witness: witness,
                too_wide,
            });
        }
        let components = self.components(&mut rng);
        let connected = components.len() == 1;
        let valid = connected
            && cells
                .iter()
                .all(|c| c.nonempty && c.nonconvex_witness.is_none() && !c.too_wide);
        ValidationReport { cells, components, connected, valid }
    }

    /// Connected components of the cell-intersection graph.
    pub fn components(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
        let n = self.cells.len();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let meet = self.cells[i].intersection(&self.cells[j]);
                if self.sampler_for(&meet).find_anchor(rng).is_some() {
                    uf.union(i, j);
                }
            }
        }
        let labels = uf.into_labeling();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut seen: Vec<usize> = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            match seen.iter().position(|s| s == l) {
                Some(k) => groups[k].push(i),
                None => {
                    seen.push(*l);
                    groups.push(vec![i]);
                }
            }
        }
        groups
    }

    /// Probabilistic test of convexity of `B_p(eps) ∩ C` by midpoints of
    /// sampled member pairs.
    pub fn local_convexity_check(&self, p: &ModelPoint, eps: f64, samples: usize, seed: u64) -> Result<LocalCheck> {
        if !self.contains(p)?.inside {
            return Err(Error::InvalidInput("center is not a member of the scene".into()));
        }
        if !(eps > 0.0 && eps < self.space.diameter_bound() / 2.0) {
            return Err(Error::InvalidInput(format!("radius {eps} must lie in (0, D/2)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pools = self.ball_pools(p, eps, samples.max(8), &mut rng);
        let live: Vec<usize> = (0..pools.len()).filter(|&i| !pools[i].is_empty()).collect();
        let total: usize = live.iter().map(|&i| pools[i].len()).sum();
        let mut pairs_tested = 0;
        if total >= 2 {
            for k in 0..samples {
                let i = *live.choose(&mut rng).unwrap();
                let q1 = pools[i].choose(&mut rng).unwrap();
                // Pairs drawn from different cells are the only ones that can fail.
                let j = if k % 4 != 3 && live.len() > 1 {
                    loop {
                        let j = *live.choose(&mut rng).unwrap();
                        if j != i {
                            break j;
                        }
                    }
                } else {
                    i
                };
                let q2 = pools[j].choose(&mut rng).unwrap();
                let d = self.space.dist(q1, q2);
                if d >= self.space.diameter_bound() * (1.0 - 1e-9) {
                    continue;
                }
                pairs_tested += 1;
                let m = self.space.interpolate(q1, q2, d, 0.5);
                let margin = self.margin(&m);
                if margin < -self.membership_tol {
                    return Ok(LocalCheck {
                        center: p.clone(),
                        eps,
                        verdict: LocalVerdict::Fail,
                        pairs_tested,
                        witness: Some(Witness { q1: q1.clone(), q2: q2.clone(), midpoint: m, margin }),
                    });
                }
            }
        }
        Ok(LocalCheck { center: p.clone(), eps, verdict: LocalVerdict::Pass, pairs_tested, witness: None })
    }

    /// Member points of `B_p(eps)`, grouped by the cell they were drawn from.
    fn ball_pools(&self, p: &ModelPoint, eps: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<ModelPoint>> {
        let in_ball = |q: &ModelPoint| self.space.dist(p, q) < eps;
        let per = n.div_ceil(self.cells.len()).max(8);
        let mut pools = Vec::with_capacity(self.cells.len());
        for cell in &self.cells {
            let sampler = self.sampler_for(cell);
            let start = if cell.contains(p, self.membership_tol) {
                Some(p.clone())
            } else {
                // Entry point of the geodesic from p towards the cell.
                sampler.find_anchor(rng).and_then(|a| {
                    let d = self.space.dist(p, &a);
                    if d >= self.space.diameter_bound() * (1.0 - 1e-9) {
                        return None;
                    }
                    let (mut lo, mut hi) = (0.0, 1.0);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if cell.contains(&self.space.interpolate(p, &a, d, mid), 0.0) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    let q = self.space.interpolate(p, &a, d, hi);
                    in_ball(&q).then_some(q)
                })
            };
            let Some(mut q) = start else {
                pools.push(Vec::new());
                continue;
            };
            let mut pool = Vec::with_capacity(per);
            let eff = sampler.effective_dim();
            for _ in 0..per {
                // Hit-and-run restricted to the ball, plus the chord ends
                // which probe the boundary.
                let Some(v) = sampler.random_tangent(&q, rng, true) else { break };
                let (back, fwd) = sampler.chord(&q, &v);
                let lo = self.clip(p, &q, &v, -back, eps);
                let hi = self.clip(p, &q, &v, fwd, eps);
                let s = lo + (hi - lo) * rng.gen::<f64>();
                let next = self.space.exp(&q, &v, s);
                for t in [lo, hi] {
                    let e = self.space.exp(&q, &v, t);
                    if in_ball(&e) && cell.contains(&e, 1e-12) {
                        pool.push(e);
                    }
                }
                if in_ball(&next) && cell.contains(&next, 1e-12) {
                    q = next;
                    pool.push(q.clone());
                }
                if eff == 0 {
                    break;
                }
            }
            pools.push(pool);
        }
        pools
    }

    /// Shrinks the chord parameter `s` towards 0 until `exp(q, v, s)` lies
    /// in the open ball `B_p(eps)`.
    fn clip(&self, p: &ModelPoint, q: &ModelPoint, v: &[f64], s: f64, eps: f64) -> f64 {
        if self.space.dist(p, &self.space.exp(q, v, s)) < eps {
            return s;
        }
        let (mut inside, mut outside) = (0.0, s);
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if self.space.dist(p, &self.space.exp(q, v, mid)) < eps {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    }

    /// Local-convexity radius: the hint when present, otherwise half the
    /// smallest sampled gap between non-adjacent cells, floored at
    /// [`EPS_FLOOR`] and kept below a quarter of the diameter bound.
    pub fn local_eps(&self, seed: u64) -> EpsSource {
        if let Some(e) = self.eps_hint {
            return EpsSource::Hint(e);
        }
        let cap = if self.space.diameter_bound().is_finite() {
            0.25 * self.space.diameter_bound()
        } else {
            0.5
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.cells.len();
        let anchors = self.anchors(&mut rng);
        let boundary: Vec<Vec<ModelPoint>> = (0..n)
            .map(|i| match &anchors[i] {
                Some(a) => self.sampler(i).boundary_points(a, 48, &mut rng),
                None => Vec::new(),
            })
            .collect();
        let mut gap = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let meet = self.cells[i].intersection(&self.cells[j]);
                if self.sampler_for(&meet).find_anchor(&mut rng).is_some() {
                    continue;
                }
                for p in &boundary[i] {
                    for q in &boundary[j] {
                        gap = gap.min(self.space.dist(p, q));
                    }
                }
            }
        }
        EpsSource::Heuristic((0.5 * gap).min(cap).max(EPS_FLOOR))
    }
}
