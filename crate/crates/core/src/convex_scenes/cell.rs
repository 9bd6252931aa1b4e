use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_spaces::{dot, Geometry, ModelPoint, ModelSpace};

/// The closed ambient half-space `{x : <x, normal> >= offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let h = Self { normal, offset };
        h.check()?;
        Ok(h)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.normal.iter().chain([&self.offset]).any(|x| !x.is_finite()) {
            return Err(Error::Scene("non-finite half-space coefficient".into()));
        }
        if self.normal.iter().all(|x| *x == 0.0) {
            return Err(Error::Scene("zero normal".into()));
        }
        Ok(())
    }

    /// Signed ambient distance from the bounding hyperplane, positive inside.
    pub fn slack(&self, p: &ModelPoint) -> f64 {
        (dot(&self.normal, p.coords()) - self.offset) / dot(&self.normal, &self.normal).sqrt()
    }
}

/// Intersection of finitely many half-spaces with the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexCell {
    pub halfspaces: Vec<HalfSpace>,
}

impl ConvexCell {
    pub fn new(halfspaces: Vec<HalfSpace>) -> Self {
        Self { halfspaces }
    }

    /// Smallest slack over the half-spaces; `+inf` for an unconstrained cell.
    pub fn margin(&self, p: &ModelPoint) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.slack(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &ModelPoint, tol: f64) -> bool {
        self.margin(p) >= -tol
    }

    pub fn intersection(&self, other: &ConvexCell) -> ConvexCell {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.extend(other.halfspaces.iter().cloned());
        ConvexCell { halfspaces }
    }

    /// Unit normals of hyperplanes the cell is pinned to, i.e. pairs of
    /// opposite half-spaces with opposite offsets.
    pub(crate) fn equality_normals(&self) -> Vec<Vec<f64>> {
        let unit = |h: &HalfSpace| {
            let n = dot(&h.normal, &h.normal).sqrt();
            (h.normal.iter().map(|x| x / n).collect::<Vec<_>>(), h.offset / n)
        };
        let mut out: Vec<Vec<f64>> = Vec::new();
        for (i, hi) in self.halfspaces.iter().enumerate() {
            let (ni, oi) = unit(hi);
            for hj in &self.halfspaces[i + 1..] {
                let (nj, oj) = unit(hj);
                let opposite = ni.iter().zip(&nj).all(|(a, b)| (a + b).abs() < 1e-12);
                if opposite && (oi + oj).abs() < 1e-12 {
                    // Gram-Schmidt against the normals already collected.
                    let mut v = ni.clone();
                    for u in &out {
                        let c = dot(&v, u);
                        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                    }
                    let n = dot(&v, &v).sqrt();
                    if n > 1e-9 {
                        out.push(v.iter().map(|x| x / n).collect());
                    }
                }
            }
        }
        out
    }
}

/// Hit-and-run sampling inside one convex cell.
///
/// Chords are found by doubling and bisection on membership, which is exact
/// for convex cells because the set of parameters along a geodesic that stay
/// in the cell is an interval.
pub(crate) struct CellSampler<'a> {
    space: &'a ModelSpace,
    cell: &'a ConvexCell,
    equalities: Vec<Vec<f64>>,
    tol: f64,
    max_len: f64,
}

impl<'a> CellSampler<'a> {
    pub fn new(space: &'a ModelSpace, cell: &'a ConvexCell, tol: f64) -> Self {
        let max_len = match space.geometry() {
            Geometry::Spherical => std::f64::consts::PI * space.radius() * (1.0 - 1e-9),
            Geometry::Hyperbolic => 40.0 * space.radius(),
            Geometry::Flat => 1e4,
        };
        Self {
            space,
            cell,
            equalities: cell.equality_normals(),
            tol,
            max_len,
        }
    }

    /// Dimension left after removing the pinned hyperplanes.
    pub fn effective_dim(&self) -> usize {
        self.space.dim().saturating_sub(self.equalities.len())
    }

    fn inside(&self, p: &ModelPoint) -> bool {
        self.cell.contains(p, self.tol)
    }

    /// Alternating projections onto the half-spaces, re-projected onto the
    /// model after every sweep.
    fn project_onto_cell(&self, start: ModelPoint) -> Option<ModelPoint> {
        let mut x = start.into_coords();
        for _ in 0..400 {
            for h in &self.cell.halfspaces {
                let v = dot(&h.normal, &x) - h.offset;
                if v < 0.0 {
                    let nn = dot(&h.normal, &h.normal);
                    x.iter_mut().zip(&h.normal).for_each(|(a, n)| *a -= v / nn * n);
                }
            }
            let p = self.space.project(x).ok()?;
            if self.inside(&p) {
                return Some(p);
            }
            x = p.into_coords();
        }
        None
    }

    pub fn find_anchor<R: Rng>(&self, rng: &mut R) -> Option<ModelPoint> {
        let base = self.space.base_point();
        if self.inside(&base) {
            return Some(base);
        }
        if let Some(p) = self.project_onto_cell(base.clone()) {
            return Some(p);
        }
        let scale = match self.space.geometry() {
            Geometry::Flat => 1.0,
            _ => self.space.radius(),
        };
        for k in 0..48 {
            let r = scale * [0.3, 1.0, 2.5][k % 3];
            let v = self.random_tangent(&base, rng, false)?;
            let start = self.space.exp(&base, &v, r * rng.gen::<f64>());
            if let Some(p) = self.project_onto_cell(start) {
                return Some(p);
            }
        }
        None
    }

    /// Random unit tangent at `p`, optionally kept parallel to the pinned
    /// hyperplanes.
    pub fn random_tangent<R: Rng>(&self, p: &ModelPoint, rng: &mut R, pinned: bool) -> Option<Vec<f64>> {
        for _ in 0..16 {
            let mut v: Vec<f64> = (0..self.space.ambient_dim())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            if pinned {
                for u in &self.equalities {
                    let c = dot(&v, u);
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                }
            }
            if let Some(t) = self.space.unit_tangent(p, &v) {
                return Some(t);
            }
        }
        None
    }

    /// Largest `s` in `[0, max_len]` with `exp(p, v, s)` in the cell.
    fn reach(&self, p: &ModelPoint, v: &[f64]) -> f64 {
        let mut lo = 0.0;
        let mut hi = 1e-3 * self.max_len.min(1.0);
        loop {
            if hi >= self.max_len {
                hi = self.max_len;
                if self.inside(&self.space.exp(p, v, hi)) {
                    return hi;
                }
                break;
            }
            if !self.inside(&self.space.exp(p, v, hi)) {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-13 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.inside(&self.space.exp(p, v, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Chord through `p` along `v` as the parameter interval `[-back, fwd]`.
    pub fn chord(&self, p: &ModelPoint, v: &[f64]) -> (f64, f64) {
        let back: Vec<f64> = v.iter().map(|x| -x).collect();
        (self.reach(p, &back), self.reach(p, v))
    }

    pub fn step<R: Rng>(&self, p: &ModelPoint, rng: &mut R) -> ModelPoint {
        let Some(v) = self.random_tangent(p, rng, true) else {
            return p.clone();
        };
        let (back, fwd) = self.chord(p, &v);
        let s = -back + (back + fwd) * rng.gen::<f64>();
        let q = self.space.exp(p, &v, s);
        if self.inside(&q) {
            q
        } else {
            p.clone()
        }
    }

    /// `n` points from a hit-and-run chain started at `anchor`.
    pub fn interior_points<R: Rng>(&self, anchor: &ModelPoint, n: usize, rng: &mut R) -> Vec<ModelPoint> {
        let mut p = anchor.clone();
        for _ in 0..8 {
            p = self.step(&p, rng);
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            p = self.step(&p, rng);
            out.push(p.clone());
        }
        out
    }

    /// Chord endpoints through points of a hit-and-run chain; these lie on
    /// the relative boundary of the cell.
    pub fn boundary_points<R: Rng>(&self, anchor: &ModelPoint, chords: usize, rng: &mut R) -> Vec<ModelPoint> {
        let mut p = anchor.clone();
        let mut out = Vec::with_capacity(2 * chords);
        for _ in 0..chords {
            p = self.step(&p, rng);
            if let Some(v) = self.random_tangent(&p, rng, true) {
                let (back, fwd) = self.chord(&p, &v);
                out.push(self.space.exp(&p, &v, -back));
                out.push(self.space.exp(&p, &v, fwd));
            }
        }
        out.retain(|q| self.inside(q));
        out
    }

    /// Evenly spaced points along one chord through `anchor`; covers a
    /// one-dimensional cell completely.
    pub fn chord_points<R: Rng>(&self, anchor: &ModelPoint, spacing: f64, cap: usize, rng: &mut R) -> Vec<ModelPoint> {
        let Some(v) = self.random_tangent(anchor, rng, true) else {
            return vec![anchor.clone()];
        };
        let (back, fwd) = self.chord(anchor, &v);
        let len = back + fwd;
        let n = ((len / spacing).ceil() as usize).clamp(1, cap.max(1));
        (0..=n)
            .map(|i| self.space.exp(anchor, &v, -back + len * i as f64 / n as f64))
            .filter(|q| self.inside(q))
            .collect()
    }
}
