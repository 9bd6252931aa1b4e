//! Closed-form geometry of the model spaces `M_k`.
//!
//! Points are stored in embedding coordinates:
//!
//! | curvature | model                                   | coordinates |
//! |-----------|-----------------------------------------|-------------|
//! | `k > 0`   | sphere of radius `1/sqrt(k)` in `R^{n+1}` | `n + 1`     |
//! | `k = 0`   | Euclidean `R^n`                         | `n`         |
//! | `k < 0`   | upper hyperboloid sheet, time coordinate last, `<x,x> = -1/|k|` | `n + 1` |
//!
//! Every distance and angle is computed from half-angle forms so that short
//! segments and thin triangles keep full relative precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the normalization invariant of a [`ModelPoint`].
pub const POINT_TOL: f64 = 1e-12;

/// Relative slack used when checking triangle inequalities.
const TRIANGLE_SLACK: f64 = 1e-12;

/// Diameter of `M_k`: `pi/sqrt(k)` for `k > 0`, infinite otherwise.
pub fn diameter_bound(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Spherical,
    Flat,
    Hyperbolic,
}

/// A point of `M_k` in embedding coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelPoint {
    coords: Vec<f64>,
}

impl ModelPoint {
    /// Wraps raw coordinates without checking them against a space.
    pub fn from_coords(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// The model space `M_k` of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpace {
    kappa: f64,
    dim: usize,
    #[serde(serialize_with = "crate::report::extended_real")]
    diameter_bound: f64,
}

/// A geodesic segment in the uniqueness regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSegment {
    pub start: ModelPoint,
    pub end: ModelPoint,
    pub length: f64,
}

impl GeodesicSegment {
    pub fn point_at(&self, space: &ModelSpace, t: f64) -> ModelPoint {
        space.interpolate(&self.start, &self.end, self.length, t)
    }

    /// Points along the segment with spacing at most `spacing`, endpoints included.
    pub fn samples(&self, space: &ModelSpace, spacing: f64) -> Vec<ModelPoint> {
        let n = segment_count(self.length, spacing);
        (0..=n)
            .map(|i| self.point_at(space, i as f64 / n as f64))
            .collect()
    }
}

pub(crate) fn segment_count(length: f64, spacing: f64) -> usize {
    if spacing <= 0.0 || !spacing.is_finite() {
        return 1;
    }
    ((length / spacing).ceil() as usize).max(1)
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Lorentzian form with the time coordinate last.
pub(crate) fn minkowski(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() - 1;
    dot(&u[..n], &v[..n]) - u[n] * v[n]
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

impl ModelSpace {
    pub fn new(kappa: f64, dim: usize) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::InvalidSpace(format!("curvature {kappa} is not finite")));
        }
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        Ok(Self {
            kappa,
            dim,
            diameter_bound: diameter_bound(kappa),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter_bound
    }

    pub fn geometry(&self) -> Geometry {
        if self.kappa > 0.0 {
            Geometry::Spherical
        } else if self.kappa < 0.0 {
            Geometry::Hyperbolic
        } else {
            Geometry::Flat
        }
    }

    /// Curvature radius `1/sqrt|k|`; 1 for the flat model so that lengths
    /// need no rescaling there.
    pub fn radius(&self) -> f64 {
        match self.geometry() {
            Geometry::Flat => 1.0,
            _ => 1.0 / self.kappa.abs().sqrt(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.geometry() {
            Geometry::Flat => self.dim,
            _ => self.dim + 1,
        }
    }

    /// The fixed base point used for canonical placements.
    pub fn base_point(&self) -> ModelPoint {
        let mut c = vec![0.0; self.ambient_dim()];
        match self.geometry() {
            Geometry::Spherical => c[0] = self.radius(),
            Geometry::Hyperbolic => c[self.dim] = self.radius(),
            Geometry::Flat => {}
        }
        ModelPoint::from_coords(c)
    }

    /// `i`-th vector of the orthonormal tangent frame at [`Self::base_point`].
    pub(crate) fn base_frame(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.ambient_dim()];
        match self.geometry() {
            Geometry::Spherical => v[i + 1] = 1.0,
            _ => v[i] = 1.0,
        }
        v
    }

    pub fn check_point(&self, p: &ModelPoint) -> Result<()> {
        let c = p.coords();
        if c.len() != self.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        let r = self.radius();
        match self.geometry() {
            Geometry::Flat => Ok(()),
            Geometry::Spherical => {
                let n = norm(c);
                if (n - r).abs() > POINT_TOL * r.max(1.0) {
                    return Err(Error::InvalidPoint(format!(
                        "norm {n} differs from sphere radius {r}"
                    )));
                }
                Ok(())
            }
            Geometry::Hyperbolic => {
                let q = minkowski(c, c);
                let scale = dot(c, c).max(r * r);
                if (q + r * r).abs() > POINT_TOL * scale || c[self.dim] <= 0.0 {
                    return Err(Error::InvalidPoint(format!(
                        "Minkowski square {q} differs from {} or point is off the upper sheet",
                        -r * r
                    )));
                }
                Ok(())
            }
        }
    }

    /// Validated constructor.
    pub fn point(&self, coords: Vec<f64>) -> Result<ModelPoint> {
        let p = ModelPoint::from_coords(coords);
        self.check_point(&p)?;
        Ok(p)
    }

    /// Maps ambient coordinates back onto the model: radial rescaling on the
    /// sphere and on the timelike part of the hyperboloid cone, vertical
    /// lift otherwise.
    pub fn project(&self, mut coords: Vec<f64>) -> Result<ModelPoint> {
        if coords.len() != self.ambient_dim() || coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint("cannot project malformed coordinates".into()));
        }
        let r = self.radius();
        match self.geometry() {
            Geometry::Flat => {}
            Geometry::Spherical => {
                let n = norm(&coords);
                if n == 0.0 {
                    return Err(Error::InvalidPoint("cannot project the origin onto the sphere".into()));
                }
                coords.iter_mut().for_each(|x| *x *= r / n);
            }
            Geometry::Hyperbolic => {
                let q = minkowski(&coords, &coords);
                let t = self.dim;
                if q < 0.0 && coords[t] > 0.0 {
                    let s = r / (-q).sqrt();
                    coords.iter_mut().for_each(|x| *x *= s);
                } else {
                    let spatial = dot(&coords[..t], &coords[..t]);
                    coords[t] = (r * r + spatial).sqrt();
                }
            }
        }
        Ok(ModelPoint::from_coords(coords))
    }

    /// Unchecked distance; callers guarantee valid points.
    pub(crate) fn dist(&self, p: &ModelPoint, q: &ModelPoint) -> f64 {
        let (p, q) = (p.coords(), q.coords());
        let r = self.radius();
        match self.geometry() {
            Geometry::Flat => p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            Geometry::Spherical => {
                let (mut d2, mut s2) = (0.0, 0.0);
                for (a, b) in p.iter().zip(q) {
                    d2 += (a - b) * (a - b);
                    s2 += (a + b) * (a + b);
                }
                2.0 * r * d2.sqrt().atan2(s2.sqrt())
            }
            Geometry::Hyperbolic => {
                let n = p.len() - 1;
                let spatial: f64 = p[..n].iter().zip(&q[..n]).map(|(a, b)| (a - b) * (a - b)).sum();
                let chord = (spatial - (p[n] - q[n]).powi(2)).max(0.0).sqrt();
                2.0 * r * (chord / (2.0 * r)).asinh()
            }
        }
    }

    pub fn distance(&self, p: &ModelPoint, q: &ModelPoint) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.dist(p, q).min(self.diameter_bound))
    }

    fn check_unique(&self, d: f64) -> Result<()> {
        let bound = self.diameter_bound;
        if bound.is_finite() && d >= bound * (1.0 - 1e-10) {
            return Err(Error::NotUnique { distance: d, bound });
        }
        Ok(())
    }

    /// Point at parameter `t` on the geodesic of length `d` from `p` to `q`.
    pub(crate) fn interpolate(&self, p: &ModelPoint, q: &ModelPoint, d: f64, t: f64) -> ModelPoint {
        if t == 0.0 || d == 0.0 {
            return p.clone();
        }
        if t == 1.0 {
            return q.clone();
        }
        let (pc, qc) = (p.coords(), q.coords());
        let th = d / self.radius();
        let (wp, wq) = match self.geometry() {
            Geometry::Flat => (1.0 - t, t),
            Geometry::Spherical => (((1.0 - t) * th).sin() / th.sin(), (t * th).sin() / th.sin()),
            Geometry::Hyperbolic => (((1.0 - t) * th).sinh() / th.sinh(), (t * th).sinh() / th.sinh()),
        };
        let coords: Vec<f64> = pc.iter().zip(qc).map(|(a, b)| wp * a + wq * b).collect();
        match self.geometry() {
            Geometry::Flat => ModelPoint::from_coords(coords),
            // Re-projection keeps the iteration from drifting off the model.
            _ => self.project(coords).unwrap_or_else(|_| p.clone()),
        }
    }

    pub fn geodesic(&self, p: &ModelPoint, q: &ModelPoint) -> Result<GeodesicSegment> {
        let length = self.distance(p, q)?;
        self.check_unique(length)?;
        Ok(GeodesicSegment {
            start: p.clone(),
            end: q.clone(),
            length,
        })
    }

    pub fn geodesic_point(&self, p: &ModelPoint, q: &ModelPoint, t: f64) -> Result<ModelPoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("geodesic parameter {t} outside [0, 1]")));
        }
        let seg = self.geodesic(p, q)?;
        Ok(seg.point_at(self, t))
    }

    pub fn midpoint(&self, p: &ModelPoint, q: &ModelPoint) -> Result<ModelPoint> {
        self.geodesic_point(p, q, 0.5)
    }

    /// Projects an ambient vector onto the tangent space at `p` and scales it
    /// to unit speed. Returns `None` for a vanishing projection.
    pub(crate) fn unit_tangent(&self, p: &ModelPoint, v: &[f64]) -> Option<Vec<f64>> {
        let pc = p.coords();
        let r2 = self.radius() * self.radius();
        let mut w = v.to_vec();
        let speed = match self.geometry() {
            Geometry::Flat => norm(&w),
            Geometry::Spherical => {
                let c = dot(&w, pc) / r2;
                w.iter_mut().zip(pc).for_each(|(x, y)| *x -= c * y);
                norm(&w)
            }
            Geometry::Hyperbolic => {
                let c = minkowski(&w, pc) / r2;
                w.iter_mut().zip(pc).for_each(|(x, y)| *x += c * y);
                minkowski(&w, &w).max(0.0).sqrt()
            }
        };
        if !(speed > 1e-300) {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= speed);
        Some(w)
    }

    /// Exponential map along a unit tangent `v` at `p`.
    pub(crate) fn exp(&self, p: &ModelPoint, v: &[f64], s: f64) -> ModelPoint {
        let r = self.radius();
        let (cp, cv) = match self.geometry() {
            Geometry::Flat => (1.0, s),
            Geometry::Spherical => ((s / r).cos(), r * (s / r).sin()),
            Geometry::Hyperbolic => ((s / r).cosh(), r * (s / r).sinh()),
        };
        let coords: Vec<f64> = p.coords().iter().zip(v).map(|(a, b)| cp * a + cv * b).collect();
        match self.geometry() {
            Geometry::Flat => ModelPoint::from_coords(coords),
            _ => self.project(coords).unwrap_or_else(|_| p.clone()),
        }
    }

    fn check_sides(&self, a: f64, b: f64, c: f64) -> Result<()> {
        if [a, b, c].iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidTriangle(format!("side lengths ({a}, {b}, {c}) must be finite and nonnegative")));
        }
        let slack = TRIANGLE_SLACK * (a + b + c).max(1.0);
        if a > b + c + slack || b > a + c + slack || c > a + b + slack {
            return Err(Error::InvalidTriangle(format!("({a}, {b}, {c}) violates the triangle inequality")));
        }
        if self.diameter_bound.is_finite() && a + b + c >= 2.0 * self.diameter_bound {
            return Err(Error::InvalidTriangle(format!(
                "perimeter {} is not below {}",
                a + b + c,
                2.0 * self.diameter_bound
            )));
        }
        Ok(())
    }

    /// Angle at the vertex where the sides `b` and `c` meet, opposite side `a`.
    pub fn vertex_angle(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        self.check_sides(a, b, c)?;
        if b == 0.0 || c == 0.0 {
            return Ok(0.0);
        }
        let r = self.radius();
        let (a, b, c) = (a / r, b / r, c / r);
        // sin^2(theta/2) and cos^2(theta/2) up to the common factor sin(b)sin(c).
        let (s2, c2) = match self.geometry() {
            Geometry::Spherical => (
                ((a - b + c) / 2.0).sin() * ((a + b - c) / 2.0).sin(),
                ((b + c + a) / 2.0).sin() * ((b + c - a) / 2.0).sin(),
            ),
            Geometry::Hyperbolic => (
                ((a - b + c) / 2.0).sinh() * ((a + b - c) / 2.0).sinh(),
                ((b + c + a) / 2.0).sinh() * ((b + c - a) / 2.0).sinh(),
            ),
            Geometry::Flat => ((a - b + c) * (a + b - c), (b + c + a) * (b + c - a)),
        };
        Ok(2.0 * s2.max(0.0).sqrt().atan2(c2.max(0.0).sqrt()))
    }

    /// Canonical comparison triangle `[x, y, z]` with `d(y,z) = a`,
    /// `d(x,z) = b`, `d(x,y) = c`. `x` is the base point and `y` lies along the
    /// first frame direction.
    pub fn comparison_triangle(&self, a: f64, b: f64, c: f64) -> Result<[ModelPoint; 3]> {
        let theta = self.vertex_angle(a, b, c)?;
        if self.dim < 2 && theta > 1e-12 {
            return Err(Error::InvalidTriangle(
                "a non-degenerate triangle needs dimension at least 2".into(),
            ));
        }
        let x = self.base_point();
        let e1 = self.base_frame(0);
        let y = self.exp(&x, &e1, c);
        let dir: Vec<f64> = if self.dim < 2 {
            e1
        } else {
            let e2 = self.base_frame(1);
            e1.iter().zip(&e2).map(|(u, w)| theta.cos() * u + theta.sin() * w).collect()
        };
        let z = self.exp(&x, &dir, b);
        Ok([x, y, z])
    }

    /// Distance between the comparison points at arclength `s` on the side
    /// of length `c` and at arclength `t` on the side of length `b`, both
    /// measured from the shared vertex.
    pub fn comparison_point_distance(&self, a: f64, b: f64, c: f64, s: f64, t: f64) -> Result<f64> {
        let theta = self.vertex_angle(a, b, c)?;
        let slack = 1e-12 * (b + c).max(1.0);
        if !(-slack..=c + slack).contains(&s) || !(-slack..=b + slack).contains(&t) {
            return Err(Error::InvalidInput(format!(
                "positions ({s}, {t}) outside [0, {c}] x [0, {b}]"
            )));
        }
        let r = self.radius();
        let (s, t) = (s.clamp(0.0, c) / r, t.clamp(0.0, b) / r);
        let h = (theta / 2.0).sin().powi(2);
        let d = match self.geometry() {
            Geometry::Spherical => {
                let s2 = ((s - t) / 2.0).sin().powi(2) + s.sin() * t.sin() * h;
                let c2 = ((s - t) / 2.0).cos().powi(2) - s.sin() * t.sin() * h;
                2.0 * s2.max(0.0).sqrt().atan2(c2.max(0.0).sqrt())
            }
            Geometry::Hyperbolic => {
                let s2 = ((s - t) / 2.0).sinh().powi(2) + s.sinh() * t.sinh() * h;
                2.0 * s2.max(0.0).sqrt().asinh()
            }
            Geometry::Flat => ((s - t).powi(2) + 4.0 * s * t * h).max(0.0).sqrt(),
        };
        Ok(d * r)
    }
}
