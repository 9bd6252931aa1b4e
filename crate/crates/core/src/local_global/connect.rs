use serde::Serialize;

use super::iteration::{midpoint_iteration, IterationTrace};
use super::schedule::{build_schedule, EpsilonSchedule, ScheduleLevel};
use crate::convex_scenes::{EpsSource, LengthGraph, LengthPath, LocalVerdict, Scene, Witness};
use crate::error::Result;
use crate::model_spaces::{Geometry, ModelPoint};

pub const DEFAULT_MAX_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectVerdict {
    GeodesicInC,
    LengthHypothesisViolated,
    LocalConvexityViolated,
    NotConverged,
}

/// A point of the curve up to which `x y_s` is certified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Station {
    pub arclength: f64,
    pub point: ModelPoint,
    pub base_case: bool,
    /// Index into the certificate's traces.
    pub trace: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectCertificate {
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub curve: LengthPath,
    /// Graph estimate of the length distance.
    pub ell: f64,
    pub distance: f64,
    pub eps: EpsSource,
    /// Schedule of the last station.
    pub schedule: Option<EpsilonSchedule>,
    pub stations: Vec<Station>,
    pub traces: Vec<IterationTrace>,
    pub geodesic_samples: Vec<ModelPoint>,
    pub min_sample_margin: f64,
    pub verdict: ConnectVerdict,
    pub witness: Option<Witness>,
}

impl ConnectCertificate {
    pub fn ell_gap(&self) -> f64 {
        (self.ell - self.distance).abs()
    }
}

/// Length graph and radius shared by many `connect` calls on one scene.
#[derive(Debug, Clone)]
pub struct Connector<'a> {
    scene: &'a Scene,
    graph: LengthGraph<'a>,
    eps: EpsSource,
    resolution: f64,
    tol: f64,
    max_steps: usize,
    seed: u64,
}

impl<'a> Connector<'a> {
    pub fn new(scene: &'a Scene, resolution: f64, tol: f64, seed: u64) -> Result<Self> {
        let graph = LengthGraph::build(scene, resolution, seed)?;
        let eps = scene.local_eps(seed);
        Ok(Self { scene, graph, eps, resolution, tol, max_steps: DEFAULT_MAX_STEPS, seed })
    }

    pub fn graph(&self) -> &LengthGraph<'a> {
        &self.graph
    }

    pub fn eps(&self) -> EpsSource {
        self.eps
    }

    pub fn connect(&self, x: &ModelPoint, y: &ModelPoint) -> Result<ConnectCertificate> {
        let space = self.scene.space();
        let bound = space.diameter_bound();
        let curve = self.graph.path(x, y)?;
        let mut cert = ConnectCertificate {
            x: x.clone(),
            y: y.clone(),
            ell: curve.length,
            distance: space.dist(x, y),
            curve,
            eps: self.eps,
            schedule: None,
            stations: Vec::new(),
            traces: Vec::new(),
            geodesic_samples: Vec::new(),
            min_sample_margin: f64::INFINITY,
            verdict: ConnectVerdict::GeodesicInC,
            witness: None,
        };
        if cert.ell >= bound {
            cert.verdict = ConnectVerdict::LengthHypothesisViolated;
            return Ok(cert);
        }
        let base = self.eps.value();
        let total = cert.ell;
        let mut s = 0.0;
        let mut frontier = x.clone();
        let mut h: f64 = 0.0;
        while s < total {
            let reach = space.dist(x, &frontier);
            let schedule = if reach > 0.0 { Some(build_schedule(space, reach, base)?) } else { None };
            let floor = schedule.as_ref().map_or(base, |sc| sc.last().eps_d) / 2.0;
            let ceiling = match (&schedule, space.geometry()) {
                (Some(sc), Geometry::Spherical) => sc.delta / 4.0,
                _ => f64::INFINITY,
            };
            h = h.max(floor).min(ceiling.max(floor));
            loop {
                let s_next = (s + h).min(total);
                let y_bar = cert.curve.point_at(space, s_next);
                let (ok, trace) = if space.dist(x, &y_bar) <= base / 2.0 || schedule.is_none() {
                    (self.scene.segment_escape(x, &y_bar, self.resolution)?.is_none(), None)
                } else {
                    let sc = schedule.as_ref().unwrap();
                    let level = ScheduleLevel {
                        d: reach,
                        eps_d: sc.last().eps_d.max(space.dist(&frontier, &y_bar)),
                    };
                    let t = midpoint_iteration(
                        self.scene, x, &y_bar, x, &frontier, level, sc.contraction, self.tol, self.max_steps,
                    )?;
                    let ok = t.converged
                        && t.failure.is_none()
                        && self.scene.segment_escape(x, &y_bar, self.resolution)?.is_none();
                    (ok, Some(t))
                };
                if ok {
                    let trace_index = trace.map(|t| {
                        cert.traces.push(t);
                        cert.traces.len() - 1
                    });
                    cert.stations.push(Station {
                        arclength: s_next,
                        point: y_bar.clone(),
                        base_case: trace_index.is_none(),
                        trace: trace_index,
                    });
                    s = s_next;
                    frontier = y_bar;
                    h *= 2.0;
                    break;
                }
                if h > floor * (1.0 + 1e-9) {
                    h = (h / 2.0).max(floor);
                    continue;
                }
                cert.schedule = schedule;
                let not_converged = trace.as_ref().is_some_and(|t| !t.converged && t.failure.is_none());
                let failed_trace = trace.as_ref().and_then(|t| t.failure.clone());
                if let Some(t) = trace {
                    cert.traces.push(t);
                }
                if not_converged {
                    cert.verdict = ConnectVerdict::NotConverged;
                    return Ok(cert);
                }
                cert.verdict = ConnectVerdict::LocalConvexityViolated;
                cert.witness = match failed_trace {
                    Some(w) => Some(w),
                    None => self.segment_witness(x, &y_bar, &frontier)?,
                };
                return Ok(cert);
            }
            cert.schedule = schedule;
        }
        let seg = space.geodesic(x, y)?;
        cert.geodesic_samples = seg.samples(space, self.resolution);
        cert.min_sample_margin = cert
            .geodesic_samples
            .iter()
            .map(|p| self.scene.margin(p))
            .fold(f64::INFINITY, f64::min);
        if cert.min_sample_margin < -self.scene.membership_tol() {
            cert.verdict = ConnectVerdict::LocalConvexityViolated;
            cert.witness = self.segment_witness(x, y, x)?;
        }
        Ok(cert)
    }

    /// Witness triple from a sampled geodesic `pq` that leaves the scene: the
    /// member samples bracketing an excursion and their midpoint. Falls back
    /// to a local check around `near`.
    fn segment_witness(&self, p: &ModelPoint, q: &ModelPoint, near: &ModelPoint) -> Result<Option<Witness>> {
        let space = self.scene.space();
        let tol = self.scene.membership_tol();
        let samples = space.geodesic(p, q)?.samples(space, self.resolution / 4.0);
        let inside: Vec<bool> = samples.iter().map(|s| self.scene.margin(s) >= -tol).collect();
        let mut i = 0;
        while i < samples.len() {
            if inside[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < samples.len() && !inside[i] {
                i += 1;
            }
            if start == 0 || i == samples.len() {
                continue;
            }
            let (q1, q2) = (&samples[start - 1], &samples[i]);
            let midpoint = space.midpoint(q1, q2)?;
            let margin = self.scene.margin(&midpoint);
            if margin < -tol {
                return Ok(Some(Witness { q1: q1.clone(), q2: q2.clone(), midpoint, margin }));
            }
        }
        let radius = self.eps.value().min(0.49 * space.diameter_bound());
        let check = self.scene.local_convexity_check(near, radius, 4000, self.seed)?;
        Ok(match check.verdict {
            LocalVerdict::Fail => check.witness,
            LocalVerdict::Pass => None,
        })
    }
}

/// Certifies `xy` inside the scene by marching along a length-metric curve.
pub fn connect(
    scene: &Scene,
    x: &ModelPoint,
    y: &ModelPoint,
    resolution: f64,
    tol: f64,
    seed: u64,
) -> Result<ConnectCertificate> {
    Connector::new(scene, resolution, tol, seed)?.connect(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pt(c: &[f64]) -> ModelPoint {
        ModelPoint::from_coords(c.to_vec())
    }

    #[test]
    fn hexagon_opposite_corners() {
        let s = fixtures::triangulated_hexagon();
        let (x, y) = (pt(&[0.999, 0.0]), pt(&[-0.999, 0.0]));
        let c = connect(&s, &x, &y, 1e-2, 1e-10, 0).unwrap();
        assert_eq!(c.verdict, ConnectVerdict::GeodesicInC);
        assert!(c.ell_gap() < 2e-2);
        assert!(c.min_sample_margin >= -1e-9);
        assert!(c.geodesic_samples.iter().all(|p| p.coords()[1].abs() < 1e-12));
    }

    #[test]
    fn arc_shorter_than_pi() {
        let s = fixtures::equator_arc(2.8);
        let (x, y) = (fixtures::equator_point(0.0), fixtures::equator_point(2.8));
        let c = connect(&s, &x, &y, 1e-2, 1e-10, 0).unwrap();
        assert_eq!(c.verdict, ConnectVerdict::GeodesicInC);
        assert!((c.distance - 2.8).abs() < 1e-12);
        assert!(c.geodesic_samples.iter().all(|p| p.coords()[2].abs() < 1e-12));
    }

    #[test]
    fn long_arc_violates_length_hypothesis() {
        let s = fixtures::long_arc(0.1);
        let (x, y) = fixtures::long_arc_ends(0.1);
        let c = connect(&s, &x, &y, 1e-2, 1e-10, 0).unwrap();
        assert_eq!(c.verdict, ConnectVerdict::LengthHypothesisViolated);
        assert!(c.ell >= std::f64::consts::PI);
    }

    #[test]
    fn l_shape_yields_a_witness() {
        let s = fixtures::l_shape();
        let (x, y) = (pt(&[1.9, 0.9]), pt(&[0.9, 1.9]));
        let c = connect(&s, &x, &y, 1e-2, 1e-10, 0).unwrap();
        assert_eq!(c.verdict, ConnectVerdict::LocalConvexityViolated);
        let w = c.witness.unwrap();
        assert!(w.margin < -s.membership_tol());
        assert!(s.contains(&w.q1).unwrap().inside && s.contains(&w.q2).unwrap().inside);
    }
}
