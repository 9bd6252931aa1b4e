use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::connect::{ConnectCertificate, ConnectVerdict, Connector};
use crate::convex_scenes::{EpsSource, Scene, Witness};
use crate::error::{Error, Result};
use crate::model_spaces::ModelPoint;
use crate::report::extended_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convex,
    DiameterHypothesisFails,
    NotLocallyConvex,
    Inconclusive,
}

/// A pair whose length distance was compared with the ambient distance only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub ell: f64,
    pub distance: f64,
}

impl PairCheck {
    pub fn gap(&self) -> f64 {
        (self.ell - self.distance).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub eps: EpsSource,
    #[serde(serialize_with = "extended_real")]
    pub diameter_bound: f64,
    pub diameter_estimate: Option<f64>,
    pub diameter_witness: Option<(ModelPoint, ModelPoint)>,
    /// Pairs with `ell <= D_k` checked for `ell = d` only.
    pub pair_checks: Vec<PairCheck>,
    pub certificates: Vec<ConnectCertificate>,
    pub witness: Option<Witness>,
}

impl VerdictReport {
    pub fn max_pair_gap(&self) -> f64 {
        self.pair_checks.iter().map(PairCheck::gap).fold(0.0, f64::max)
    }
}

/// Random member pairs; each end is an interior sample or a graph node
/// (cell boundaries and intersections), the latter with odds 3:1.
fn sample_pairs(
    scene: &Scene,
    nodes: &[ModelPoint],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(ModelPoint, ModelPoint)> {
    let interior = scene.sample_points_with(2 * n.max(1), rng);
    if interior.is_empty() {
        return Vec::new();
    }
    let pick = |rng: &mut ChaCha8Rng| {
        if !nodes.is_empty() && rng.gen_bool(0.75) {
            nodes.choose(rng).unwrap().clone()
        } else {
            interior.choose(rng).unwrap().clone()
        }
    };
    (0..n).map(|_| (pick(rng), pick(rng))).collect()
}

pub fn convexity_verdict(
    scene: &Scene,
    pair_samples: usize,
    resolution: f64,
    tol: f64,
    seed: u64,
) -> Result<VerdictReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if scene.components(&mut rng).len() > 1 {
        return Err(Error::Disconnected);
    }
    let connector = Connector::new(scene, resolution, tol, seed)?;
    let bound = scene.space().diameter_bound();
    let mut report = VerdictReport {
        verdict: Verdict::Convex,
        eps: connector.eps(),
        diameter_bound: bound,
        diameter_estimate: None,
        diameter_witness: None,
        pair_checks: Vec::new(),
        certificates: Vec::new(),
        witness: None,
    };
    if bound.is_finite() {
        let (diam, p, q) = connector.graph().diameter()?;
        report.diameter_estimate = Some(diam);
        if diam > bound + 2.0 * resolution {
            report.verdict = Verdict::DiameterHypothesisFails;
            report.diameter_witness = Some((p, q));
            let mut nodes: Vec<ModelPoint> = connector.graph().node_points().cloned().collect();
            nodes.shuffle(&mut rng);
            let mut attempts = 0;
            while report.pair_checks.len() < pair_samples && attempts < 20 * pair_samples.max(1) {
                attempts += 1;
                let (x, y) = (nodes.choose(&mut rng).unwrap(), nodes.choose(&mut rng).unwrap());
                let path = connector.graph().path(x, y)?;
                if path.length <= bound {
                    report.pair_checks.push(PairCheck {
                        x: x.clone(),
                        y: y.clone(),
                        ell: path.length,
                        distance: scene.space().dist(x, y),
                    });
                }
            }
            return Ok(report);
        }
    }
    let nodes: Vec<ModelPoint> = connector.graph().node_points().cloned().collect();
    let mut not_converged = false;
    for (x, y) in sample_pairs(scene, &nodes, pair_samples, &mut rng) {
        let path = connector.graph().path(&x, &y)?;
        // Pairs at length distance D_k: only the limit statement ell = d applies.
        if bound.is_finite() && path.length >= bound - resolution {
            let distance = scene.space().dist(&x, &y);
            report.pair_checks.push(PairCheck { x, y, ell: path.length, distance });
            continue;
        }
        let cert = connector.connect(&x, &y)?;
        match cert.verdict {
            ConnectVerdict::LocalConvexityViolated => {
                report.verdict = Verdict::NotLocallyConvex;
                report.witness = cert.witness.clone();
                report.certificates.push(cert);
                return Ok(report);
            }
            ConnectVerdict::NotConverged | ConnectVerdict::LengthHypothesisViolated => not_converged = true,
            ConnectVerdict::GeodesicInC => {}
        }
        report.certificates.push(cert);
    }
    if not_converged || report.max_pair_gap() > 2.0 * resolution + tol {
        report.verdict = Verdict::Inconclusive;
    }
    Ok(report)
}
