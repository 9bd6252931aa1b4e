use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::connect::{ConnectVerdict, Connector};
use crate::convex_scenes::Scene;
use crate::error::Result;
use crate::model_spaces::ModelPoint;

pub const COMPARISON_SLACK: f64 = 1e-8;
/// Point pairs per triangle corner.
const PAIRS_PER_CORNER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonViolation {
    pub triangle: [ModelPoint; 3],
    pub p: ModelPoint,
    pub q: ModelPoint,
    pub distance: f64,
    pub comparison: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub triangles: usize,
    pub comparisons: usize,
    /// Triangles dropped because a side could not be certified.
    pub uncertified: usize,
    /// Largest `d(p, q) - comparison`; at most zero up to rounding when
    /// all comparisons hold.
    pub max_excess: f64,
    pub violations: Vec<ComparisonViolation>,
    pub passed: bool,
}

/// Samples triangles of perimeter `< 2 D_k`, certifies their sides and
/// compares distances between side points with the model triangle.
pub fn cat_check_intrinsic(scene: &Scene, n_triangles: usize, resolution: f64, seed: u64) -> Result<ComparisonReport> {
    let space = scene.space();
    let bound = space.diameter_bound();
    let connector = Connector::new(scene, resolution, 1e-10, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let pool = scene.sample_points_with(3 * n_triangles.max(1), &mut rng);
    let mut report = ComparisonReport {
        triangles: 0,
        comparisons: 0,
        uncertified: 0,
        max_excess: f64::NEG_INFINITY,
        violations: Vec::new(),
        passed: true,
    };
    if pool.is_empty() {
        return Ok(report);
    }
    let mut attempts = 0;
    while report.triangles < n_triangles && attempts < 10 * n_triangles.max(1) {
        attempts += 1;
        let tri = [0; 3].map(|_| pool[rng.gen_range(0..pool.len())].clone());
        let sides = [(1, 2), (0, 2), (0, 1)].map(|(i, j)| space.dist(&tri[i], &tri[j]));
        // Sides within a resolution of D_k fall under the limit rule; skip them.
        if sides.iter().sum::<f64>() >= 2.0 * bound * (1.0 - 1e-9) || sides.iter().any(|&s| s >= bound - resolution) {
            continue;
        }
        let mut certified = true;
        for (i, j) in [(1, 2), (0, 2), (0, 1)] {
            if connector.connect(&tri[i], &tri[j])?.verdict != ConnectVerdict::GeodesicInC {
                certified = false;
                break;
            }
        }
        if !certified {
            report.uncertified += 1;
            report.passed = false;
            continue;
        }
        report.triangles += 1;
        for corner in 0..3 {
            let (o, u, v) = (&tri[corner], &tri[(corner + 1) % 3], &tri[(corner + 2) % 3]);
            let (c, b, a) = (space.dist(o, u), space.dist(o, v), space.dist(u, v));
            for _ in 0..PAIRS_PER_CORNER {
                let (s, t): (f64, f64) = (rng.gen(), rng.gen());
                let p = space.geodesic_point(o, u, s)?;
                let q = space.geodesic_point(o, v, t)?;
                let comparison = space.comparison_point_distance(a, b, c, s * c, t * b)?;
                let distance = space.dist(&p, &q);
                report.comparisons += 1;
                report.max_excess = report.max_excess.max(distance - comparison);
                if distance > comparison + COMPARISON_SLACK {
                    report.passed = false;
                    report.violations.push(ComparisonViolation {
                        triangle: tri.clone(),
                        p,
                        q,
                        distance,
                        comparison,
                    });
                }
            }
        }
    }
    Ok(report)
}
