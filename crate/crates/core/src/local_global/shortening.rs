use crate::convex_scenes::{LengthPath, Scene};
use crate::model_spaces::ModelPoint;

/// Whether the geodesic `pq` lies in the scene: by a shared cell, or else by
/// sampling.
fn leg_in_scene(scene: &Scene, p: &ModelPoint, q: &ModelPoint) -> bool {
    if scene.common_cell(p, q).is_some() {
        return true;
    }
    let len = scene.space().dist(p, q);
    if len >= scene.space().diameter_bound() {
        return false;
    }
    let spacing = (len / 64.0).min(1e-2);
    matches!(scene.segment_escape(p, q, spacing), Ok(None))
}

/// Midpoint relaxation: each interior vertex moves to the midpoint of its
/// neighbors when both new legs stay in the scene. Stops after `rounds`
/// sweeps or when a sweep gains less than `tol`.
pub fn curve_shortening(scene: &Scene, path: &LengthPath, rounds: usize, tol: f64) -> LengthPath {
    let space = scene.space();
    let mut v = path.vertices.clone();
    let length = |v: &[ModelPoint]| -> f64 { v.windows(2).map(|w| space.dist(&w[0], &w[1])).sum() };
    let mut current = length(&v);
    for _ in 0..rounds {
        for i in 1..v.len().saturating_sub(1) {
            let (p, q) = (&v[i - 1], &v[i + 1]);
            let Ok(m) = space.midpoint(p, q) else { continue };
            let old = space.dist(p, &v[i]) + space.dist(&v[i], q);
            let new = space.dist(p, &m) + space.dist(&m, q);
            if new < old && scene.is_member(&m) && leg_in_scene(scene, p, &m) && leg_in_scene(scene, &m, q) {
                v[i] = m;
            }
        }
        let next = length(&v);
        let gain = current - next;
        current = next;
        if gain < tol {
            break;
        }
    }
    LengthPath::from_vertices(scene, v)
}
