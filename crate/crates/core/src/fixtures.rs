//! Reference scenes used by the test suites, the CLI examples and the
//! shipped scene files.

use std::f64::consts::{PI, TAU};

use crate::convex_scenes::{ConvexCell, HalfSpace, Scene, DEFAULT_MEMBERSHIP_TOL};
use crate::model_spaces::{ModelPoint, ModelSpace};

fn hs(normal: Vec<f64>, offset: f64) -> HalfSpace {
    HalfSpace::new(normal, offset).expect("fixture half-spaces are valid")
}

fn scene(kappa: f64, dim: usize, cells: Vec<ConvexCell>) -> Scene {
    let space = ModelSpace::new(kappa, dim).expect("fixture spaces are valid");
    Scene::new(space, cells, DEFAULT_MEMBERSHIP_TOL, None).expect("fixture scenes are valid")
}

/// Flat convex polygon from counter-clockwise vertices.
pub fn polygon_cell(vertices: &[[f64; 2]]) -> ConvexCell {
    let n = vertices.len();
    let halfspaces = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let normal = vec![a[1] - b[1], b[0] - a[0]];
            let offset = normal[0] * a[0] + normal[1] * a[1];
            hs(normal, offset)
        })
        .collect();
    ConvexCell::new(halfspaces)
}

pub fn rect_cell(x0: f64, x1: f64, y0: f64, y1: f64) -> ConvexCell {
    polygon_cell(&[[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
}

/// Arc `[from, to]` of the equator `z = 0` of the unit sphere, `to - from <= pi`.
pub fn equator_arc_cell(from: f64, to: f64) -> ConvexCell {
    ConvexCell::new(vec![
        hs(vec![0.0, 0.0, 1.0], 0.0),
        hs(vec![0.0, 0.0, -1.0], 0.0),
        hs(vec![-from.sin(), from.cos(), 0.0], 0.0),
        hs(vec![to.sin(), -to.cos(), 0.0], 0.0),
    ])
}

pub fn equator_point(angle: f64) -> ModelPoint {
    ModelPoint::from_coords(vec![angle.cos(), angle.sin(), 0.0])
}

/// Regular hexagon of circumradius 1 split into six triangles around the
/// origin.
pub fn triangulated_hexagon() -> Scene {
    let v = |k: usize| {
        let t = TAU * k as f64 / 6.0;
        [t.cos(), t.sin()]
    };
    let cells = (0..6).map(|k| polygon_cell(&[[0.0, 0.0], v(k), v(k + 1)])).collect();
    scene(0.0, 2, cells)
}

/// Unit square as a single cell.
pub fn unit_square() -> Scene {
    scene(0.0, 2, vec![rect_cell(0.0, 1.0, 0.0, 1.0)])
}

/// Rectangle `[0, 2] x [0, 1]` glued from two unit squares.
pub fn two_squares() -> Scene {
    scene(0.0, 2, vec![rect_cell(0.0, 1.0, 0.0, 1.0), rect_cell(1.0, 2.0, 0.0, 1.0)])
}

/// Union of `[0, 2] x [0, 1]` and `[0, 1] x [0, 2]`; reflex corner at `(1, 1)`.
pub fn l_shape() -> Scene {
    scene(0.0, 2, vec![rect_cell(0.0, 2.0, 0.0, 1.0), rect_cell(0.0, 1.0, 0.0, 2.0)])
}

pub const DISK_SIDES: usize = 96;
pub const DISK_SEPARATION: f64 = 1.2;

/// Two overlapping unit disks (inscribed regular polygons) centered at
/// `(0, 0)` and `(DISK_SEPARATION, 0)`.
pub fn two_disks() -> Scene {
    let disk = |cx: f64| {
        let vs: Vec<[f64; 2]> = (0..DISK_SIDES)
            .map(|k| {
                let t = TAU * (k as f64 + 0.5) / DISK_SIDES as f64;
                [cx + t.cos(), t.sin()]
            })
            .collect();
        polygon_cell(&vs)
    };
    scene(0.0, 2, vec![disk(0.0), disk(DISK_SEPARATION)])
}

/// A member point next to the upper lens corner of [`two_disks`].
pub fn lens_corner() -> ModelPoint {
    let x = DISK_SEPARATION / 2.0;
    let inradius = (PI / DISK_SIDES as f64).cos();
    let y = (inradius * inradius - x * x).sqrt() - 1e-3;
    ModelPoint::from_coords(vec![x, y])
}

/// Single spherical cap of angular radius `radius` around the north pole.
pub fn spherical_cap(radius: f64) -> Scene {
    scene(1.0, 2, vec![ConvexCell::new(vec![hs(vec![0.0, 0.0, 1.0], radius.cos())])])
}

/// Cap of angular radius 1 around the north pole, cut into four quadrant
/// wedges by the planes `x = 0` and `y = 0`.
pub fn glued_caps() -> Scene {
    let cap = hs(vec![0.0, 0.0, 1.0], 1.0f64.cos());
    let cells = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|&(sx, sy)| {
            ConvexCell::new(vec![
                cap.clone(),
                hs(vec![sx, 0.0, 0.0], 0.0),
                hs(vec![0.0, sy, 0.0], 0.0),
            ])
        })
        .collect();
    scene(1.0, 2, cells)
}

/// Hyperbolic disk of radius 1.2 around the base point of the hyperboloid,
/// cut into half-disks and quarter-disks by the planes `x = 0`, `y = 0`.
pub fn glued_hyperbolic() -> Scene {
    let ball = hs(vec![0.0, 0.0, -1.0], -(1.2f64).cosh());
    let cells = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|&(sx, sy)| {
            ConvexCell::new(vec![
                ball.clone(),
                hs(vec![sx, 0.0, 0.0], 0.0),
                hs(vec![0.0, sy, 0.0], 0.0),
            ])
        })
        .collect();
    scene(-1.0, 2, cells)
}

/// The spherical octant triangle `x, y, z >= 0`.
pub fn octant_triangle() -> Scene {
    let cells = vec![ConvexCell::new(
        (0..3)
            .map(|i| {
                let mut n = vec![0.0; 3];
                n[i] = 1.0;
                hs(n, 0.0)
            })
            .collect(),
    )];
    scene(1.0, 2, cells)
}

/// The whole equator, covered by three overlapping arcs.
pub fn great_circle() -> Scene {
    let cells = (0..3)
        .map(|k| {
            let start = TAU * k as f64 / 3.0;
            equator_arc_cell(start - 0.1, start + TAU / 3.0 + 0.1)
        })
        .collect();
    scene(1.0, 2, cells)
}

/// Equator arc of length `pi + extra` centered at angle 0, glued from two
/// overlapping arcs shorter than `pi`.
pub fn long_arc(extra: f64) -> Scene {
    let half = (PI + extra) / 2.0;
    scene(1.0, 2, vec![equator_arc_cell(-half, 0.2), equator_arc_cell(-0.2, half)])
}

/// Endpoints of [`long_arc`].
pub fn long_arc_ends(extra: f64) -> (ModelPoint, ModelPoint) {
    let half = (PI + extra) / 2.0;
    (equator_point(-half), equator_point(half))
}

/// Equator arc `[0, length]` glued from two pieces, `length < 2 pi`.
pub fn equator_arc(length: f64) -> Scene {
    let cut = length / 2.0;
    scene(1.0, 2, vec![equator_arc_cell(0.0, cut + 0.1), equator_arc_cell(cut - 0.1, length)])
}

/// Named fixtures, as shipped in the `scenes/` directory.
pub fn named() -> Vec<(&'static str, Scene)> {
    vec![
        ("hexagon", triangulated_hexagon()),
        ("unit_square", unit_square()),
        ("two_squares", two_squares()),
        ("l_shape", l_shape()),
        ("two_disks", two_disks()),
        ("spherical_cap", spherical_cap(1.0)),
        ("glued_caps", glued_caps()),
        ("glued_hyperbolic", glued_hyperbolic()),
        ("octant_triangle", octant_triangle()),
        ("great_circle", great_circle()),
        ("arc_pi_plus", long_arc(0.1)),
    ]
}
