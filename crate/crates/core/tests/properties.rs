use proptest::prelude::*;

use catkappa::convex_scenes::{LengthPath, Scene};
use catkappa::fixtures;
use catkappa::local_global::{build_schedule, curve_shortening};
use catkappa::model_spaces::{ModelPoint, ModelSpace};
use catkappa::spherical_trig::{contraction_constant, half_midpoint_distance};

fn space(kappa: f64) -> ModelSpace {
    ModelSpace::new(kappa, 2).unwrap()
}

/// Point of `M_k` given by polar coordinates around the base point.
fn polar(s: &ModelSpace, r: f64, angle: f64) -> ModelPoint {
    let (c, sn) = (angle.cos(), angle.sin());
    let k = s.kappa();
    let coords = if k > 0.0 {
        let rad = s.radius();
        let t = r / rad;
        vec![rad * t.cos(), rad * t.sin() * c, rad * t.sin() * sn]
    } else if k < 0.0 {
        let rad = s.radius();
        let t = r / rad;
        vec![rad * t.sinh() * c, rad * t.sinh() * sn, rad * t.cosh()]
    } else {
        vec![r * c, r * sn]
    };
    s.point(coords).unwrap()
}

fn kappas() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(4.0), Just(0.0), Just(-1.0), Just(-0.25)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_a_metric(k in kappas(), r in proptest::array::uniform3(0.0..1.4f64), a in proptest::array::uniform3(0.0..6.3f64)) {
        let s = space(k);
        let p: Vec<ModelPoint> = (0..3).map(|i| polar(&s, r[i], a[i])).collect();
        let d = |i: usize, j: usize| s.distance(&p[i], &p[j]).unwrap();
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-12);
        prop_assert!(d(0, 0) <= 1e-7);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        prop_assert!(d(0, 1) <= s.diameter_bound());
    }

    #[test]
    fn geodesic_points_split_the_distance(k in kappas(), r in proptest::array::uniform2(0.0..1.4f64), a in proptest::array::uniform2(0.0..6.3f64), t in 0.0..=1.0f64) {
        let s = space(k);
        let (p, q) = (polar(&s, r[0], a[0]), polar(&s, r[1], a[1]));
        let d = s.distance(&p, &q).unwrap();
        let m = s.geodesic_point(&p, &q, t).unwrap();
        prop_assert!(s.check_point(&m).is_ok());
        prop_assert!((s.distance(&p, &m).unwrap() - t * d).abs() <= 1e-9);
        prop_assert!((s.distance(&m, &q).unwrap() - (1.0 - t) * d).abs() <= 1e-9);
    }

    #[test]
    fn model_triangles_realize_comparison_distances(k in kappas(), r in proptest::array::uniform2(0.01..1.4f64), a in 0.0..3.1f64, s_t in proptest::array::uniform2(0.0..=1.0f64)) {
        let sp = space(k);
        let x = sp.base_point();
        let (y, z) = (polar(&sp, r[0], 0.0), polar(&sp, r[1], a));
        let (c, b, side) = (r[0], r[1], sp.distance(&y, &z).unwrap());
        let p = sp.geodesic_point(&x, &y, s_t[0]).unwrap();
        let q = sp.geodesic_point(&x, &z, s_t[1]).unwrap();
        let cmp = sp.comparison_point_distance(side, b, c, s_t[0] * c, s_t[1] * b).unwrap();
        prop_assert!((sp.distance(&p, &q).unwrap() - cmp).abs() <= 1e-8);
    }

    #[test]
    fn spherical_midpoints_contract(a in 0.01..2.0f64, b in 0.01..2.0f64, theta in 0.0..3.14f64) {
        let s = space(1.0);
        let (y, z) = (polar(&s, a, 0.0), polar(&s, b, theta));
        let c = s.distance(&y, &z).unwrap();
        let cp = half_midpoint_distance(a, b, c).unwrap();
        let k = contraction_constant(a.max(b)).unwrap();
        prop_assert!(cp <= k * c + 1e-10);
        let x = s.base_point();
        let direct = s.distance(&s.midpoint(&x, &y).unwrap(), &s.midpoint(&x, &z).unwrap()).unwrap();
        prop_assert!((direct - cp).abs() <= 1e-9);
    }

    #[test]
    fn schedules_follow_the_recurrence(k in kappas(), frac in 0.05..0.95f64, eps_frac in 0.01..0.45f64) {
        let s = space(k);
        let bound = if s.diameter_bound().is_finite() { s.diameter_bound() } else { 10.0 };
        let (target, base) = (frac * bound, eps_frac * bound.min(4.0));
        let sch = build_schedule(&s, target, base).unwrap();
        prop_assert_eq!(sch.levels[0].eps_d, base / 2.0);
        prop_assert!(sch.levels[0].d <= base / 2.0);
        for w in sch.levels.windows(2) {
            prop_assert_eq!(w[1].d, (1.5 * w[0].d).min(target));
            prop_assert_eq!(w[1].eps_d, (1.0 - sch.contraction) * w[0].eps_d.min(sch.delta / 3.0));
            prop_assert!(w[1].eps_d > 0.0 && w[1].eps_d <= base / 2.0);
        }
        prop_assert_eq!(sch.last().d, target);
        let expected = ((2.0 * target / base).ln() / 1.5f64.ln()).ceil().max(0.0) as usize;
        prop_assert!((sch.levels.len() - 1).abs_diff(expected) <= 1);
    }

    #[test]
    fn shortening_never_lengthens(pts in proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 2..8)) {
        let scene = fixtures::unit_square();
        let vs: Vec<ModelPoint> = pts.iter().map(|&(x, y)| ModelPoint::from_coords(vec![x, y])).collect();
        let path = LengthPath::from_vertices(&scene, vs);
        let out = curve_shortening(&scene, &path, 50, 1e-12);
        prop_assert!(out.length <= path.length + 1e-12);
        prop_assert_eq!(out.vertices.first(), path.vertices.first());
        prop_assert_eq!(out.vertices.last(), path.vertices.last());
    }

    #[test]
    fn adding_cells_keeps_members(x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let mut scene = fixtures::unit_square();
        let p = ModelPoint::from_coords(vec![x, y]);
        let before = scene.contains(&p).unwrap().inside;
        scene.add_cell(fixtures::rect_cell(-1.0, 0.0, -1.0, 0.0));
        prop_assert!(!before || scene.contains(&p).unwrap().inside);
    }
}

#[test]
fn scene_files_round_trip() {
    for (_, scene) in fixtures::named() {
        let text = serde_json::to_string(&scene.to_file()).unwrap();
        assert_eq!(Scene::from_json(&text).unwrap(), scene);
    }
}
