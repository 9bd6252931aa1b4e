//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, PI};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use catkappa::convex_scenes::{LengthPath, Scene};
use catkappa::fixtures;
use catkappa::local_global::{
    build_schedule, cat_check_intrinsic, convexity_verdict, curve_shortening, midpoint_iteration, ConnectVerdict, Connector, IterationTrace, Verdict,
};
use catkappa::model_spaces::{ModelPoint, ModelSpace};
use catkappa::spherical_trig::{contraction_constant, half_midpoint_distance, max_sampled_ratio};

const RES: f64 = 1e-2;
const TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------- unit-sphere oracle ----------

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn cross(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

fn norm(u: &[f64; 3]) -> f64 {
    dot(u, u).sqrt()
}

fn sphere_dist(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    norm(&cross(u, v)).atan2(dot(u, v))
}

fn sphere_mid(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    let s = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
    let n = norm(&s);
    [s[0] / n, s[1] / n, s[2] / n]
}

/// Triangle on the unit sphere with sides `a = d(x,y)` and `b = d(x,z)`
/// at the north pole `x` and angle `theta` there. Returns the third side
/// and the distance of the midpoints of `xy` and `xz`.
fn embedded_triangle(a: f64, b: f64, theta: f64) -> (f64, f64) {
    let x = [0.0, 0.0, 1.0];
    let y = [a.sin(), 0.0, a.cos()];
    let z = [b.sin() * theta.cos(), b.sin() * theta.sin(), b.cos()];
    (sphere_dist(&y, &z), sphere_dist(&sphere_mid(&x, &y), &sphere_mid(&x, &z)))
}

const SIDE_BOUNDS: [f64; 4] = [0.5, 1.0, FRAC_PI_2, 1.9];

/// Seeded triangles with both sides at the vertex at most `cap`.
fn seeded_triangles(cap: f64, n: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (a, b) = (rng.gen_range(1e-6..=cap), rng.gen_range(1e-6..=cap));
            let (c, cp) = embedded_triangle(a, b, rng.gen_range(0.0..=PI));
            (a, b, c, cp)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for (k, &cap) in SIDE_BOUNDS.iter().enumerate() {
        for (a, b, c, oracle) in seeded_triangles(cap, 10_000, 100 + k as u64) {
            match half_midpoint_distance(a, b, c) {
                Ok(v) => worst = worst.max((v - oracle).abs()),
                Err(_) => errors += 1,
            }
        }
    }
    let octant = (half_midpoint_distance(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap() - FRAC_PI_3).abs();
    outcome(
        worst <= 1e-9 && errors == 0 && octant <= 1e-12,
        format!("max |c' - oracle| = {worst:.2e} over 4 x 10^4 triangles, {errors} errors, octant error {octant:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst_excess = f64::NEG_INFINITY;
    for (k, &cap) in SIDE_BOUNDS.iter().enumerate() {
        let kc = contraction_constant(cap).unwrap();
        for (_, _, c, cp) in seeded_triangles(cap, 10_000, 100 + k as u64) {
            worst_excess = worst_excess.max(cp - kc * c);
        }
    }
    let k_half_pi = (contraction_constant(FRAC_PI_2).unwrap() - FRAC_1_SQRT_2).abs();
    let mut grid_excess = f64::NEG_INFINITY;
    for &cap in &SIDE_BOUNDS {
        let r = max_sampled_ratio(cap, 40).unwrap();
        grid_excess = grid_excess.max(r.ratio - contraction_constant(cap).unwrap());
    }
    let limit = 2.0 * PI / 3.0 - 1e-3;
    let below_one = (0..=200).all(|i| contraction_constant(1e-3 + (limit - 1e-3) * i as f64 / 200.0).unwrap() < 1.0);
    outcome(
        worst_excess <= 1e-10 && k_half_pi <= 1e-12 && grid_excess <= 1e-9 && below_one,
        format!(
            "max c' - K c = {worst_excess:.2e}, |K(pi/2) - 1/sqrt2| = {k_half_pi:.1e}, \
             max grid ratio - K = {grid_excess:.2e}, K < 1 up to 2pi/3 - 1e-3: {below_one}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_rise = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let a = rng.gen_range(0.01..2.0 * PI / 3.0);
        let c = rng.gen_range(0.001..(2.0 * a).min(PI - 1e-3).min(2.0 * PI - 2.0 * a));
        // b ranges over [|a - c|, a]; beta = cos(b/2) increases as b decreases.
        let lo = (a - c).abs().max(1e-9);
        let mut prev = f64::INFINITY;
        for k in 0..100 {
            let b = a - (a - lo) * k as f64 / 99.0;
            let cp = half_midpoint_distance(a, b, c).unwrap_or_else(|e| panic!("{a} {b} {c}: {e}"));
            if prev.is_finite() {
                worst_rise = worst_rise.max(cp - prev);
            }
            prev = cp;
        }
    }
    outcome(
        worst_rise <= 1e-10,
        format!("largest increase of c' along increasing beta: {worst_rise:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (kappa, side_bound, k) in [
        // (2/3)(D + delta/2) with D = 2.
        (1.0, 2.0 / 3.0 * (2.0 + (PI - 2.0) / 2.0), None),
        (0.0, 5.0, Some(0.5)),
        (-1.0, 5.0, Some(0.5)),
    ] {
        let space = ModelSpace::new(kappa, 2).unwrap();
        let k = k.unwrap_or_else(|| 1.0 / (2.0 * (side_bound / 2.0).cos()));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = space.base_point();
        let mut worst_excess = f64::NEG_INFINITY;
        let mut worst_equality: f64 = 0.0;
        let mut n = 0;
        while n < 10_000 {
            let sides = [rng.gen_range(0.0..=side_bound), rng.gen_range(0.0..=side_bound)];
            let angles = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
            let [y, z] = [0, 1].map(|i| {
                let th = sides[i] * space.radius().recip();
                let (s, c) = (angles[i].sin(), angles[i].cos());
                match kappa {
                    k if k > 0.0 => vec![th.cos(), th.sin() * c, th.sin() * s],
                    k if k < 0.0 => vec![th.sinh() * c, th.sinh() * s, th.cosh()],
                    _ => vec![sides[i] * c, sides[i] * s],
                }
            });
            let (y, z) = (space.point(y).unwrap(), space.point(z).unwrap());
            let a = space.distance(&y, &z).unwrap();
            if a > side_bound {
                continue;
            }
            n += 1;
            let my = space.midpoint(&x, &y).unwrap();
            let mz = space.midpoint(&x, &z).unwrap();
            let d = space.distance(&my, &mz).unwrap();
            worst_excess = worst_excess.max(d - k * a);
            worst_equality = worst_equality.max((d - 0.5 * a).abs());
        }
        pass &= worst_excess <= 1e-10;
        if kappa == 0.0 {
            pass &= worst_equality <= 1e-12;
            lines.push(format!("k=0: excess {worst_excess:.1e}, equality error {worst_equality:.1e}"));
        } else {
            lines.push(format!("k={kappa}: K = {k:.4}, excess {worst_excess:.1e}"));
        }
    }
    outcome(pass, lines.join("; "))
}

fn pairs(scene: &Scene, n: usize, seed: u64) -> Vec<(ModelPoint, ModelPoint)> {
    scene
        .sample_points(2 * n, seed)
        .chunks_exact(2)
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect()
}

/// Member within `r` of `p`, on the geodesic towards another member.
fn nudge(scene: &Scene, p: &ModelPoint, towards: &ModelPoint, r: f64) -> ModelPoint {
    let d = scene.space().distance(p, towards).unwrap();
    if d <= r {
        return towards.clone();
    }
    scene.space().geodesic_point(p, towards, r / d).unwrap()
}

fn criterion_5() -> Outcome {
    let mut traces: Vec<IterationTrace> = Vec::new();
    for scene in [fixtures::spherical_cap(1.0), fixtures::triangulated_hexagon()] {
        let conn = Connector::new(&scene, RES, TOL, 5).unwrap();
        for (x, y) in pairs(&scene, 20, 5) {
            traces.extend(conn.connect(&x, &y).unwrap().traces);
        }
        // Direct runs with both ends moved by up to eps_d.
        let pts = scene.sample_points(200, 55);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for w in pts.chunks_exact(4) {
            let d = scene.space().distance(&w[0], &w[1]).unwrap();
            if d < 0.2 {
                continue;
            }
            let sch = build_schedule(scene.space(), d, 0.2).unwrap();
            let lvl = sch.last();
            let x_bar = nudge(&scene, &w[0], &w[2], rng.gen_range(0.0..=lvl.eps_d));
            let y_bar = nudge(&scene, &w[1], &w[3], rng.gen_range(0.0..=lvl.eps_d));
            let t = midpoint_iteration(&scene, &x_bar, &y_bar, &w[0], &w[1], lvl, sch.contraction, TOL, 10_000);
            traces.push(t.unwrap());
        }
    }
    let converged: Vec<&IterationTrace> = traces.iter().filter(|t| t.converged).collect();
    let decay = converged.iter().filter(|t| t.decay_holds(1e-10)).count();
    let fast = converged.iter().filter(|t| t.steps <= t.step_budget(TOL) + 2).count();
    outcome(
        converged.len() == traces.len() && decay == converged.len() && fast == converged.len(),
        format!(
            "{} of {} traces converged: decay bound held in {decay}, step budget met in {fast}",
            converged.len(),
            traces.len()
        ),
    )
}

/// Point at parameter `t` of the geodesic from `x` to `y`, written out per
/// geometry with an orthonormal tangent frame.
fn oracle_point(kappa: f64, x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    if kappa == 0.0 {
        return x.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect();
    }
    let n = x.len() - 1;
    let form = |u: &[f64], v: &[f64]| -> f64 {
        let s: f64 = u.iter().zip(v).take(n).map(|(a, b)| a * b).sum();
        if kappa > 0.0 {
            s + u[n] * v[n]
        } else {
            s - u[n] * v[n]
        }
    };
    let g = form(x, y);
    // Tangent at x towards y: the part of y orthogonal to x in the form.
    let sign = if kappa > 0.0 { -1.0 } else { 1.0 };
    let w: Vec<f64> = x.iter().zip(y).map(|(a, b)| b + sign * g * a).collect();
    let wn = form(&w, &w).max(0.0).sqrt();
    if wn == 0.0 {
        return x.to_vec();
    }
    let d = if kappa > 0.0 { wn.atan2(g) } else { wn.asinh() };
    let s = t * d;
    let (cs, sn) = if kappa > 0.0 { (s.cos(), s.sin()) } else { (s.cosh(), s.sinh()) };
    x.iter().zip(&w).map(|(a, b)| cs * a + sn * b / wn).collect()
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, scene) in [
        ("hexagon", fixtures::triangulated_hexagon()),
        ("glued caps", fixtures::glued_caps()),
        ("glued hyperbolic", fixtures::glued_hyperbolic()),
    ] {
        let conn = Connector::new(&scene, RES, TOL, 6).unwrap();
        let kappa = scene.space().kappa();
        let (mut good, mut min_margin, mut max_dev) = (0, f64::INFINITY, 0.0f64);
        for (x, y) in pairs(&scene, 100, 6) {
            let cert = conn.connect(&x, &y).unwrap();
            if cert.verdict == ConnectVerdict::GeodesicInC {
                good += 1;
            }
            let n = cert.geodesic_samples.len();
            for (k, p) in cert.geodesic_samples.iter().enumerate() {
                min_margin = min_margin.min(scene.margin(p));
                let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
                let o = oracle_point(kappa, x.coords(), y.coords(), t);
                let dev = p.coords().iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                max_dev = max_dev.max(dev);
            }
        }
        pass &= good == 100 && min_margin >= -1e-8 && max_dev <= 1e-8;
        lines.push(format!("{name}: {good}/100 certified, margin {min_margin:.1e}, deviation {max_dev:.1e}"));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_7() -> Outcome {
    let arc = convexity_verdict(&fixtures::long_arc(0.1), 100, RES, TOL, 7).unwrap();
    let circle = convexity_verdict(&fixtures::great_circle(), 100, RES, TOL, 7).unwrap();
    let diam = circle.diameter_estimate.unwrap_or(f64::NAN);
    let pass = arc.verdict == Verdict::DiameterHypothesisFails
        && !arc.pair_checks.is_empty()
        && arc.max_pair_gap() <= 2.0 * RES
        && circle.verdict == Verdict::Convex
        && (diam - PI).abs() <= 2.0 * RES;
    outcome(
        pass,
        format!(
            "arc pi+0.1: {:?} (diam {:.4}), {} pairs with max |l - d| = {:.1e}; great circle: {:?}, diam {diam:.4}",
            arc.verdict,
            arc.diameter_estimate.unwrap_or(f64::NAN),
            arc.pair_checks.len(),
            arc.max_pair_gap(),
            circle.verdict
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, scene) in [("L-shape", fixtures::l_shape()), ("two disks", fixtures::two_disks())] {
        let r = convexity_verdict(&scene, 100, RES, TOL, 8).unwrap();
        let ok = match (&r.verdict, &r.witness) {
            (Verdict::NotLocallyConvex, Some(w)) => {
                let mid = scene.space().midpoint(&w.q1, &w.q2).unwrap();
                let replay = scene.margin(&mid);
                let ends = scene.contains(&w.q1).unwrap().inside && scene.contains(&w.q2).unwrap().inside;
                lines.push(format!("{name}: witness margin {:.2e}", replay));
                ends && replay < -scene.membership_tol()
            }
            _ => {
                lines.push(format!("{name}: {:?} without witness", r.verdict));
                false
            }
        };
        pass &= ok;
    }
    outcome(pass, lines.join("; "))
}

fn convex_fixtures() -> Vec<(&'static str, Scene)> {
    vec![
        ("hexagon", fixtures::triangulated_hexagon()),
        ("unit square", fixtures::unit_square()),
        ("two squares", fixtures::two_squares()),
        ("spherical cap", fixtures::spherical_cap(1.0)),
        ("glued caps", fixtures::glued_caps()),
        ("glued hyperbolic", fixtures::glued_hyperbolic()),
        ("octant", fixtures::octant_triangle()),
        ("great circle", fixtures::great_circle()),
    ]
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, scene) in convex_fixtures() {
        let r = cat_check_intrinsic(&scene, 200, RES, 9).unwrap();
        pass &= r.passed && r.triangles == 200 && r.violations.is_empty();
        lines.push(format!("{name}: {} triangles, {} violations", r.triangles, r.violations.len()));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    let (mut compared, mut detours, mut uncertified) = (0, 0, 0);
    for (_, scene) in convex_fixtures() {
        let conn = Connector::new(&scene, RES, TOL, 10).unwrap();
        let bound = scene.space().diameter_bound();
        let via = scene.sample_points(10, 99);
        for (k, (x, y)) in pairs(&scene, 10, 10).into_iter().enumerate() {
            let cert = conn.connect(&x, &y).unwrap();
            if cert.verdict != ConnectVerdict::GeodesicInC {
                // Pairs beyond the length hypothesis have no geodesic to compare.
                if cert.verdict != ConnectVerdict::LengthHypothesisViolated {
                    uncertified += 1;
                }
                continue;
            }
            let short = curve_shortening(&scene, &cert.curve, 100_000, TOL);
            worst = worst.max((short.length - cert.distance).abs());
            compared += 1;
            // A detour through a third point must shorten to the same length.
            let c = &via[k % via.len()];
            let (first, second) = (conn.connect(&x, c).unwrap(), conn.connect(c, &y).unwrap());
            if first.ell + second.ell >= bound - RES {
                continue;
            }
            let mut vertices = first.curve.vertices.clone();
            vertices.extend(second.curve.vertices.iter().skip(1).cloned());
            let detour = LengthPath::from_vertices(&scene, vertices);
            let short = curve_shortening(&scene, &detour, 100_000, TOL);
            worst = worst.max((short.length - cert.distance).abs());
            detours += 1;
        }
    }
    outcome(
        worst <= 10.0 * TOL && uncertified == 0 && compared > 0,
        format!("{compared} graph curves and {detours} detours, max |shortened - geodesic| = {worst:.2e}"),
    )
}

fn criterion_11() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_catkappa");
    let scenes = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes");
    let run = |args: &[&str]| Command::new(bin).args(args).output().expect("binary runs");
    let mut same = 0;
    let cases: Vec<Vec<String>> = vec![
        vec!["verdict".into(), "--scene".into(), scenes.join("hexagon.json").display().to_string(), "--seed".into(), "11".into(), "--pairs".into(), "20".into()],
        vec!["connect".into(), "--scene".into(), scenes.join("glued_caps.json").display().to_string(), "--seed".into(), "11".into(), "--samples".into(), "2000".into()],
        vec!["cat-check".into(), "--scene".into(), scenes.join("glued_hyperbolic.json").display().to_string(), "--seed".into(), "11".into(), "--triangles".into(), "10".into(), "--samples".into(), "2000".into()],
    ];
    for case in &cases {
        let args: Vec<&str> = case.iter().map(String::as_str).collect();
        let (a, b) = (run(&args), run(&args));
        if a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty() {
            same += 1;
        }
    }
    outcome(same == cases.len(), format!("{same}/{} commands produced byte-identical reports", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("appendix identity vs embedding oracle", criterion_1),
        ("midpoint contraction constant", criterion_2),
        ("monotonicity in beta", criterion_3),
        ("contraction in model spaces", criterion_4),
        ("iteration decay", criterion_5),
        ("geodesics of glued convex fixtures", criterion_6),
        ("arc of length pi+0.1 and great circle", criterion_7),
        ("non-locally-convex fixtures", criterion_8),
        ("intrinsic CAT(k) comparisons", criterion_9),
        ("curve shortening cross-check", criterion_10),
        ("deterministic reports", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {}: {} ({}) [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
