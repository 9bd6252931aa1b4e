//! Midpoint distances in triangles on the unit sphere.
//!
//! Sides are named after the contraction estimate: the two sides through the
//! vertex `x` have lengths `a` and `b`, and `c` joins their far ends. With
//! `alpha = cos(a/2)` and
//! `beta = cos(b/2)`, the distance `c'` between the midpoints of the two sides
//! through `x` satisfies
//!
//! ```text
//! alpha * beta * cos(c') = (cos(c) - 1 + 2 (alpha^2 + beta^2)) / 4
//! ```
//!
//! which rearranges into the half-angle pair
//!
//! ```text
//! 4 alpha beta sin^2(c'/2) = sin^2(c/2) - (alpha - beta)^2
//! 4 alpha beta cos^2(c'/2) = (alpha + beta)^2 - sin^2(c/2)
//! ```
//!
//! used for evaluation because it keeps relative precision for short `c`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Excursions of an inverse-trig argument beyond `[-1, 1]` up to this size
/// are treated as rounding and clamped.
pub const DOMAIN_CLAMP: f64 = 1e-9;

const SIDE_SLACK: f64 = 1e-12;

/// Side lengths, vertex angle and midpoint data of one spherical triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalTriangleData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Angle at the vertex shared by the sides `a` and `b`.
    pub theta: f64,
    /// Distance between the midpoints of the sides `a` and `b`.
    pub c_prime: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SphericalTriangleData {
    pub fn from_sides(a: f64, b: f64, c: f64) -> Result<Self> {
        check_triangle(a, b, c)?;
        Ok(Self {
            a,
            b,
            c,
            theta: vertex_angle(a, b, c),
            c_prime: half_midpoint_distance(a, b, c)?,
            alpha: (a / 2.0).cos(),
            beta: (b / 2.0).cos(),
        })
    }

    /// `cos c - (cos a cos b + sin a sin b cos theta)`.
    pub fn law_of_cosines_residual(&self) -> f64 {
        let rhs = self.a.cos() * self.b.cos() + self.a.sin() * self.b.sin() * self.theta.cos();
        self.c.cos() - rhs
    }

    /// Residual of the midpoint identity in its product form.
    pub fn identity_residual(&self) -> f64 {
        let (al, be) = (self.alpha, self.beta);
        let lhs = al * be * self.c_prime.cos();
        let rhs = 0.25 * (self.c.cos() - 1.0 + 2.0 * (al * al + be * be));
        lhs - rhs
    }
}

fn check_triangle(a: f64, b: f64, c: f64) -> Result<()> {
    for (name, x) in [("a", a), ("b", b), ("c", c)] {
        if !x.is_finite() || !(0.0..PI).contains(&x) {
            return Err(Error::InvalidTriangle(format!("side {name} = {x} outside [0, pi)")));
        }
    }
    let slack = SIDE_SLACK * (a + b + c).max(1.0);
    if a > b + c + slack || b > a + c + slack || c > a + b + slack {
        return Err(Error::InvalidTriangle(format!(
            "({a}, {b}, {c}) violates the triangle inequality"
        )));
    }
    if a + b + c > 2.0 * PI + slack {
        return Err(Error::InvalidTriangle(format!("perimeter {} exceeds 2 pi", a + b + c)));
    }
    Ok(())
}

/// Angle between the sides `a` and `b`, by the half-angle law of cosines.
fn vertex_angle(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let s2 = ((c - a + b) / 2.0).sin() * ((c + a - b) / 2.0).sin();
    let c2 = ((a + b + c) / 2.0).sin() * ((a + b - c) / 2.0).sin();
    2.0 * s2.max(0.0).sqrt().atan2(c2.max(0.0).sqrt())
}

/// Distance `c'` between the midpoints of the sides `a` and `b` of a
/// triangle on the unit sphere whose third side is `c`.
pub fn half_midpoint_distance(a: f64, b: f64, c: f64) -> Result<f64> {
    check_triangle(a, b, c)?;
    let alpha = (a / 2.0).cos();
    let beta = (b / 2.0).cos();
    let diff = -2.0 * ((a + b) / 4.0).sin() * ((a - b) / 4.0).sin();
    let sum = alpha + beta;
    let half_c = (c / 2.0).sin().powi(2);
    let denom = 4.0 * alpha * beta;
    let s2 = (half_c - diff * diff) / denom;
    let c2 = (sum * sum - half_c) / denom;
    if s2 < -DOMAIN_CLAMP || c2 < -DOMAIN_CLAMP {
        return Err(Error::NumericalDomain(format!(
            "sin^2(c'/2) = {s2} outside [0, 1] for sides ({a}, {b}, {c})"
        )));
    }
    Ok(2.0 * s2.max(0.0).sqrt().atan2(c2.max(0.0).sqrt()))
}

/// Closed form for `a = b`: `sin(c'/2) = sin(c/2) / (2 cos(a/2))`.
pub fn equal_sides_half_midpoint(a: f64, c: f64) -> Result<f64> {
    if !(0.0..PI).contains(&a) || !(0.0..=PI).contains(&c) || c > 2.0 * a + SIDE_SLACK {
        return Err(Error::InvalidTriangle(format!(
            "isoceles data (a = {a}, c = {c}) needs a < pi and c <= min(2a, pi)"
        )));
    }
    let arg = (c / 2.0).sin() / (2.0 * (a / 2.0).cos());
    if arg > 1.0 + DOMAIN_CLAMP {
        return Err(Error::NumericalDomain(format!("arcsin argument {arg} exceeds 1")));
    }
    Ok(2.0 * arg.min(1.0).asin())
}

/// Contraction factor `K(C) = 1 / (2 cos(C/2))` for triangles whose two
/// sides through the shared vertex are at most `C < 2 pi / 3`.
///
/// For `a = b` the closed form gives `sin(c'/2) = lambda sin(c/2)` with
/// `lambda <= K(C) <= 1`, and convexity of `arcsin` on `[0, 1]` turns this
/// into `c' <= K(C) c`. Unequal sides only shrink `c'` (see
/// [`monotonicity_sign`]).
pub fn contraction_constant(side_bound: f64) -> Result<f64> {
    if !(side_bound > 0.0 && side_bound < 2.0 * PI / 3.0) {
        return Err(Error::OutOfRange(format!(
            "side bound {side_bound} must lie in (0, 2 pi / 3)"
        )));
    }
    Ok(1.0 / (2.0 * (side_bound / 2.0).cos()))
}

/// `alpha cos(c') - beta`, whose sign is the sign of `dc'/dbeta` when `a`
/// and `c` are held fixed. Nonpositive whenever `b <= a`.
pub fn monotonicity_sign(a: f64, b: f64, c: f64) -> Result<f64> {
    let cp = half_midpoint_distance(a, b, c)?;
    Ok((a / 2.0).cos() * cp.cos() - (b / 2.0).cos())
}

/// Largest sampled ratio `c'/c` on a grid of valid triangles with
/// `a, b <= side_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioMaximum {
    pub ratio: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn max_sampled_ratio(side_bound: f64, steps: usize) -> Result<RatioMaximum> {
    if !(side_bound > 0.0 && side_bound < PI) || steps == 0 {
        return Err(Error::OutOfRange(format!(
            "side bound {side_bound} must lie in (0, pi) and steps must be positive"
        )));
    }
    let mut best = RatioMaximum { ratio: 0.0, a: 0.0, b: 0.0, c: 0.0 };
    for i in 1..=steps {
        let a = side_bound * i as f64 / steps as f64;
        for j in 1..=i {
            let b = side_bound * j as f64 / steps as f64;
            let lo = (a - b).abs();
            let hi = (a + b).min(2.0 * PI - a - b).min(PI * (1.0 - 1e-12));
            // Short third sides approach the supremum; include one explicitly.
            let cs = std::iter::once(lo + 1e-7 * (hi - lo))
                .chain((1..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64));
            for c in cs {
                if c <= 0.0 {
                    continue;
                }
                let cp = half_midpoint_distance(a, b, c)?;
                if cp / c > best.ratio {
                    best = RatioMaximum { ratio: cp / c, a, b, c };
                }
            }
        }
    }
    Ok(best)
}
