use serde::Serialize;

use super::schedule::ScheduleLevel;
use crate::convex_scenes::{Scene, Witness};
use crate::error::{Error, Result};
use crate::model_spaces::ModelPoint;

/// The sequences `a_n`, `b_n` squeezed between `x_bar` and `y_bar`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub x_bar: ModelPoint,
    pub y_bar: ModelPoint,
    pub x_prime: ModelPoint,
    pub y_prime: ModelPoint,
    pub a_seq: Vec<ModelPoint>,
    pub b_seq: Vec<ModelPoint>,
    pub converged: bool,
    pub steps: usize,
    pub level: ScheduleLevel,
    #[serde(rename = "K")]
    pub contraction: f64,
    /// `max(d(a_n, a_{n+1}), d(b_n, b_{n+1}))` per step.
    pub displacements: Vec<f64>,
    /// Largest `d(x_bar, b_n)` and `d(y_bar, a_n)` seen.
    pub max_far_side: f64,
    /// Distance of the limits from the thirds points of `x_bar y_bar`.
    pub limit_residual: f64,
    /// `d(x_bar, a) + d(a, y_bar)` for the limit `a`.
    pub limit_length: f64,
    pub failure: Option<Witness>,
}

impl IterationTrace {
    pub fn max_residual(&self) -> f64 {
        self.displacements.last().copied().unwrap_or(0.0)
    }

    /// Bound (i): step `n` (from 1) moves by at most `K^n eps_d + slack`.
    pub fn decay_holds(&self, slack: f64) -> bool {
        let mut bound = self.level.eps_d;
        self.displacements.iter().all(|&d| {
            bound *= self.contraction;
            d <= bound + slack
        })
    }

    /// Step budget `ceil(log(tol/eps_d) / log K)`.
    pub fn step_budget(&self, tol: f64) -> usize {
        ((tol / self.level.eps_d).ln() / self.contraction.ln()).ceil().max(0.0) as usize
    }
}

pub fn midpoint_iteration(
    scene: &Scene,
    x_bar: &ModelPoint,
    y_bar: &ModelPoint,
    x_prime: &ModelPoint,
    y_prime: &ModelPoint,
    level: ScheduleLevel,
    contraction: f64,
    tol: f64,
    max_steps: usize,
) -> Result<IterationTrace> {
    let space = scene.space();
    for p in [x_bar, y_bar, x_prime, y_prime] {
        if !scene.contains(p)?.inside {
            return Err(Error::InvalidInput("iteration endpoints must be members of the scene".into()));
        }
    }
    // Truncation error of the stopped iteration, folded into the tolerance.
    let member_tol = scene.membership_tol() + contraction * tol / (1.0 - contraction);
    let mut a = space.geodesic_point(x_prime, y_prime, 1.0 / 3.0)?;
    let mut b = space.geodesic_point(x_prime, y_prime, 2.0 / 3.0)?;
    let mut trace = IterationTrace {
        x_bar: x_bar.clone(),
        y_bar: y_bar.clone(),
        x_prime: x_prime.clone(),
        y_prime: y_prime.clone(),
        a_seq: vec![a.clone()],
        b_seq: vec![b.clone()],
        converged: false,
        steps: 0,
        level,
        contraction,
        displacements: Vec::new(),
        max_far_side: space.dist(x_bar, &b).max(space.dist(y_bar, &a)),
        limit_residual: f64::NAN,
        limit_length: f64::NAN,
        failure: None,
    };
    while trace.steps < max_steps {
        let a_next = space.midpoint(x_bar, &b)?;
        let b_next = space.midpoint(y_bar, &a)?;
        trace.steps += 1;
        for (end, far, mid) in [(x_bar, &b, &a_next), (y_bar, &a, &b_next)] {
            let margin = scene.margin(mid);
            if margin < -member_tol {
                trace.failure = Some(Witness { q1: end.clone(), q2: far.clone(), midpoint: mid.clone(), margin });
            }
        }
        let step = space.dist(&a, &a_next).max(space.dist(&b, &b_next));
        trace.displacements.push(step);
        trace.a_seq.push(a_next.clone());
        trace.b_seq.push(b_next.clone());
        a = a_next;
        b = b_next;
        trace.max_far_side = trace.max_far_side.max(space.dist(x_bar, &b)).max(space.dist(y_bar, &a));
        if trace.failure.is_some() {
            return Ok(trace);
        }
        if step < tol {
            trace.converged = true;
            break;
        }
    }
    if trace.converged {
        let third = space.geodesic_point(x_bar, y_bar, 1.0 / 3.0)?;
        let two_thirds = space.geodesic_point(x_bar, y_bar, 2.0 / 3.0)?;
        trace.limit_residual = space.dist(&a, &third).max(space.dist(&b, &two_thirds));
        trace.limit_length = space.dist(x_bar, &a) + space.dist(&a, y_bar);
    }
    Ok(trace)
}
