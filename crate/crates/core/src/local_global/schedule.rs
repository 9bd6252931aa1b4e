use serde::Serialize;

use crate::error::{Error, Result};
use crate::model_spaces::{Geometry, ModelSpace};
use crate::report::extended_real;
use crate::spherical_trig::contraction_constant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleLevel {
    pub d: f64,
    pub eps_d: f64,
}

/// Radii `eps_d` for growing distances `d` up to a target `D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonSchedule {
    #[serde(rename = "D")]
    pub target: f64,
    #[serde(serialize_with = "extended_real")]
    pub delta: f64,
    #[serde(rename = "K")]
    pub contraction: f64,
    pub base_eps: f64,
    pub levels: Vec<ScheduleLevel>,
}

impl EpsilonSchedule {
    pub fn last(&self) -> ScheduleLevel {
        *self.levels.last().expect("schedules have at least one level")
    }

    /// Bound on the sides of the triangles met by the iteration:
    /// `(2/3)(D + delta/2)`, infinite when `delta` is.
    pub fn side_bound(&self) -> f64 {
        2.0 / 3.0 * (self.target + self.delta / 2.0)
    }
}

/// Midpoint contraction constant for distances up to `target`.
pub fn contraction_for(space: &ModelSpace, target: f64) -> Result<f64> {
    match space.geometry() {
        Geometry::Spherical => {
            let delta = space.diameter_bound() - target;
            contraction_constant(2.0 / 3.0 * (target + delta / 2.0) * space.kappa().sqrt())
        }
        _ => Ok(0.5),
    }
}

pub fn build_schedule(space: &ModelSpace, target: f64, base_eps: f64) -> Result<EpsilonSchedule> {
    let bound = space.diameter_bound();
    if !(target < bound) {
        return Err(Error::Hypothesis(format!("target distance {target} is not below D_kappa = {bound}")));
    }
    if !(target > 0.0) {
        return Err(Error::InvalidInput(format!("target distance {target} must be positive")));
    }
    if !(base_eps > 0.0 && base_eps < bound / 2.0) {
        return Err(Error::InvalidInput(format!("base radius {base_eps} must lie in (0, D_kappa/2)")));
    }
    let delta = bound - target;
    let k = contraction_for(space, target)?;
    let mut levels = vec![ScheduleLevel { d: (base_eps / 2.0).min(target), eps_d: base_eps / 2.0 }];
    while levels.last().unwrap().d < target {
        let prev = *levels.last().unwrap();
        levels.push(ScheduleLevel {
            d: (1.5 * prev.d).min(target),
            eps_d: (1.0 - k) * prev.eps_d.min(delta / 3.0),
        });
    }
    Ok(EpsilonSchedule { target, delta, contraction: k, base_eps, levels })
}
