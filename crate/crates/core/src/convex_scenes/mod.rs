//! Subsets of a model space given as finite unions of convex cells.

mod cell;
mod length;
mod scene;

pub use cell::{ConvexCell, HalfSpace};
pub use length::{intrinsic_diameter, length_metric, LengthGraph, LengthPath};
pub use scene::{
    CellReport, EpsSource, LocalCheck, LocalVerdict, Membership, Scene, SceneFile, ValidationReport, Witness,
    DEFAULT_MEMBERSHIP_TOL, EPS_FLOOR,
};
