pub mod error;
pub mod model_spaces;
pub mod report;
pub mod spherical_trig;
pub mod convex_scenes;
pub mod local_global;
pub mod fixtures;
pub mod cli;
