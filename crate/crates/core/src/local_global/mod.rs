//! Local-to-global convexity: the midpoint iteration, marching along
//! length-metric curves, and the resulting verdicts.

mod comparison;
mod connect;
mod iteration;
mod schedule;
mod shortening;
mod verdict;

pub use comparison::{cat_check_intrinsic, ComparisonReport, ComparisonViolation, COMPARISON_SLACK};
pub use connect::{connect, ConnectCertificate, ConnectVerdict, Connector, Station, DEFAULT_MAX_STEPS};
pub use iteration::{midpoint_iteration, IterationTrace};
pub use schedule::{build_schedule, contraction_for, EpsilonSchedule, ScheduleLevel};
pub use shortening::curve_shortening;
pub use verdict::{convexity_verdict, PairCheck, Verdict, VerdictReport};
