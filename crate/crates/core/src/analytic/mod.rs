//! Exact and series computations for one-dimensional walks: resistors,
//! hitting probabilities, expected excursion sizes and durations, one- and
//! two-sided criteria, closed-form phase classifiers and the
//! space-dependent criterion.

mod excursion;
mod ladder;
mod phase;
mod sided;
mod space;

pub use excursion::{excursion_time, GRID_REL_TOL, excursion_time_with, full_line_excursion_time, ExcursionOptions};
pub use ladder::{
    drift_functionals, expected_m, hitting_profile, log_resistors, resistors, DriftFunctionals, HittingProfile, Ladder,
};
pub use phase::{lamperti_boundary, lamperti_phase, log_lamperti_phase, Phase};
pub use sided::{one_sided_ratios, prr_criterion, prr_criterion_with_h, two_sided_exit, ExitWindow};
pub use space::{expected_edge_crossings, space_criterion, SpaceVerdict};
