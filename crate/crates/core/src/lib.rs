//! Gradient-descent stepsize schedules and adversarial witnesses showing how
//! long steps overshoot.
//!
//! * [`schedules`]: constant and silver schedules, loading, prefix sums, and
//!   long-step scans.
//! * [`objectives`]: one-dimensional quadratic and one-sided Huber oracles.
//! * [`engine`]: gradient-descent runner, best-iterate tracking, and the
//!   constant-step upper bound check.
//! * [`adversarial`]: witness construction and certificates.
//! * [`cli`]: command-line dispatch and report emission.

pub mod adversarial;
pub mod cli;
pub mod engine;
pub mod error;
pub mod numeric;
pub mod objectives;
pub mod schedules;

pub use adversarial::{
    certify_overshoot, max_step_requirement, select_huber_params, silver_refutation,
    theorem1_witness, Certificate, CertificateKind,
};
pub use engine::{best_iterate, classic_bound_check, run_gd, t_hat, Trajectory};
pub use error::{Error, Result};
pub use objectives::{huber_eval, quadratic_eval, smoothness_probe, HuberParams, Objective};
pub use schedules::{
    constant_schedule, corollary_growth_report, load_schedule, long_step_scan, prefix_sums,
    silver_schedule, ScanReport, ScheduleSource, StepSchedule,
};
