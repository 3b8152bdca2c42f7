//! Deterministic one-dimensional gradient descent with trajectory recording.
//!
//! Each iterate is carried as an unevaluated sum `x_t + carry_t`: the rounding
//! error of every update is captured exactly (2Sum and FMA) and folded into
//! the next step. Witness trajectories subtract `T` nearly equal amounts from
//! `x0` and land on a point far smaller than `x0`, which plain accumulation
//! cannot resolve to relative accuracy once `T` reaches the thousands.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::fmt17;
use crate::objectives::Objective;
use crate::schedules::StepSchedule;

/// Iterates with magnitude beyond this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e300;

/// Slack allowed below zero for a gap, to absorb rounding at the minimizer.
pub const GAP_SLACK: f64 = 1e-12;

/// Iterates `x_0..=x_T` of a gradient-descent run and their optimality gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    xs: Vec<f64>,
    carries: Vec<f64>,
    gaps: Vec<f64>,
    steps_used: Vec<f64>,
    best_gap: Vec<f64>,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// One update `x - step * grad` on the pair `(x, carry)`.
#[inline]
fn advance(x: f64, carry: f64, step: f64, grad: f64) -> (f64, f64) {
    let p = step * grad;
    let p_err = step.mul_add(grad, -p);
    let (s, e) = two_sum(x, -p);
    two_sum(s, e - p_err + carry)
}

impl Trajectory {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Low-order parts of the iterates; `x_t + carry_t` is the carried value.
    pub fn carries(&self) -> &[f64] {
        &self.carries
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Stepsizes actually applied, `η_t / L`.
    pub fn steps_used(&self) -> &[f64] {
        &self.steps_used
    }

    /// Running minimum of `gaps`.
    pub fn best_gap(&self) -> &[f64] {
        &self.best_gap
    }

    /// Number of steps taken.
    pub fn horizon(&self) -> usize {
        self.steps_used.len()
    }

    pub fn last_x(&self) -> f64 {
        *self.xs.last().expect("trajectory holds x_0")
    }

    pub fn last_gap(&self) -> f64 {
        *self.gaps.last().expect("trajectory holds x_0")
    }

    /// Recomputes every step from `objective` and checks bit-for-bit equality.
    pub fn replays(&self, objective: &Objective) -> bool {
        (0..self.horizon()).all(|t| {
            let (x, carry) = advance(
                self.xs[t],
                self.carries[t],
                self.steps_used[t],
                objective.derivative(self.xs[t]),
            );
            x.to_bits() == self.xs[t + 1].to_bits()
                && carry.to_bits() == self.carries[t + 1].to_bits()
        })
    }

    pub const CSV_HEADER: &'static str = "t,x,gap,step";

    /// CSV rows `t,x,gap,step`; the final iterate has an empty step field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (t, (&x, &gap)) in self.xs.iter().zip(&self.gaps).enumerate() {
            let step = self
                .steps_used
                .get(t)
                .map(|&s| fmt17(s))
                .unwrap_or_default();
            out.push_str(&format!("{t},{},{},{step}\n", fmt17(x), fmt17(gap)));
        }
        out
    }
}

/// Runs `horizon` steps of `x_{t+1} = x_t - (η_t / L) f'(x_t)` from `x0`.
pub fn run_gd(
    objective: &Objective,
    schedule: &StepSchedule,
    x0: f64,
    horizon: usize,
    l: f64,
) -> Result<Trajectory> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "L must be finite and positive, got {l}"
        )));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidArgument(format!("x0 = {x0} is not finite")));
    }
    objective.validate()?;
    if schedule.len() < horizon {
        return Err(Error::InvalidArgument(format!(
            "schedule has {} steps, horizon T = {horizon} requested",
            schedule.len()
        )));
    }

    let mut xs = Vec::with_capacity(horizon + 1);
    let mut carries = Vec::with_capacity(horizon + 1);
    let mut gaps = Vec::with_capacity(horizon + 1);
    let mut best_gap = Vec::with_capacity(horizon + 1);
    let steps_used: Vec<f64> = schedule.values()[..horizon]
        .iter()
        .map(|&eta| eta / l)
        .collect();

    let (mut x, mut carry) = (x0, 0.0);
    let mut best = f64::INFINITY;
    #[allow(clippy::needless_range_loop)]
    for t in 0..=horizon {
        let (value, grad) = objective.eval(x);
        let gap = value - objective.f_star();
        best = best.min(gap);
        xs.push(x);
        carries.push(carry);
        gaps.push(gap);
        best_gap.push(best);
        if t == horizon {
            break;
        }
        (x, carry) = advance(x, carry, steps_used[t], grad);
        if !x.is_finite() || x.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { t: t + 1, x });
        }
    }

    Ok(Trajectory {
        xs,
        carries,
        gaps,
        steps_used,
        best_gap,
    })
}

/// Index and value of the smallest entry, earliest index on ties.
pub fn best_gap_index(gaps: &[f64]) -> Option<(usize, f64)> {
    gaps.iter()
        .copied()
        .enumerate()
        .fold(None, |best, (t, g)| match best {
            Some((_, bg)) if bg <= g => best,
            _ => Some((t, g)),
        })
}

/// `(t_best, gap_best)` over the whole trajectory.
pub fn best_iterate(trajectory: &Trajectory) -> (usize, f64) {
    best_gap_index(trajectory.gaps()).expect("trajectory holds x_0")
}

/// Largest `2^n - 1` not exceeding `horizon`.
pub fn t_hat(horizon: u64) -> Result<u64> {
    if horizon < 1 {
        return Err(Error::InvalidArgument("t_hat needs T >= 1".into()));
    }
    match horizon.checked_add(1) {
        Some(next) => Ok((1u64 << (63 - next.leading_zeros())) - 1),
        None => Ok(u64::MAX),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: usize,
    pub gap: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Outcome of checking `gap_t <= |x0 - x*|^2 / (2 (η̄/L) t)` for `t >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicBoundReport {
    pub rows: Vec<BoundRow>,
    pub min_margin: f64,
    pub holds: bool,
}

/// Checks the textbook constant-step bound on every iterate of `trajectory`.
///
/// `eta_bar` is normalized (units of `1/L`) and must lie in `(0, 1]`; the
/// trajectory must have applied exactly `eta_bar / L` at every step.
pub fn classic_bound_check(
    trajectory: &Trajectory,
    l: f64,
    x_star: f64,
    eta_bar: f64,
) -> Result<ClassicBoundReport> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "L must be finite and positive, got {l}"
        )));
    }
    if !(eta_bar > 0.0 && eta_bar <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "classic bound needs 0 < eta_bar <= 1, got {eta_bar}"
        )));
    }
    let step = eta_bar / l;
    if let Some(t) = trajectory.steps_used().iter().position(|&s| s != step) {
        return Err(Error::InvalidArgument(format!(
            "trajectory step {t} is {}, not the constant {step}",
            trajectory.steps_used()[t]
        )));
    }
    let dist_sq = (trajectory.xs()[0] - x_star).powi(2);
    let rows: Vec<BoundRow> = trajectory
        .gaps()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(t, &gap)| {
            let bound = dist_sq / (2.0 * step * t as f64);
            BoundRow {
                t,
                gap,
                bound,
                margin: bound - gap,
            }
        })
        .collect();
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(ClassicBoundReport {
        holds: min_margin >= 0.0,
        rows,
        min_margin,
    })
}
