//! Worst-case witnesses for long-step schedules and their numerical
//! certificates.
//!
//! Two families are built, both in one dimension and normalized to `L = 1`:
//!
//! * **Overshoot (Huber) witness.** At an index `T` with `η_T >= 2` and
//!   `Σ_T >= 1`, a one-sided Huber function with kink `r` and curvature `a`
//!   is started at `x0 = r + a r Σ_T`. The first `T` steps travel along the
//!   linear branch and land exactly on the kink; the long step then throws
//!   the iterate to `r (1 - a η_T) <= -r`, where the gap is at least
//!   `c_T x0^2` with `c_T = (η_T / Σ_T)^2 / 32`.
//! * **Quadratic witness.** `x^2 / (2 Σ_T)` from `x0 = 1`, whose final iterate
//!   is the product `Π (1 - η_t / Σ_T)`, giving a gap of at least
//!   `e^-4 / (2 Σ_T)` whenever every `η_t <= Σ_T / 2`.
//!
//! Certificates are produced at `L = 1` and mapped to other smoothness
//! constants by [`Certificate::rescaled`].

use serde::Serialize;

use crate::engine::run_gd;
use crate::error::{Error, Result};
use crate::numeric::{rel_diff, to_json_string};
use crate::objectives::{HuberParams, Objective};
use crate::schedules::{prefix_sums_of, silver_prefix, ScanRecord, StepSchedule, LONG_STEP};

/// Relative tolerance for the simulated-vs-analytic identities.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Relative slack for Lemma and chain inequalities that hold with equality
/// analytically and can miss by rounding.
pub const CHAIN_SLACK: f64 = 1e-12;

/// Lower bound on the normalized certified gap asserted by the silver refutation.
pub const SILVER_MIN_CERTIFIED: f64 = 0.005;

/// Lower bound on the squared overshoot ratio asserted by the silver refutation.
pub const SILVER_MIN_RATIO_SQ: f64 = 0.17;

/// `lhs <= rhs`, labelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    fn new(label: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { label, lhs, rhs }
    }

    /// Holds up to `rel` relative slack.
    pub fn holds(&self, rel: f64) -> bool {
        self.lhs <= self.rhs + rel * self.lhs.abs().max(self.rhs.abs())
    }
}

/// The Huber witness chosen for one index of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HuberWitness {
    #[serde(rename = "T")]
    pub t: usize,
    pub params: HuberParams,
    pub eta_t: f64,
    pub sigma_t: f64,
    pub c_t: f64,
}

impl HuberWitness {
    /// Every inequality the parameter choice must satisfy.
    pub fn lemma_inequalities(&self) -> [Inequality; 7] {
        let HuberParams { a, r, .. } = self.params;
        let (eta, sigma, c) = (self.eta_t, self.sigma_t, self.c_t);
        [
            Inequality::new("2/eta_T <= a", 2.0 / eta, a),
            Inequality::new(
                "(8c_T/(eta_T^2 r^2))^(1/3) <= a",
                (8.0 * c / (eta * eta * r * r)).cbrt(),
                a,
            ),
            Inequality::new("a <= 1", a, 1.0),
            Inequality::new("a <= (1-r)/(r Sigma_T)", a, (1.0 - r) / (r * sigma)),
            Inequality::new("sqrt(8c_T)/eta_T <= r", (8.0 * c).sqrt() / eta, r),
            Inequality::new("r <= sqrt(eta_T c_T)", r, (eta * c).sqrt()),
            Inequality::new("r <= 1/(2 Sigma_T)", r, 1.0 / (2.0 * sigma)),
        ]
    }

    /// Analytic gap after the long step, `a (a η_T - 1)^2 r^2 / 2`.
    pub fn analytic_gap(&self) -> f64 {
        let HuberParams { a, r, .. } = self.params;
        a * (a * self.eta_t - 1.0).powi(2) * r * r / 2.0
    }

    /// `c_T x0^2 <= c_T <= a^3 η^2 r^2 / 8 <= a (aη - 1)^2 r^2 / 2`, plus
    /// `a η_T - 1 >= 1`.
    pub fn overshoot_chain(&self) -> [Inequality; 4] {
        let HuberParams { a, r, x0 } = self.params;
        let eta = self.eta_t;
        let cubic = a.powi(3) * eta * eta * r * r / 8.0;
        [
            Inequality::new("1 <= a eta_T - 1", 1.0, a * eta - 1.0),
            Inequality::new(
                "a^3 eta^2 r^2/8 <= a(a eta-1)^2 r^2/2",
                cubic,
                self.analytic_gap(),
            ),
            Inequality::new("c_T <= a^3 eta^2 r^2/8", self.c_t, cubic),
            Inequality::new("c_T x0^2 <= c_T", self.c_t * x0 * x0, self.c_t),
        ]
    }
}

fn index_in_range(schedule: &StepSchedule, t: usize, need: usize) -> Result<()> {
    if t + need > schedule.len() {
        return Err(Error::InvalidArgument(format!(
            "index T = {t} needs {} stepsizes, schedule '{}' has {}",
            t + need,
            schedule.name(),
            schedule.len()
        )));
    }
    Ok(())
}

fn sigma_at(schedule: &StepSchedule, t: usize) -> f64 {
    prefix_sums_of(&schedule.values()[..t])[t]
}

/// Chooses the Huber witness for index `T` of a schedule (normalized `L = 1`).
///
/// `r` is the upper end of its admissible interval,
/// `r = min{sqrt(η_T c_T), 1/(2 Σ_T)}`, and `a` the lower end of its interval,
/// `a = max{2/η_T, (8 c_T / (η_T^2 r^2))^(1/3)}`.
pub fn select_huber_params(schedule: &StepSchedule, t: usize) -> Result<HuberWitness> {
    if t == 0 {
        return Err(Error::NotCertifiable {
            t,
            reason: "Sigma_T < 1/L (empty prefix at T = 0)".into(),
        });
    }
    index_in_range(schedule, t, 1)?;
    let eta = schedule.values()[t];
    let sigma = sigma_at(schedule, t);
    let mut failed = Vec::new();
    if eta < LONG_STEP {
        failed.push("eta_T < 2/L");
    }
    if sigma < 1.0 {
        failed.push("Sigma_T < 1/L");
    }
    if !failed.is_empty() {
        return Err(Error::NotCertifiable {
            t,
            reason: failed.join(", "),
        });
    }

    let c = ScanRecord::new(t, eta, sigma).c_t;
    let r = (eta * c).sqrt().min(1.0 / (2.0 * sigma));
    let lower = (2.0 / eta).max((8.0 * c / (eta * eta * r * r)).cbrt());
    let upper = 1.0f64.min((1.0 - r) / (r * sigma));
    let a = if lower <= upper {
        lower
    } else if rel_diff(lower, upper) <= CHAIN_SLACK {
        upper
    } else {
        return Err(Error::ConstructionBug(format!(
            "empty curvature interval [{lower}, {upper}] at T = {t}"
        )));
    };
    let params = HuberParams::new(a, r, sigma)?;
    Ok(HuberWitness {
        t,
        params,
        eta_t: eta,
        sigma_t: sigma,
        c_t: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Theorem1,
    Theorem2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Instance {
    pub objective: Objective,
    pub x0: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

/// Construction parameters recorded alongside a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chain {
    pub a: Option<f64>,
    pub r: Option<f64>,
    #[serde(rename = "c_T")]
    pub c_t: Option<f64>,
    #[serde(rename = "sigma_T")]
    pub sigma_t: f64,
    #[serde(rename = "eta_T")]
    pub eta_t: Option<f64>,
}

/// A witness instance, its analytic lower bound, and the simulated gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    #[serde(rename = "T")]
    pub t: usize,
    pub instance: Instance,
    pub predicted_bound: f64,
    pub simulated_gap: f64,
    pub margin: f64,
    pub pass: bool,
    pub chain: Chain,
}

impl Certificate {
    fn new(
        kind: CertificateKind,
        t: usize,
        instance: Instance,
        predicted_bound: f64,
        simulated_gap: f64,
        chain: Chain,
    ) -> Self {
        let margin = simulated_gap - predicted_bound;
        Self {
            kind,
            t,
            instance,
            predicted_bound,
            simulated_gap,
            margin,
            pass: margin >= 0.0,
            chain,
        }
    }

    /// Maps a normalized certificate to smoothness constant `l`: the
    /// objective and all gaps scale by `l`, iterates are unchanged, and the
    /// applied steps become `η_t / l`.
    pub fn rescaled(&self, l: f64) -> Result<Certificate> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "L must be finite and positive, got {l}"
            )));
        }
        let factor = l / self.instance.l;
        let instance = Instance {
            objective: self.instance.objective.scaled(factor)?,
            x0: self.instance.x0,
            l,
        };
        Ok(Certificate::new(
            self.kind,
            self.t,
            instance,
            self.predicted_bound * factor,
            self.simulated_gap * factor,
            self.chain,
        ))
    }

    pub fn to_json(&self) -> String {
        to_json_string(self).expect("certificate serializes")
    }
}

/// Builds the Huber witness at index `T`, runs `T + 1` steps of GD on it,
/// and checks the simulation against the construction.
pub fn certify_overshoot(schedule: &StepSchedule, t: usize) -> Result<Certificate> {
    let witness = select_huber_params(schedule, t)?;
    let HuberParams { a, r, x0 } = witness.params;
    let objective = witness.params.objective();
    let traj = run_gd(&objective, schedule, x0, t + 1, 1.0)?;

    let x_t = traj.xs()[t];
    let x_next = traj.xs()[t + 1];
    let expected_next = r * (1.0 - a * witness.eta_t);
    if rel_diff(x_t, r) > IDENTITY_TOL {
        return Err(Error::ConstructionBug(format!(
            "x_T = {x_t}, expected r = {r}"
        )));
    }
    if rel_diff(x_next, expected_next) > IDENTITY_TOL {
        return Err(Error::ConstructionBug(format!(
            "x_(T+1) = {x_next}, expected r(1 - a eta_T) = {expected_next}"
        )));
    }
    let overshoot = witness.overshoot_chain()[0];
    if !overshoot.holds(CHAIN_SLACK) {
        return Err(Error::ConstructionBug(format!(
            "a eta_T - 1 = {} < 1",
            overshoot.rhs
        )));
    }
    let simulated_gap = traj.last_gap();
    if rel_diff(simulated_gap, witness.analytic_gap()) > IDENTITY_TOL {
        return Err(Error::ConstructionBug(format!(
            "gap {simulated_gap} differs from a(a eta-1)^2 r^2/2 = {}",
            witness.analytic_gap()
        )));
    }

    Ok(Certificate::new(
        CertificateKind::Theorem2,
        t,
        Instance {
            objective,
            x0,
            l: 1.0,
        },
        witness.c_t * x0 * x0,
        simulated_gap,
        Chain {
            a: Some(a),
            r: Some(r),
            c_t: Some(witness.c_t),
            sigma_t: witness.sigma_t,
            eta_t: Some(witness.eta_t),
        },
    ))
}

/// Checks the quadratic-witness preconditions `Σ_T >= 1` and
/// `η_t <= Σ_T / 2` for all `t < T`; returns `Σ_T`.
fn theorem1_preconditions(schedule: &StepSchedule, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon T must be >= 1".into()));
    }
    index_in_range(schedule, horizon, 0)?;
    let sigma = sigma_at(schedule, horizon);
    if sigma < 1.0 {
        return Err(Error::NotApplicable {
            t: horizon,
            reason: format!("Sigma_T = {sigma} < 1"),
        });
    }
    if let Some((t, &eta)) = schedule.values()[..horizon]
        .iter()
        .enumerate()
        .find(|(_, &eta)| eta > sigma / 2.0)
    {
        return Err(Error::NotApplicable {
            t: horizon,
            reason: format!("eta_{t} = {eta} > Sigma_T/2 = {}", sigma / 2.0),
        });
    }
    Ok(sigma)
}

/// `Π_{t<T} (1 - η_t / Σ_T)`, the closed-form final iterate of the quadratic
/// witness from `x0 = 1`.
pub fn theorem1_product(schedule: &StepSchedule, horizon: usize) -> Result<f64> {
    index_in_range(schedule, horizon, 0)?;
    let sigma = sigma_at(schedule, horizon);
    Ok(schedule.values()[..horizon]
        .iter()
        .map(|&eta| 1.0 - eta / sigma)
        .product())
}

/// `(Σ_t -log(1 - η_t/Σ_T), 2 Σ_t η_t/Σ_T)`; the first never exceeds the
/// second when every ratio is at most one half.
pub fn theorem1_log_sum(schedule: &StepSchedule, horizon: usize) -> Result<(f64, f64)> {
    let sigma = theorem1_preconditions(schedule, horizon)?;
    let steps = &schedule.values()[..horizon];
    let lhs = steps.iter().map(|&eta| -(-eta / sigma).ln_1p()).sum();
    let rhs = 2.0 * steps.iter().map(|&eta| eta / sigma).sum::<f64>();
    Ok((lhs, rhs))
}

/// Runs GD for `T` steps on `x^2 / (2 Σ_T)` from `x0 = 1` and certifies the
/// gap is at least `e^-4 / (2 Σ_T)`.
pub fn theorem1_witness(schedule: &StepSchedule, horizon: usize) -> Result<Certificate> {
    let sigma = theorem1_preconditions(schedule, horizon)?;
    let objective = Objective::quadratic(sigma)?;
    let traj = run_gd(&objective, schedule, 1.0, horizon, 1.0)?;
    let product = theorem1_product(schedule, horizon)?;
    if rel_diff(traj.last_x(), product) > IDENTITY_TOL {
        return Err(Error::ConstructionBug(format!(
            "x_T = {}, product form gives {product}",
            traj.last_x()
        )));
    }
    Ok(Certificate::new(
        CertificateKind::Theorem1,
        horizon,
        Instance {
            objective,
            x0: 1.0,
            l: 1.0,
        },
        (-4.0f64).exp() / (2.0 * sigma),
        traj.last_gap(),
        Chain {
            a: None,
            r: None,
            c_t: None,
            sigma_t: sigma,
            eta_t: None,
        },
    ))
}

/// Lower bound on the largest step a schedule must have taken before `T` to
/// keep every gap below `φ(T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRequirement {
    #[serde(rename = "T")]
    pub t: usize,
    pub phi: f64,
    /// `e^-4 / (2 T φ(T))`.
    pub required: f64,
    pub actual_max: f64,
    /// The schedule's largest step is below the requirement, so it cannot
    /// keep the gap below `φ(T)` on the quadratic witness.
    pub violated: bool,
}

pub fn max_step_requirement(
    schedule: &StepSchedule,
    phi: impl Fn(usize) -> f64,
    t_values: &[usize],
) -> Result<Vec<StepRequirement>> {
    t_values
        .iter()
        .map(|&t| {
            let target = phi(t);
            if !(target.is_finite() && target > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "phi({t}) = {target} must be finite and positive"
                )));
            }
            theorem1_preconditions(schedule, t)?;
            let required = (-4.0f64).exp() / (2.0 * t as f64 * target);
            let actual_max = schedule.values()[..t].iter().cloned().fold(0.0, f64::max);
            Ok(StepRequirement {
                t,
                phi: target,
                required,
                actual_max,
                violated: actual_max < required,
            })
        })
        .collect()
}

/// One dyadic index of the silver refutation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefutationRow {
    pub k: u32,
    #[serde(rename = "T")]
    pub t: usize,
    pub ratio: f64,
    pub ratio_sq: f64,
    /// Normalized certified gap `predicted_bound / (x0 - x*)^2`.
    #[serde(rename = "c_T")]
    pub c_t: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefutationReport {
    pub k_max: u32,
    pub rows: Vec<RefutationRow>,
    pub min_c_t: f64,
    pub min_ratio_sq: f64,
    /// Every certificate passed, every `c_T >= 0.005` and every squared
    /// ratio `>= 0.17`.
    pub holds: bool,
}

impl RefutationReport {
    pub const CSV_HEADER: &'static str =
        "k,T,eta,sigma,ratio,ratio_sq,c_T,x0,predicted_bound,simulated_gap,margin,pass";

    pub fn to_csv(&self) -> String {
        use crate::numeric::fmt17;
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let c = &row.certificate;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                row.k,
                row.t,
                fmt17(c.chain.eta_t.unwrap_or(f64::NAN)),
                fmt17(c.chain.sigma_t),
                fmt17(row.ratio),
                fmt17(row.ratio_sq),
                fmt17(row.c_t),
                fmt17(c.instance.x0),
                fmt17(c.predicted_bound),
                fmt17(c.simulated_gap),
                fmt17(c.margin),
                c.pass
            ));
        }
        out
    }
}

/// Certifies the overshoot at every `T = 2^k - 1`, `k = 1..=k_max`, of the
/// silver sequence.
pub fn silver_refutation(k_max: u32) -> Result<RefutationReport> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let len = 1usize
        .checked_shl(k_max)
        .filter(|_| k_max < usize::BITS)
        .ok_or_else(|| Error::Capacity(format!("silver prefix 2^{k_max} does not fit in usize")))?;
    let schedule = silver_prefix(len)?;
    let mut rows = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let t = (1usize << k) - 1;
        let certificate = certify_overshoot(&schedule, t)?;
        let ratio = certificate.chain.eta_t.unwrap_or(f64::NAN) / certificate.chain.sigma_t;
        rows.push(RefutationRow {
            k,
            t,
            ratio,
            ratio_sq: ratio * ratio,
            c_t: certificate.predicted_bound / certificate.instance.x0.powi(2),
            certificate,
        });
    }
    let min_c_t = rows.iter().map(|r| r.c_t).fold(f64::INFINITY, f64::min);
    let min_ratio_sq = rows
        .iter()
        .map(|r| r.ratio_sq)
        .fold(f64::INFINITY, f64::min);
    let holds = rows.iter().all(|r| r.certificate.pass)
        && min_c_t >= SILVER_MIN_CERTIFIED
        && min_ratio_sq >= SILVER_MIN_RATIO_SQ;
    Ok(RefutationReport {
        k_max,
        rows,
        min_c_t,
        min_ratio_sq,
        holds,
    })
}
