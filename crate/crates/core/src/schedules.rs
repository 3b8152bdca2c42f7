//! Stepsize schedules and long-step diagnostics.
//!
//! All stepsizes are stored normalized to a unit smoothness constant, i.e. in
//! units of `1/L`. A step is *long* when it is at least 2 in these units.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fmt17, CompensatedSum};

/// The silver ratio `1 + sqrt(2)`.
pub const SILVER_RATIO: f64 = 1.0 + std::f64::consts::SQRT_2;

/// Normalized threshold above which a step leaves the classical stable regime.
pub const LONG_STEP: f64 = 2.0;

/// Where a schedule came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Origin {
    Constant {
        eta: f64,
    },
    /// Full silver schedule of the given order, length `2^order - 1`.
    Silver {
        order: u32,
    },
    /// First `len` entries of the infinite silver sequence.
    SilverPrefix {
        len: usize,
    },
    File {
        path: String,
    },
    Literal,
}

/// A finite sequence of positive stepsizes in units of `1/L`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    name: String,
    values: Vec<f64>,
    origin: Origin,
}

/// On-disk representation: `{"name": ..., "values": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub name: String,
    pub values: Vec<f64>,
}

fn validate(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Validation {
            index: 0,
            reason: "schedule is empty".into(),
        });
    }
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Validation {
                index,
                reason: format!("stepsize {v} is not finite"),
            });
        }
        if v <= 0.0 {
            return Err(Error::Validation {
                index,
                reason: format!("stepsize {v} is not strictly positive"),
            });
        }
    }
    Ok(())
}

impl StepSchedule {
    /// Builds a schedule from explicit values, validating every entry.
    pub fn new(name: impl Into<String>, values: Vec<f64>, origin: Origin) -> Result<Self> {
        validate(&values)?;
        Ok(Self {
            name: name.into(),
            values,
            origin,
        })
    }

    pub fn literal(values: Vec<f64>) -> Result<Self> {
        Self::new("literal", values, Origin::Literal)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the schedule is a prefix of an infinite generator and can be
    /// extended by [`StepSchedule::materialize`].
    pub fn is_generated(&self) -> bool {
        matches!(
            self.origin,
            Origin::Constant { .. } | Origin::Silver { .. } | Origin::SilverPrefix { .. }
        )
    }

    /// Returns the first `len` stepsizes of the schedule.
    ///
    /// Constant and silver schedules are extended past their stored length;
    /// file and literal schedules can only be truncated.
    pub fn materialize(&self, len: usize) -> Result<StepSchedule> {
        if len == 0 {
            return Err(Error::InvalidArgument(
                "materialized length must be >= 1".into(),
            ));
        }
        match self.origin {
            Origin::Constant { eta } => constant_schedule(eta, len),
            Origin::Silver { .. } | Origin::SilverPrefix { .. } => silver_prefix(len),
            Origin::File { .. } | Origin::Literal => {
                if len > self.len() {
                    return Err(Error::InvalidArgument(format!(
                        "schedule '{}' has {} values, {} requested",
                        self.name,
                        self.len(),
                        len
                    )));
                }
                Ok(StepSchedule {
                    name: self.name.clone(),
                    values: self.values[..len].to_vec(),
                    origin: self.origin.clone(),
                })
            }
        }
    }

    pub fn to_file(&self) -> ScheduleFile {
        ScheduleFile {
            name: self.name.clone(),
            values: self.values.clone(),
        }
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (len {})", self.name, self.len())
    }
}

/// `length` copies of `eta_bar`.
pub fn constant_schedule(eta_bar: f64, length: usize) -> Result<StepSchedule> {
    if !(eta_bar.is_finite() && eta_bar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constant stepsize must be finite and positive, got {eta_bar}"
        )));
    }
    if length == 0 {
        return Err(Error::InvalidArgument(
            "schedule length must be >= 1".into(),
        ));
    }
    StepSchedule::new(
        format!("const:{eta_bar}"),
        vec![eta_bar; length],
        Origin::Constant { eta: eta_bar },
    )
}

/// The largest step of silver order `k`, `1 + rho^(k-1)`.
#[inline]
fn silver_peak(k: u32) -> f64 {
    1.0 + SILVER_RATIO.powi(k as i32 - 1)
}

/// Value at 0-based index `t` of the infinite silver sequence.
///
/// With `2^v` the largest power of two dividing `t + 1`, the step is
/// `sqrt(2)` for `v = 0` and `1 + rho^(v-1)` otherwise.
pub fn silver_step(t: usize) -> f64 {
    match (t as u128 + 1).trailing_zeros() {
        0 => std::f64::consts::SQRT_2,
        v => silver_peak(v),
    }
}

fn silver_len(k: u32) -> Result<usize> {
    if k > usize::BITS {
        return Err(Error::Capacity(format!(
            "silver order {k}: 2^{k} - 1 does not fit in usize"
        )));
    }
    Ok(if k == usize::BITS {
        usize::MAX
    } else {
        (1usize << k) - 1
    })
}

fn try_alloc(len: usize) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| Error::Capacity(format!("cannot allocate {len} stepsizes: {e}")))?;
    Ok(v)
}

/// Silver schedule of order `k` by the recursion `h(1) = [sqrt 2]`,
/// `h(k+1) = [h(k), 1 + rho^(k-1), h(k)]`.
pub fn silver_schedule(k: u32) -> Result<StepSchedule> {
    if k < 1 {
        return Err(Error::InvalidArgument("silver order must be >= 1".into()));
    }
    let len = silver_len(k)?;
    let mut values = try_alloc(len)?;
    values.push(std::f64::consts::SQRT_2);
    for order in 1..k {
        let half = values.len();
        values.push(silver_peak(order));
        values.extend_from_within(..half);
    }
    debug_assert_eq!(values.len(), len);
    Ok(StepSchedule {
        name: format!("silver:{k}"),
        values,
        origin: Origin::Silver { order: k },
    })
}

/// First `len` entries of the infinite silver sequence.
pub fn silver_prefix(len: usize) -> Result<StepSchedule> {
    if len == 0 {
        return Err(Error::InvalidArgument(
            "silver prefix length must be >= 1".into(),
        ));
    }
    let mut values = try_alloc(len)?;
    values.extend((0..len).map(silver_step));
    Ok(StepSchedule {
        name: format!("silver[{len}]"),
        values,
        origin: Origin::SilverPrefix { len },
    })
}

/// Where [`load_schedule`] reads from.
#[derive(Debug, Clone)]
pub enum ScheduleSource<'a> {
    File(&'a Path),
    List(&'a [f64]),
}

/// Loads a schedule from a JSON file or an inline list of stepsizes.
pub fn load_schedule(source: ScheduleSource<'_>) -> Result<StepSchedule> {
    match source {
        ScheduleSource::List(values) => StepSchedule::literal(values.to_vec()),
        ScheduleSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let file: ScheduleFile = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            StepSchedule::new(
                file.name,
                file.values,
                Origin::File {
                    path: path.display().to_string(),
                },
            )
        }
    }
}

/// `Σ_T` for `T = 0..=len`, with `Σ_0 = 0`.
pub fn prefix_sums(schedule: &StepSchedule) -> Vec<f64> {
    prefix_sums_of(schedule.values())
}

pub(crate) fn prefix_sums_of(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for &v in values {
        acc.add(v);
        out.push(acc.value());
    }
    out
}

/// Diagnostics for one index of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    #[serde(rename = "T")]
    pub t: usize,
    pub eta: f64,
    pub sigma: f64,
    pub ratio: f64,
    #[serde(rename = "c_T")]
    pub c_t: f64,
    pub long_step: bool,
    pub certifiable: bool,
}

impl ScanRecord {
    pub(crate) fn new(t: usize, eta: f64, sigma: f64) -> Self {
        let ratio = eta / sigma;
        Self {
            t,
            eta,
            sigma,
            ratio,
            c_t: ratio * ratio / 32.0,
            long_step: eta >= LONG_STEP,
            certifiable: t > 0 && (eta / 2.0).min(sigma) >= 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub records: Vec<ScanRecord>,
}

impl ScanReport {
    pub const CSV_HEADER: &'static str = "T,eta,sigma,ratio,c_T,long_step,certifiable";

    pub fn certifiable_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.records.iter().filter(|r| r.certifiable).map(|r| r.t)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.t,
                fmt17(r.eta),
                fmt17(r.sigma),
                fmt17(r.ratio),
                fmt17(r.c_t),
                r.long_step,
                r.certifiable
            ));
        }
        out
    }
}

/// Per-index overshoot diagnostics: `η_T`, `Σ_T`, `η_T/Σ_T`, and
/// `c_T = (η_T/Σ_T)^2 / 32`. Index 0 has `Σ_0 = 0` and is never certifiable.
pub fn long_step_scan(schedule: &StepSchedule) -> ScanReport {
    let sums = prefix_sums(schedule);
    let records = schedule
        .values()
        .iter()
        .enumerate()
        .map(|(t, &eta)| ScanRecord::new(t, eta, sums[t]))
        .collect();
    ScanReport { records }
}

/// One long step in a growth report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRecord {
    #[serde(rename = "T")]
    pub t: usize,
    pub eta: f64,
    pub sigma: f64,
    /// `η_T · T^(α/2) / Σ_T`.
    pub value: f64,
    /// `η_T` is strictly larger than every earlier step.
    pub record_high: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub alpha: f64,
    pub records: Vec<GrowthRecord>,
    /// Values at record-high long steps strictly increase (needs two or more).
    pub monotone_growth: bool,
}

impl GrowthReport {
    pub const CSV_HEADER: &'static str = "T,eta,sigma,value,record_high";

    pub fn record_highs(&self) -> impl Iterator<Item = &GrowthRecord> {
        self.records.iter().filter(|r| r.record_high)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.t,
                fmt17(r.eta),
                fmt17(r.sigma),
                fmt17(r.value),
                r.record_high
            ));
        }
        out
    }
}

/// For each long step `T >= 1`, reports `η_T · T^(α/2) / Σ_T`.
///
/// A schedule with an anytime `T^-α` guarantee must keep this quantity
/// bounded along infinitely many long steps; growth along the record-high
/// steps is flagged.
pub fn corollary_growth_report(schedule: &StepSchedule, alpha: f64) -> Result<GrowthReport> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite and > 1, got {alpha}"
        )));
    }
    let sums = prefix_sums(schedule);
    let values = schedule.values();
    let mut records = Vec::new();
    let mut running_max = values[0];
    for t in 1..values.len() {
        let eta = values[t];
        let record_high = eta > running_max;
        running_max = running_max.max(eta);
        if eta < LONG_STEP {
            continue;
        }
        let sigma = sums[t];
        records.push(GrowthRecord {
            t,
            eta,
            sigma,
            value: eta * (t as f64).powf(alpha / 2.0) / sigma,
            record_high,
        });
    }
    let highs: Vec<f64> = records
        .iter()
        .filter(|r| r.record_high)
        .map(|r| r.value)
        .collect();
    let monotone_growth = highs.len() >= 2 && highs.windows(2).all(|w| w[1] > w[0]);
    Ok(GrowthReport {
        alpha,
        records,
        monotone_growth,
    })
}
