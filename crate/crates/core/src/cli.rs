//! Command-line front end.
//!
//! Schedules are given in a small mini-language: `silver:k`, `const:eta,len`,
//! `file:path`, or `list:v1,v2,...`. Objectives are `huber:a,r` or
//! `quad:sigma`. Exit status is 0 on success, 1 on usage or validation errors,
//! and 2 when a certificate fails.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adversarial::{certify_overshoot, silver_refutation, theorem1_witness, Certificate};
use crate::engine::run_gd;
use crate::error::{Error, Result};
use crate::numeric::{fmt17, to_json_string};
use crate::objectives::Objective;
use crate::schedules::{
    constant_schedule, corollary_growth_report, load_schedule, long_step_scan, silver_schedule,
    ScheduleSource, StepSchedule,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CERT_FAIL: i32 = 2;

/// Schedule flag value.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Silver(u32),
    Const { eta: f64, len: usize },
    File(PathBuf),
    List(Vec<f64>),
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: '{s}' is not a number")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("{what}: '{s}' is not a non-negative integer")))
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("schedule '{s}': expected kind:args")))?;
        match kind {
            "silver" => {
                let k = rest.trim().parse::<u32>().map_err(|_| {
                    Error::Parse(format!("silver order '{rest}' is not an integer"))
                })?;
                Ok(ScheduleSpec::Silver(k))
            }
            "const" => {
                let (eta, len) = rest.split_once(',').ok_or_else(|| {
                    Error::Parse(format!("const schedule '{rest}': expected eta,len"))
                })?;
                Ok(ScheduleSpec::Const {
                    eta: parse_f64(eta, "const stepsize")?,
                    len: parse_usize(len, "const length")?,
                })
            }
            "file" => Ok(ScheduleSpec::File(PathBuf::from(rest))),
            "list" => rest
                .split(',')
                .enumerate()
                .map(|(i, v)| parse_f64(v, &format!("list entry {i}")))
                .collect::<Result<Vec<_>>>()
                .map(ScheduleSpec::List),
            other => Err(Error::Parse(format!(
                "unknown schedule kind '{other}' (silver, const, file, list)"
            ))),
        }
    }
}

impl ScheduleSpec {
    pub fn resolve(&self) -> Result<StepSchedule> {
        match self {
            ScheduleSpec::Silver(k) => silver_schedule(*k),
            ScheduleSpec::Const { eta, len } => constant_schedule(*eta, *len),
            ScheduleSpec::File(path) => load_schedule(ScheduleSource::File(path)),
            ScheduleSpec::List(values) => load_schedule(ScheduleSource::List(values)),
        }
    }
}

/// Objective flag value: `huber:a,r` or `quad:sigma`.
pub fn parse_objective(s: &str) -> Result<Objective> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("objective '{s}': expected kind:args")))?;
    match kind {
        "huber" => {
            let (a, r) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("huber objective '{rest}': expected a,r")))?;
            Objective::huber(parse_f64(a, "huber a")?, parse_f64(r, "huber r")?)
        }
        "quad" | "quadratic" => Objective::quadratic(parse_f64(rest, "quadratic sigma")?),
        other => Err(Error::Parse(format!(
            "unknown objective kind '{other}' (huber, quad)"
        ))),
    }
}

/// Extends generator-backed schedules to at least `len` values.
fn with_len(schedule: StepSchedule, len: usize) -> Result<StepSchedule> {
    if schedule.len() >= len {
        Ok(schedule)
    } else if schedule.is_generated() {
        schedule.materialize(len)
    } else {
        Err(Error::InvalidArgument(format!(
            "schedule '{}' has {} values, {len} needed",
            schedule.name(),
            schedule.len()
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "longstep",
    version,
    about = "Stepsize schedules and long-step overshoot certificates"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format (csv for tables, json for certificates by default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ScheduleArg {
    /// silver:k | const:eta,len | file:path | list:v1,v2,...
    #[arg(long, value_parser = parse_schedule_flag)]
    pub schedule: ScheduleSpec,
}

fn parse_schedule_flag(s: &str) -> std::result::Result<ScheduleSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit a schedule as JSON (or CSV t,eta).
    Schedule {
        #[arg(
            long,
            conflicts_with = "schedule",
            required_unless_present = "schedule"
        )]
        silver: Option<u32>,
        #[arg(long, value_parser = parse_schedule_flag)]
        schedule: Option<ScheduleSpec>,
        /// Materialize to this many values.
        #[arg(long)]
        len: Option<usize>,
    },
    /// Per-index long-step diagnostics.
    Scan {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long)]
        len: Option<usize>,
    },
    /// Run gradient descent and emit the trajectory.
    Run {
        #[command(flatten)]
        schedule: ScheduleArg,
        /// huber:a,r | quad:sigma
        #[arg(long)]
        objective: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long = "T")]
        t: usize,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
    },
    /// Certify the overshoot after the long step at index T.
    Certify {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long = "T")]
        t: usize,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
    },
    /// Certify the quadratic-witness lower bound at horizon T.
    Theorem1 {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long = "T")]
        t: usize,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
    },
    /// Certify the overshoot at every T = 2^k - 1 of the silver schedule.
    RefuteSilver {
        #[arg(long)]
        k: u32,
    },
    /// Report eta_T T^(alpha/2) / Sigma_T at every long step.
    GrowthReport {
        #[command(flatten)]
        schedule: ScheduleArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        len: Option<usize>,
    },
}

/// Text produced by a command plus its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub output: String,
}

fn ok(output: String) -> Outcome {
    Outcome {
        status: EXIT_OK,
        output,
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    to_json_string(value).map_err(|e| Error::Io(format!("serialization failed: {e}")))
}

fn certificate_csv(certs: &[Certificate]) -> String {
    let mut out = String::from("kind,T,x0,L,predicted_bound,simulated_gap,margin,pass\n");
    for c in certs {
        let kind = match c.kind {
            crate::adversarial::CertificateKind::Theorem1 => "theorem1",
            crate::adversarial::CertificateKind::Theorem2 => "theorem2",
        };
        out.push_str(&format!(
            "{kind},{},{},{},{},{},{},{}\n",
            c.t,
            fmt17(c.instance.x0),
            fmt17(c.instance.l),
            fmt17(c.predicted_bound),
            fmt17(c.simulated_gap),
            fmt17(c.margin),
            c.pass
        ));
    }
    out
}

fn certificate_outcome(cert: Certificate, format: Option<Format>) -> Result<Outcome> {
    let output = match format.unwrap_or(Format::Json) {
        Format::Json => cert.to_json(),
        Format::Csv => certificate_csv(&[cert]),
    };
    Ok(Outcome {
        status: if cert.pass { EXIT_OK } else { EXIT_CERT_FAIL },
        output,
    })
}

fn maybe_len(schedule: StepSchedule, len: Option<usize>) -> Result<StepSchedule> {
    match len {
        None => Ok(schedule),
        Some(n) if n <= schedule.len() => schedule.materialize(n),
        Some(n) => with_len(schedule, n),
    }
}

/// Executes one command and returns its rendered output.
pub fn dispatch(config: &RunConfig) -> Result<Outcome> {
    let format = config.format;
    match &config.command {
        Command::Schedule {
            silver,
            schedule,
            len,
        } => {
            let base = match (silver, schedule) {
                (Some(k), _) => silver_schedule(*k)?,
                (None, Some(spec)) => spec.resolve()?,
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "one of --silver or --schedule is required".into(),
                    ))
                }
            };
            let schedule = maybe_len(base, *len)?;
            match format.unwrap_or(Format::Json) {
                Format::Json => json(&schedule.to_file()).map(ok),
                Format::Csv => {
                    let mut out = String::from("t,eta\n");
                    for (t, &v) in schedule.values().iter().enumerate() {
                        out.push_str(&format!("{t},{}\n", fmt17(v)));
                    }
                    Ok(ok(out))
                }
            }
        }
        Command::Scan { schedule, len } => {
            let schedule = maybe_len(schedule.schedule.resolve()?, *len)?;
            let report = long_step_scan(&schedule);
            match format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(ok(report.to_csv())),
                Format::Json => json(&report).map(ok),
            }
        }
        Command::Run {
            schedule,
            objective,
            x0,
            t,
            l,
        } => {
            let objective = parse_objective(objective)?;
            let schedule = with_len(schedule.schedule.resolve()?, *t)?;
            let traj = run_gd(&objective, &schedule, *x0, *t, *l)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(ok(traj.to_csv())),
                Format::Json => json(&traj).map(ok),
            }
        }
        Command::Certify { schedule, t, l } => {
            let schedule = with_len(schedule.schedule.resolve()?, t + 1)?;
            let cert = certify_overshoot(&schedule, *t)?.rescaled(*l)?;
            certificate_outcome(cert, format)
        }
        Command::Theorem1 { schedule, t, l } => {
            let schedule = with_len(schedule.schedule.resolve()?, *t)?;
            let cert = theorem1_witness(&schedule, *t)?.rescaled(*l)?;
            certificate_outcome(cert, format)
        }
        Command::RefuteSilver { k } => {
            let report = silver_refutation(*k)?;
            let output = match format.unwrap_or(Format::Csv) {
                Format::Csv => report.to_csv(),
                Format::Json => json(&report)?,
            };
            Ok(Outcome {
                status: if report.holds {
                    EXIT_OK
                } else {
                    EXIT_CERT_FAIL
                },
                output,
            })
        }
        Command::GrowthReport {
            schedule,
            alpha,
            len,
        } => {
            let schedule = maybe_len(schedule.schedule.resolve()?, *len)?;
            let report = corollary_growth_report(&schedule, *alpha)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => Ok(ok(report.to_csv())),
                Format::Json => json(&report).map(ok),
            }
        }
    }
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
pub fn emit_report(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}"))),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConstructionBug(_) => EXIT_CERT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command, and returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let status = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return status;
        }
    };
    let outcome = match dispatch(&config) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = emit_report(&outcome.output, config.out.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    outcome.status
}
