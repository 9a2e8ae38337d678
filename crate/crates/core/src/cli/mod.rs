//! Command-line front end.
//!
//! Every command writes deterministic output: CSV with `#` metadata lines for
//! `bounds` and `outage`, a plain-text check list for `verify`. Sweep points
//! are evaluated in parallel (capped by `COPULA_OUTAGE_THREADS`) and
//! collected in grid order, and Monte Carlo points use seed `seed + index`,
//! so the thread count never changes the output.

pub mod csv;
pub mod sweep;
pub mod verify;

use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{compute_bounds, numerical_bounds, BinaryOp};
use crate::error::Error;
use crate::marginals::Marginal;
use crate::numerics::{RandomSource, Tolerance};
use crate::outage::{
    correlated_rayleigh_outage_mc, mac_outage_lower, mac_outage_upper, p2p_outage_bounds,
    ris_independent_outage, ris_outage_bounds, CorrelationModel, RateConfig, MIN_MC_SAMPLES,
};

pub use csv::{format_number, CsvTable};
pub use sweep::{Axis, Scale, SweepSpec, SweepVariable};
pub use verify::{run_verify, VerifyConfig, VerifyReport};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "COPULA_OUTAGE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Text to print plus the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: u8,
}

#[derive(Debug, Parser)]
#[command(
    name = "copula-outage",
    version,
    about = "Outage-probability bounds under unknown dependence between two channel gains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower/upper bounds on P(L(X, Y) < s) over a threshold sweep
    Bounds(BoundsArgs),
    /// Outage bounds for a communication scenario
    Outage(OutageArgs),
    /// Run the built-in consistency checks
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Sum,
    Product,
}

impl OpArg {
    fn op(self) -> BinaryOp {
        match self {
            OpArg::Sum => BinaryOp::Sum,
            OpArg::Product => BinaryOp::Product,
        }
    }
}

impl FromStr for Marginal {
    type Err = String;

    /// `uniform:<min>:<max>` or `exp:<rate>`.
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number '{s}' in marginal '{spec}'"))
        };
        let m = match parts.as_slice() {
            ["uniform" | "u", a, b] => Marginal::uniform(num(a)?, num(b)?),
            ["exp" | "exponential", rate] => Marginal::exponential(num(rate)?),
            _ => {
                return Err(format!(
                    "unrecognized marginal '{spec}' (expected uniform:<min>:<max> or exp:<rate>)"
                ))
            }
        };
        m.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(value_enum)]
    pub op: OpArg,
    /// Marginal of X, e.g. uniform:1:3 or exp:1
    pub fx: Marginal,
    /// Marginal of Y
    pub fy: Marginal,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Log-spaced thresholds
    #[arg(long)]
    pub log: bool,
    /// Always use the generic level-curve search, even where a closed form exists
    #[arg(long)]
    pub numerical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Point-to-point link over two Rayleigh gains, P(X + Y < s)
    P2p,
    /// Two-user multiple access channel
    Mac,
    /// Single-element RIS link without direct path, P(X Y < s)
    Ris,
    /// Linearly correlated Rayleigh model (Monte Carlo) against the bounds
    Corr,
}

#[derive(Debug, Args)]
pub struct OutageArgs {
    #[arg(value_enum)]
    pub scenario: Scenario,
    /// Rate parameter of X (default 1)
    #[arg(long)]
    pub lx: Option<f64>,
    /// Rate parameter of Y (default 1)
    #[arg(long)]
    pub ly: Option<f64>,
    /// Transmission rate in bits per channel use
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub rate_from: Option<f64>,
    #[arg(long)]
    pub rate_to: Option<f64>,
    /// SNR in dB (default 0)
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db_from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db_to: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub rho_from: Option<f64>,
    #[arg(long)]
    pub rho_to: Option<f64>,
    /// MAC rate of user 1
    #[arg(long)]
    pub r1: Option<f64>,
    /// MAC rate of user 2
    #[arg(long)]
    pub r2: Option<f64>,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long)]
    pub log: bool,
    /// Monte Carlo samples per point
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Samples per Monte Carlo check
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Add the non-copula max(a, b) to the validity checks (self-test of the checker)
    #[arg(long, hide = true)]
    pub inject_faulty_copula: bool,
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Bounds(a) => Ok(Output {
            text: cmd_bounds(&a)?.render(),
            code: 0,
        }),
        Command::Outage(a) => Ok(Output {
            text: cmd_outage(&a)?.render(),
            code: 0,
        }),
        Command::Verify(a) => {
            let report = cmd_verify(&a)?;
            Ok(Output {
                text: report.render(),
                code: if report.all_passed() { 0 } else { 1 },
            })
        }
    }
}

/// Run `f` on a pool honoring [`THREADS_ENV`].
fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer (got '{v}')"
            ))
        })?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(f))
}

fn eval_rows<F>(values: &[f64], row: F) -> Result<Vec<Vec<f64>>, CliError>
where
    F: Fn(usize, f64) -> Result<Vec<f64>, Error> + Sync,
{
    let rows = with_pool(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| row(i, v))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(rows?)
}

fn scale(log: bool) -> Scale {
    if log {
        Scale::Log
    } else {
        Scale::Linear
    }
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<CsvTable, CliError> {
    let spec = SweepSpec::new(
        SweepVariable::Threshold,
        a.from,
        a.to,
        a.points,
        scale(a.log),
    )?;
    let op = a.op.op();
    let tol = Tolerance::default();
    let (fx, fy) = (a.fx, a.fy);
    if fx.support().0 < 0.0 || fy.support().0 < 0.0 {
        return Err(CliError::Usage(
            "marginals must have non-negative support".into(),
        ));
    }

    let values = spec.values();
    let rows = eval_rows(&values, |_, s| {
        let r = if a.numerical {
            numerical_bounds(&fx, &fy, &op, s, tol)?
        } else {
            compute_bounds(&fx, &fy, &op, s, tol)?
        };
        Ok(vec![s, r.lower, r.upper])
    })?;

    let mut t = CsvTable::new(vec!["s", "lower", "upper"]);
    t.meta("copula-outage", env!("CARGO_PKG_VERSION"))
        .meta("command", "bounds")
        .meta("op", op.name())
        .meta("fx", fx)
        .meta("fy", fy)
        .meta("sweep", Axis::Sweep(spec).describe())
        .meta("method", if a.numerical { "numerical" } else { "auto" });
    rows.into_iter().for_each(|r| t.push_row(r));
    Ok(t)
}

fn sweep_pair(
    var: SweepVariable,
    from: Option<f64>,
    to: Option<f64>,
    points: usize,
    log: bool,
) -> Result<Option<SweepSpec>, CliError> {
    match (from, to) {
        (None, None) => Ok(None),
        (Some(a), Some(b)) => Ok(Some(SweepSpec::new(var, a, b, points, scale(log))?)),
        _ => Err(CliError::Usage(format!(
            "--{0}-from and --{0}-to must be given together",
            var.column().replace('_', "-")
        ))),
    }
}

struct ResolvedOutage {
    lx: f64,
    ly: f64,
    axis: Axis,
    rate: Option<f64>,
    snr_db: f64,
}

fn resolve_outage(a: &OutageArgs) -> Result<ResolvedOutage, CliError> {
    let sweeps: Vec<SweepSpec> = [
        sweep_pair(SweepVariable::Rate, a.rate_from, a.rate_to, a.points, a.log)?,
        sweep_pair(
            SweepVariable::SnrDb,
            a.snr_db_from,
            a.snr_db_to,
            a.points,
            a.log,
        )?,
        sweep_pair(SweepVariable::Rho, a.rho_from, a.rho_to, a.points, a.log)?,
    ]
    .into_iter()
    .flatten()
    .collect();
    if sweeps.len() > 1 {
        return Err(CliError::Usage("at most one variable can be swept".into()));
    }
    let sweep = sweeps.first().copied();

    let usage = |m: &str| Err(CliError::Usage(m.to_string()));
    let allowed: &[SweepVariable] = match a.scenario {
        Scenario::P2p | Scenario::Ris => &[SweepVariable::Rate, SweepVariable::SnrDb],
        Scenario::Mac => &[SweepVariable::Rate],
        Scenario::Corr => &[SweepVariable::Rho],
    };
    if let Some(s) = sweep {
        if !allowed.contains(&s.variable) {
            return Err(CliError::Usage(format!(
                "scenario {:?} cannot sweep {}",
                a.scenario,
                s.variable.column()
            )));
        }
    }

    match a.scenario {
        Scenario::Mac => {
            if a.snr_db.is_some() || a.rho.is_some() {
                return usage("mac takes rates only; fold the SNR into --lx/--ly");
            }
        }
        Scenario::Corr => {
            if a.lx.is_some() || a.ly.is_some() {
                return usage("corr uses unit-mean Rayleigh gains; --lx/--ly do not apply");
            }
            if a.r1.is_some() || a.r2.is_some() {
                return usage("--r1/--r2 only apply to mac");
            }
        }
        Scenario::P2p | Scenario::Ris => {
            if a.rho.is_some() || a.r1.is_some() || a.r2.is_some() {
                return usage("--rho, --r1 and --r2 do not apply to this scenario");
            }
        }
    }

    let axis = match sweep {
        Some(s) => Axis::Sweep(s),
        None => match a.scenario {
            Scenario::Corr => Axis::Fixed(
                SweepVariable::Rho,
                a.rho.ok_or_else(|| {
                    CliError::Usage("corr needs --rho or --rho-from/--rho-to".into())
                })?,
            ),
            Scenario::Mac => Axis::Fixed(SweepVariable::Rate, a.rate.unwrap_or(f64::NAN)),
            _ => Axis::Fixed(
                SweepVariable::Rate,
                a.rate.ok_or_else(|| {
                    CliError::Usage("--rate or --rate-from/--rate-to is required".into())
                })?,
            ),
        },
    };
    let lx = a.lx.unwrap_or(1.0);
    let ly = a.ly.unwrap_or(1.0);
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return usage("--lx and --ly must be positive");
    }
    if a.samples < MIN_MC_SAMPLES && a.scenario == Scenario::Corr {
        return Err(CliError::Usage(format!(
            "--samples must be at least {MIN_MC_SAMPLES}"
        )));
    }
    Ok(ResolvedOutage {
        lx,
        ly,
        axis,
        rate: a.rate,
        snr_db: a.snr_db.unwrap_or(0.0),
    })
}

/// Rate config for one sweep value, validated as user input.
fn point_config(r: &ResolvedOutage, value: f64) -> Result<RateConfig, CliError> {
    let (rate, snr_db) = match r.axis.variable() {
        SweepVariable::Rate => (value, r.snr_db),
        SweepVariable::SnrDb => (
            r.rate
                .ok_or_else(|| CliError::Usage("--rate is required for an SNR sweep".into()))?,
            value,
        ),
        _ => (
            r.rate
                .ok_or_else(|| CliError::Usage("--rate is required".into()))?,
            r.snr_db,
        ),
    };
    RateConfig::with_snr_db(rate, snr_db).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_outage(a: &OutageArgs) -> Result<CsvTable, CliError> {
    let r = resolve_outage(a)?;
    let values = r.axis.values();
    let tol = Tolerance::default();
    let mut meta: Vec<(&str, String)> = vec![
        ("copula-outage", env!("CARGO_PKG_VERSION").to_string()),
        ("command", "outage".into()),
    ];

    let mut table = match a.scenario {
        Scenario::P2p | Scenario::Ris => {
            let configs = values
                .iter()
                .map(|&v| point_config(&r, v))
                .collect::<Result<Vec<_>, _>>()?;
            let ris = a.scenario == Scenario::Ris;
            let rows = eval_rows(&values, |i, v| {
                let cfg = configs[i];
                if ris {
                    let b = ris_outage_bounds(r.lx, r.ly, cfg, tol)?;
                    let ind = ris_independent_outage(r.lx, r.ly, cfg)?;
                    Ok(vec![v, b.lower, ind, b.upper])
                } else {
                    let b = p2p_outage_bounds(r.lx, r.ly, cfg)?;
                    Ok(vec![v, b.lower, b.upper])
                }
            })?;
            let col = r.axis.variable().column();
            let mut t = CsvTable::new(if ris {
                vec![col, "lower", "independent", "upper"]
            } else {
                vec![col, "lower", "upper"]
            });
            meta.push(("scenario", if ris { "ris" } else { "p2p" }.into()));
            meta.push(("lx", r.lx.to_string()));
            meta.push(("ly", r.ly.to_string()));
            if r.axis.variable() != SweepVariable::Rate {
                meta.push(("rate", r.rate.map_or("-".into(), |x| x.to_string())));
            }
            if r.axis.variable() != SweepVariable::SnrDb {
                meta.push(("snr_db", r.snr_db.to_string()));
            }
            rows.into_iter().for_each(|row| t.push_row(row));
            t
        }
        Scenario::Mac => {
            let pairs: Vec<(f64, f64)> = match r.axis {
                Axis::Sweep(_) => {
                    if a.r1.is_some() || a.r2.is_some() {
                        return Err(CliError::Usage(
                            "a mac rate sweep sets r1 = r2 = rate; drop --r1/--r2".into(),
                        ));
                    }
                    values.iter().map(|&v| (v, v)).collect()
                }
                Axis::Fixed(..) => {
                    let r1 = a.r1.or(a.rate);
                    let r2 = a.r2.or(a.rate);
                    match (r1, r2) {
                        (Some(x), Some(y)) => vec![(x, y)],
                        _ => {
                            return Err(CliError::Usage(
                                "mac needs --r1 and --r2, --rate, or a rate sweep".into(),
                            ))
                        }
                    }
                }
            };
            if pairs.iter().any(|&(x, y)| !(x >= 0.0 && y >= 0.0)) {
                return Err(CliError::Usage("rates must be non-negative".into()));
            }
            let rows = eval_rows(&values, |i, _| {
                let (r1, r2) = pairs[i];
                Ok(vec![
                    r1,
                    r2,
                    mac_outage_lower(r.lx, r.ly, r1, r2)?,
                    mac_outage_upper(r.lx, r.ly, r1, r2)?,
                ])
            })?;
            let mut t = CsvTable::new(vec!["r1", "r2", "lower", "upper"]);
            meta.push(("scenario", "mac".into()));
            meta.push(("lx", r.lx.to_string()));
            meta.push(("ly", r.ly.to_string()));
            rows.into_iter().for_each(|row| t.push_row(row));
            t
        }
        Scenario::Corr => {
            let cfg = point_config(&r, f64::NAN)?;
            if values.iter().any(|rho| !(0.0..=1.0).contains(rho)) {
                return Err(CliError::Usage("rho must lie in [0, 1]".into()));
            }
            let base = RandomSource::new(a.seed);
            let n = a.samples;
            let rows = eval_rows(&values, |i, rho| {
                let mut rng = base.derive(i as u64);
                let est =
                    correlated_rayleigh_outage_mc(CorrelationModel::new(rho)?, cfg, n, &mut rng)?;
                let b = p2p_outage_bounds(1.0, 1.0, cfg)?;
                Ok(vec![rho, est.estimate, est.stderr, b.lower, b.upper])
            })?;
            let mut t = CsvTable::new(vec!["rho", "mc_estimate", "mc_stderr", "lower", "upper"]);
            meta.push(("scenario", "corr".into()));
            meta.push(("rate", cfg.rate.to_string()));
            meta.push(("snr_db", r.snr_db.to_string()));
            meta.push(("samples", n.to_string()));
            meta.push(("seed", a.seed.to_string()));
            meta.push(("seed_derivation", "seed + point index".into()));
            rows.into_iter().for_each(|row| t.push_row(row));
            t
        }
    };
    let axis = match r.axis {
        Axis::Fixed(..) => "none".to_string(),
        Axis::Sweep(_) => r.axis.describe(),
    };
    meta.push(("sweep", axis));
    for (k, v) in meta {
        table.meta(k, v);
    }
    Ok(table)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<VerifyReport, CliError> {
    if a.samples < MIN_MC_SAMPLES {
        return Err(CliError::Usage(format!(
            "--samples must be at least {MIN_MC_SAMPLES}"
        )));
    }
    let mut cfg = VerifyConfig::new(a.seed, a.samples);
    if a.inject_faulty_copula {
        cfg.extra_copulas.push(crate::copulas::Copula::custom(
            "max(a,b)",
            |x: f64, y: f64| x.max(y),
        ));
    }
    with_pool(|| run_verify(&cfg))
}
