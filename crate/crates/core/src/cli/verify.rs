//! Built-in consistency checks behind `copula-outage verify`.

use std::fmt::Write as _;

use crate::bounds::{
    closed_form_sum_exponential, closed_form_sum_uniform, numerical_bounds, BinaryOp,
};
use crate::copulas::{check_copula, sample_mixture, Copula, VALIDITY_EPS};
use crate::error::Result;
use crate::marginals::Marginal;
use crate::numerics::{bessel_k1_large, bessel_k1_series, RandomSource, Tolerance};
use crate::outage::{
    mac_outage_bounds_numerical, mac_outage_lower, mac_outage_upper, ris_independent_outage,
    ris_outage_bounds, RateConfig,
};
use crate::worstcase::{audit_attainment, marginal_audit, AttainingJoint};

use super::csv::format_number;
use super::sweep::{Scale, SweepSpec, SweepVariable};

const COPULA_GRID: usize = 200;
const AGREEMENT_TOL: f64 = 1e-6;
const MARGINAL_AUDIT_FLOOR: f64 = 0.005;
/// Failure probability used for the DKW band of the marginal audits.
const DKW_ALPHA: f64 = 1e-3;
const CONTAINMENT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    /// Checked for validity alongside W, M and Pi.
    pub extra_copulas: Vec<Copula>,
}

impl VerifyConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        Self {
            seed,
            samples,
            extra_copulas: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# copula-outage verify seed={} samples={}",
            self.seed, self.samples
        );
        for c in &self.checks {
            let _ = write!(
                out,
                "{} {} measured={} limit={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                format_number(c.measured),
                format_number(c.limit)
            );
            if !c.detail.is_empty() {
                let _ = write!(out, " ({})", c.detail);
            }
            out.push('\n');
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }
}

fn check(
    name: impl Into<String>,
    measured: f64,
    limit: f64,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: measured <= limit,
        measured,
        limit,
        detail: detail.into(),
    }
}

/// Turn a failing computation into a failed check.
fn guarded(name: &str, limit: f64, f: impl FnOnce() -> Result<(f64, String)>) -> CheckResult {
    match f() {
        Ok((measured, detail)) => check(name, measured, limit, detail),
        Err(e) => CheckResult {
            name: name.to_string(),
            passed: false,
            measured: f64::NAN,
            limit,
            detail: format!("error: {e}"),
        },
    }
}

fn grid(from: f64, to: f64, points: usize, scale: Scale) -> Vec<f64> {
    SweepSpec::new(SweepVariable::Threshold, from, to, points, scale)
        .expect("static grid")
        .values()
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let tol = Tolerance::default();
    let base = RandomSource::new(cfg.seed);
    let n = cfg.samples;
    let mut checks = Vec::new();

    let mut copulas = vec![Copula::W, Copula::M, Copula::Pi];
    copulas.extend(cfg.extra_copulas.iter().cloned());
    for c in &copulas {
        let r = check_copula(c, COPULA_GRID);
        let (measured, detail) = match r.worst() {
            Some(v) => (
                if v.magnitude.is_nan() {
                    f64::INFINITY
                } else {
                    v.magnitude
                },
                format!(
                    "{} violations, worst {:?} at ({}, {})",
                    r.violations.len(),
                    v.kind,
                    v.a,
                    v.b
                ),
            ),
            None => (0.0, String::new()),
        };
        checks.push(CheckResult {
            name: format!("copula-validity[{}]", c.name()),
            passed: r.is_valid(),
            measured,
            limit: 0.0,
            detail,
        });
    }

    let ordering = {
        let pts = grid(0.0, 1.0, 101, Scale::Linear);
        let mut worst = 0.0f64;
        for &a in &pts {
            for &b in &pts {
                let (w, p, m) = (
                    Copula::W.eval(a, b).unwrap_or(f64::NAN),
                    Copula::Pi.eval(a, b).unwrap_or(f64::NAN),
                    Copula::M.eval(a, b).unwrap_or(f64::NAN),
                );
                worst = worst.max(w - p).max(p - m);
            }
        }
        worst
    };
    checks.push(check(
        "frechet-ordering W<=Pi<=M",
        ordering,
        VALIDITY_EPS,
        "",
    ));

    checks.push(guarded(
        "closed-vs-numerical[uniform sum]",
        AGREEMENT_TOL,
        || {
            let fx = Marginal::uniform(1.0, 3.0)?;
            let fy = Marginal::uniform(2.0, 5.0)?;
            let mut worst = 0.0f64;
            for s in grid(0.0, 20.0, 201, Scale::Linear) {
                let c = closed_form_sum_uniform(&fx, &fy, s)?;
                let g = numerical_bounds(&fx, &fy, &BinaryOp::Sum, s, tol)?;
                worst = worst
                    .max((c.lower - g.lower).abs())
                    .max((c.upper - g.upper).abs());
            }
            Ok((worst, "201 points on [0, 20]".into()))
        },
    ));

    for (lx, ly) in [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0)] {
        let name = format!("closed-vs-numerical[exp({lx})+exp({ly})]");
        checks.push(guarded(&name, AGREEMENT_TOL, || {
            let fx = Marginal::exponential(lx)?;
            let fy = Marginal::exponential(ly)?;
            let mut worst = 0.0f64;
            for s in grid(0.01, 20.0, 100, Scale::Linear) {
                let c = closed_form_sum_exponential(&fx, &fy, s)?;
                let g = numerical_bounds(&fx, &fy, &BinaryOp::Sum, s, tol)?;
                worst = worst
                    .max((c.lower - g.lower).abs())
                    .max((c.upper - g.upper).abs());
            }
            Ok((worst, "100 points on [0.01, 20]".into()))
        }));
    }

    checks.push(guarded("mac closed-vs-numerical", AGREEMENT_TOL, || {
        let mut worst = 0.0f64;
        let cases = [
            (1.0, 1.0, 1.0, 1.0),
            (1.0, 2.0, 0.5, 1.5),
            (0.5, 3.0, 2.0, 0.3),
            (10.0, 10.0, 1.0, 1.0),
            (0.2, 0.7, 0.1, 0.1),
        ];
        for (lx, ly, r1, r2) in cases {
            let (lo, hi) = mac_outage_bounds_numerical(
                &Marginal::exponential(lx)?,
                &Marginal::exponential(ly)?,
                r1,
                r2,
                tol,
                crate::bounds::DEFAULT_GRID_N,
            )?;
            worst = worst
                .max((lo - mac_outage_lower(lx, ly, r1, r2)?).abs())
                .max((hi - mac_outage_upper(lx, ly, r1, r2)?).abs());
        }
        Ok((worst, format!("{} parameter sets", cases.len())))
    }));

    checks.push(guarded(
        "ris ordering lower<=independent<=upper",
        1e-9,
        || {
            let mut worst = f64::NEG_INFINITY;
            for rate in grid(1e-3, 10.0, 50, Scale::Log) {
                let rc = RateConfig::with_snr_db(rate, 0.0)?;
                let b = ris_outage_bounds(1.0, 1.0, rc, tol)?;
                let ind = ris_independent_outage(1.0, 1.0, rc)?;
                worst = worst.max(b.lower - ind).max(ind - b.upper);
            }
            Ok((worst.max(0.0), "50 log-spaced rates in [1e-3, 10]".into()))
        },
    ));

    let bessel = grid(1.5, 2.5, 101, Scale::Linear)
        .into_iter()
        .map(|x| {
            let (a, b) = (bessel_k1_series(x), bessel_k1_large(x));
            ((a - b) / b).abs()
        })
        .fold(0.0, f64::max);
    checks.push(check(
        "bessel-k1 branch overlap on [1.5, 2.5]",
        bessel,
        1e-9,
        "relative",
    ));

    let uniform = (Marginal::uniform(1.0, 3.0), Marginal::uniform(2.0, 5.0));
    let exp1 = Marginal::exponential(1.0);
    let joints: Vec<(&str, Result<AttainingJoint>)> = vec![
        (
            "uniform sum lower at s=6",
            uniform
                .0
                .and_then(|fx| AttainingJoint::for_lower(fx, uniform.1?, BinaryOp::Sum, 6.0, tol)),
        ),
        (
            "exp sum upper at s=0.1",
            exp1.clone()
                .and_then(|e| AttainingJoint::for_upper(e, e, BinaryOp::Sum, 0.1, tol)),
        ),
        (
            "exp sum lower at s=3",
            exp1.and_then(|e| AttainingJoint::for_lower(e, e, BinaryOp::Sum, 3.0, tol)),
        ),
    ];
    let dkw = (f64::ln(2.0 / DKW_ALPHA) / (2.0 * n as f64)).sqrt();
    let marginal_limit = MARGINAL_AUDIT_FLOOR.max(dkw);
    for (k, (label, joint)) in joints.into_iter().enumerate() {
        let name = format!("attainment[{label}]");
        checks.push(match &joint {
            Ok(j) => {
                let mut rng = base.derive(100 + k as u64);
                match audit_attainment(j, n, &mut rng) {
                    Ok(r) => check(
                        &name,
                        r.sigmas(),
                        crate::worstcase::ATTAINMENT_SIGMAS,
                        format!(
                            "target={} empirical={}",
                            format_number(r.target),
                            format_number(r.empirical)
                        ),
                    ),
                    Err(e) => CheckResult {
                        name,
                        passed: false,
                        measured: f64::NAN,
                        limit: crate::worstcase::ATTAINMENT_SIGMAS,
                        detail: format!("error: {e}"),
                    },
                }
            }
            Err(e) => CheckResult {
                name,
                passed: false,
                measured: f64::NAN,
                limit: crate::worstcase::ATTAINMENT_SIGMAS,
                detail: format!("error: {e}"),
            },
        });
        if let Ok(j) = &joint {
            let mut rng = base.derive(200 + k as u64);
            let a = marginal_audit(j, n, &mut rng);
            checks.push(check(
                format!("marginal-audit[{label}]"),
                a.max_deviation(),
                marginal_limit,
                "Kolmogorov-Smirnov distance",
            ));
        }
    }

    let mixtures: Vec<(String, Vec<(f64, Copula)>)> = vec![
        ("W".into(), vec![(1.0, Copula::W)]),
        ("M".into(), vec![(1.0, Copula::M)]),
        ("Pi".into(), vec![(1.0, Copula::Pi)]),
        (
            "0.3W+0.3M+0.4Pi".into(),
            vec![(0.3, Copula::W), (0.3, Copula::M), (0.4, Copula::Pi)],
        ),
        ("0.5W+0.5M".into(), vec![(0.5, Copula::W), (0.5, Copula::M)]),
    ];
    for (k, (label, mix)) in mixtures.iter().enumerate() {
        let name = format!("containment[exp(1)+exp(1) under {label}]");
        checks.push(guarded(&name, CONTAINMENT_SIGMAS, || {
            let e = Marginal::exponential(1.0)?;
            let mut rng = base.derive(300 + k as u64);
            let mut sums: Vec<f64> = (0..n)
                .map(|_| {
                    let (u, v) = sample_mixture(mix, &mut rng).expect("samplable mixture");
                    e.quantile_unchecked(u) + e.quantile_unchecked(v)
                })
                .collect();
            sums.sort_by(f64::total_cmp);
            let nf = n as f64;
            let mut worst = 0.0f64;
            for s in grid(0.05, 8.0, 60, Scale::Linear) {
                let b = closed_form_sum_exponential(&e, &e, s)?;
                let emp = sums.partition_point(|&x| x < s) as f64 / nf;
                let sd = |p: f64| (p * (1.0 - p)).max(1.0 / nf).sqrt() / nf.sqrt();
                let below = (b.lower - emp) / sd(b.lower);
                let above = (emp - b.upper) / sd(b.upper);
                worst = worst.max(below).max(above);
            }
            Ok((worst, "sigmas outside the band, 60 thresholds".into()))
        }));
    }

    VerifyReport {
        seed: cfg.seed,
        samples: n,
        checks,
    }
}
