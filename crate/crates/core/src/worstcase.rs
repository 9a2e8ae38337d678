//! Joint distributions that attain the bounds at a single threshold.
//!
//! Both constructions draw one uniform `W` and map it through the marginal
//! quantiles, so each coordinate is marginally exact. The copula is split
//! into a comonotone piece and a countermonotone piece:
//!
//! * lower bound `t`: `W <= t` goes comonotone below the level curve, the
//!   rest is paired countermonotonically (`W` with `1 + t - W`) on or above it;
//! * upper bound `m`: `W <= m` is paired countermonotonically (`W` with
//!   `m - W`) below the curve, the rest goes comonotone above it.
//!
//! Attainment only holds at the chosen threshold.

use crate::bounds::{compute_bounds, BinaryOp, BoundResult};
use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::numerics::{RandomSource, Tolerance};

/// Quantile arguments are capped here for unbounded marginals.
pub const QUANTILE_CAP: f64 = 1.0 - 1e-12;

/// Binomial sigmas tolerated between the sampled and the target probability.
pub const ATTAINMENT_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    LowerBound(f64),
    UpperBound(f64),
}

impl Target {
    pub fn probability(&self) -> f64 {
        match *self {
            Target::LowerBound(p) | Target::UpperBound(p) => p,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttainingJoint {
    pub fx: Marginal,
    pub fy: Marginal,
    pub op: BinaryOp,
    pub threshold: f64,
    pub target: Target,
    /// `F_X(x*)` at the bound's optimizing point, when the level curve meets
    /// the support.
    pub split: Option<f64>,
}

impl AttainingJoint {
    pub fn new(
        fx: Marginal,
        fy: Marginal,
        op: BinaryOp,
        threshold: f64,
        target: Target,
    ) -> Result<Self> {
        let p = target.probability();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "target probability {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            fx,
            fy,
            op,
            threshold,
            target,
            split: None,
        })
    }

    /// Construction attaining the lower bound at `s`.
    pub fn for_lower(
        fx: Marginal,
        fy: Marginal,
        op: BinaryOp,
        s: f64,
        tol: Tolerance,
    ) -> Result<Self> {
        let r = compute_bounds(&fx, &fy, &op, s, tol)?;
        Self::from_bound(
            fx,
            fy,
            op,
            &r,
            Target::LowerBound(r.lower),
            r.lower_argpoint,
        )
    }

    /// Construction attaining the upper bound at `s`.
    pub fn for_upper(
        fx: Marginal,
        fy: Marginal,
        op: BinaryOp,
        s: f64,
        tol: Tolerance,
    ) -> Result<Self> {
        let r = compute_bounds(&fx, &fy, &op, s, tol)?;
        Self::from_bound(
            fx,
            fy,
            op,
            &r,
            Target::UpperBound(r.upper),
            r.upper_argpoint,
        )
    }

    fn from_bound(
        fx: Marginal,
        fy: Marginal,
        op: BinaryOp,
        r: &BoundResult,
        target: Target,
        argpoint: Option<(f64, f64)>,
    ) -> Result<Self> {
        let mut j = Self::new(fx, fy, op, r.threshold, target)?;
        j.split = argpoint.map(|(x, _)| j.fx.cdf(x));
        Ok(j)
    }

    fn draw(m: &Marginal, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if m.support().1.is_finite() {
            m.quantile_unchecked(p)
        } else {
            m.quantile_unchecked(p.min(QUANTILE_CAP))
        }
    }

    /// One pair from whichever construction matches the target.
    pub fn sample(&self, rng: &mut RandomSource) -> (f64, f64) {
        let w = rng.next_uniform();
        let x = Self::draw(&self.fx, w);
        let v = match self.target {
            Target::LowerBound(t) => {
                if w <= t {
                    w
                } else {
                    1.0 + t - w
                }
            }
            Target::UpperBound(m) => {
                if w <= m {
                    m - w
                } else {
                    w
                }
            }
        };
        (x, Self::draw(&self.fy, v))
    }
}

pub fn sample_lower_attaining(j: &AttainingJoint, rng: &mut RandomSource) -> Result<(f64, f64)> {
    match j.target {
        Target::LowerBound(_) => Ok(j.sample(rng)),
        Target::UpperBound(_) => Err(Error::InvalidParameter(
            "joint was built for the upper bound".into(),
        )),
    }
}

pub fn sample_upper_attaining(j: &AttainingJoint, rng: &mut RandomSource) -> Result<(f64, f64)> {
    match j.target {
        Target::UpperBound(_) => Ok(j.sample(rng)),
        Target::LowerBound(_) => Err(Error::InvalidParameter(
            "joint was built for the lower bound".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttainmentReport {
    pub samples: usize,
    pub target: f64,
    pub empirical: f64,
    /// Binomial standard error at the target probability, floored at `1/n`.
    pub sigma: f64,
}

impl AttainmentReport {
    pub fn sigmas(&self) -> f64 {
        (self.empirical - self.target).abs() / self.sigma
    }
}

/// Sample `n` pairs and compare the empirical `P(L(X, Y) < s)` with the target.
///
/// Fails with [`Error::ConstructionUnverified`] beyond
/// [`ATTAINMENT_SIGMAS`] standard errors.
pub fn audit_attainment(
    j: &AttainingJoint,
    n: usize,
    rng: &mut RandomSource,
) -> Result<AttainmentReport> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "audit needs at least one sample".into(),
        ));
    }
    let hits = (0..n)
        .filter(|_| {
            let (x, y) = j.sample(rng);
            j.op.apply(x, y) < j.threshold
        })
        .count();
    let nf = n as f64;
    let target = j.target.probability();
    let report = AttainmentReport {
        samples: n,
        target,
        empirical: hits as f64 / nf,
        sigma: ((target * (1.0 - target)).max(1.0 / nf) / nf).sqrt(),
    };
    if report.sigmas() > ATTAINMENT_SIGMAS {
        return Err(Error::ConstructionUnverified {
            empirical: report.empirical,
            target,
            sigmas: report.sigmas(),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub samples: usize,
    /// Kolmogorov–Smirnov distance of the first coordinate to `F_X`.
    pub sup_dev_x: f64,
    pub sup_dev_y: f64,
}

impl AuditReport {
    pub fn max_deviation(&self) -> f64 {
        self.sup_dev_x.max(self.sup_dev_y)
    }
}

/// Sup-distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Draw `n` pairs and measure how far each coordinate's empirical CDF is
/// from the prescribed marginal.
pub fn marginal_audit(j: &AttainingJoint, n: usize, rng: &mut RandomSource) -> AuditReport {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n).map(|_| j.sample(rng)).unzip();
    AuditReport {
        samples: n,
        sup_dev_x: ks_distance(xs, |x| j.fx.cdf(x)),
        sup_dev_y: ks_distance(ys, |y| j.fy.cdf(y)),
    }
}
