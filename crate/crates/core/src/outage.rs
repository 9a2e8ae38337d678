//! Outage scenarios mapped onto threshold-space bound computations.
//!
//! All rates are in bits per channel use and thresholds use base 2:
//! a rate `R` at linear SNR `xi` needs a channel gain of at least
//! `(2^R - 1) / xi`.

use crate::bounds::{closed_form_sum_exponential, numerical_bounds, BinaryOp, BoundResult};
use crate::error::{domain, Error, Result};
use crate::marginals::Marginal;
use crate::numerics::{bessel_k1, maximize_scalar, minimize_scalar, RandomSource, Tolerance};

/// Minimum sample count accepted by the Monte Carlo estimator.
pub const MIN_MC_SAMPLES: usize = 10_000;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `2^rate - 1`, accurate for small rates.
fn rate_threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

fn check_rate(label: &str, rate: f64) -> Result<()> {
    if rate >= 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "{label} must be a finite rate >= 0 (got {rate})"
        )))
    }
}

/// Transmission rate and linear SNR of a single link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    pub rate: f64,
    pub snr: f64,
}

impl RateConfig {
    pub fn new(rate: f64, snr: f64) -> Result<Self> {
        check_rate("rate", rate)?;
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(domain(format!(
                "snr must be a finite value > 0 (got {snr})"
            )));
        }
        Ok(Self { rate, snr })
    }

    pub fn with_snr_db(rate: f64, snr_db: f64) -> Result<Self> {
        Self::new(rate, db_to_linear(snr_db))
    }

    /// Gain threshold `s = (2^R - 1) / xi`.
    pub fn threshold(&self) -> f64 {
        rate_threshold(self.rate) / self.snr
    }
}

/// Thresholds of the three MAC outage events for rates `R1`, `R2`:
/// `alpha = 2^R1 - 1`, `beta = 2^R2 - 1`, `s = 2^(R1+R2) - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacThresholds {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
}

impl MacThresholds {
    pub fn from_rates(r1: f64, r2: f64) -> Result<Self> {
        check_rate("r1", r1)?;
        check_rate("r2", r2)?;
        let alpha = rate_threshold(r1);
        let beta = rate_threshold(r2);
        // s = alpha + beta + alpha * beta, so s - alpha >= beta exactly.
        Ok(Self {
            alpha,
            beta,
            s: alpha + beta + alpha * beta,
        })
    }
}

/// Linear correlation model for two Rayleigh links sharing a common
/// reference component with weight `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel {
    rho: f64,
}

impl CorrelationModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(domain(format!("rho must lie in [0, 1] (got {rho})")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

fn exp_pair(lx: f64, ly: f64) -> Result<(Marginal, Marginal)> {
    Ok((Marginal::exponential(lx)?, Marginal::exponential(ly)?))
}

/// Point-to-point outage `P(X + Y < s)` over two Rayleigh links.
pub fn p2p_outage_bounds(lx: f64, ly: f64, cfg: RateConfig) -> Result<BoundResult> {
    let (fx, fy) = exp_pair(lx, ly)?;
    closed_form_sum_exponential(&fx, &fy, cfg.threshold())
}

/// Lower MAC bound split into its three boundary-segment maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacLowerBound {
    pub thresholds: MacThresholds,
    /// Unconstrained stationary point on the `x + y = s` segment.
    pub y_opt: f64,
    /// `y_opt` clamped to `[beta, s - alpha]`.
    pub y_star: f64,
    /// `F_X(alpha)`: supremum over the vertical part `x = alpha`.
    pub first_user: f64,
    /// `g(s - y*, y*)` on the sum-rate part.
    pub sum_rate: f64,
    /// `F_Y(beta)`: supremum over the horizontal part `y = beta`.
    pub second_user: f64,
}

impl MacLowerBound {
    pub fn value(&self) -> f64 {
        self.first_user.max(self.sum_rate).max(self.second_user)
    }
}

pub fn mac_lower_breakdown(lx: f64, ly: f64, r1: f64, r2: f64) -> Result<MacLowerBound> {
    let th = MacThresholds::from_rates(r1, r2)?;
    let (fx, fy) = exp_pair(lx, ly)?;
    let MacThresholds { alpha, beta, s } = th;

    let y_opt = (lx * s + (ly / lx).ln()) / (lx + ly);
    let y_star = if y_opt <= beta {
        beta
    } else if y_opt < s - alpha {
        y_opt
    } else {
        s - alpha
    };
    let g = |x: f64, y: f64| (fx.cdf(x) + fy.cdf(y) - 1.0).max(0.0);

    Ok(MacLowerBound {
        thresholds: th,
        y_opt,
        y_star,
        first_user: fx.cdf(alpha),
        sum_rate: g(s - y_star, y_star),
        second_user: fy.cdf(beta),
    })
}

/// Best-case outage of the two-user MAC with Rayleigh links.
pub fn mac_outage_lower(lx: f64, ly: f64, r1: f64, r2: f64) -> Result<f64> {
    Ok(mac_lower_breakdown(lx, ly, r1, r2)?.value())
}

/// Worst-case outage of the two-user MAC with Rayleigh links:
/// `min(F_X(alpha) + F_Y(s - alpha), F_X(s - beta) + F_Y(beta), 1)`.
pub fn mac_outage_upper(lx: f64, ly: f64, r1: f64, r2: f64) -> Result<f64> {
    let MacThresholds { alpha, beta, s } = MacThresholds::from_rates(r1, r2)?;
    let (fx, fy) = exp_pair(lx, ly)?;
    Ok((fx.cdf(alpha) + fy.cdf(s - alpha))
        .min(fx.cdf(s - beta) + fy.cdf(beta))
        .min(1.0))
}

/// MAC bounds for arbitrary marginals: the two rays of the outage boundary
/// contribute `F_X(alpha)` / `F_Y(beta)` to the lower bound and their corner
/// values to the upper one; the sum-rate segment is searched numerically.
pub fn mac_outage_bounds_numerical(
    fx: &Marginal,
    fy: &Marginal,
    r1: f64,
    r2: f64,
    tol: Tolerance,
    grid_n: usize,
) -> Result<(f64, f64)> {
    let MacThresholds { alpha, beta, s } = MacThresholds::from_rates(r1, r2)?;
    let (lo, hi) = (beta, s - alpha);
    let sum = |y: f64| fx.cdf(s - y) + fy.cdf(y);
    let (_, seg_max) = maximize_scalar(sum, lo, hi.max(lo), tol, grid_n)?;
    let (_, seg_min) = minimize_scalar(sum, lo, hi.max(lo), tol, grid_n)?;

    let lower = fx
        .cdf(alpha)
        .max(fy.cdf(beta))
        .max((seg_max - 1.0).max(0.0));
    let upper = (fx.cdf(alpha) + fy.cdf(s - alpha))
        .min(fx.cdf(s - beta) + fy.cdf(beta))
        .min(seg_min)
        .min(1.0);
    Ok((lower, upper))
}

/// Outage of the single-element RIS link `log2(1 + xi X Y) < R` with
/// independent Rayleigh hops: `1 - z K1(z)`, `z = 2 sqrt(lx ly s)`.
pub fn ris_independent_outage(lx: f64, ly: f64, cfg: RateConfig) -> Result<f64> {
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(domain(format!(
            "rates of the exponential gains must be > 0 (got {lx}, {ly})"
        )));
    }
    let s = cfg.threshold();
    if s == 0.0 {
        return Ok(0.0);
    }
    let z = 2.0 * (lx * ly * s).sqrt();
    Ok((1.0 - z * bessel_k1(z)?).clamp(0.0, 1.0))
}

/// Dependence-free bounds on the RIS outage, `P(X Y < s)`.
pub fn ris_outage_bounds(lx: f64, ly: f64, cfg: RateConfig, tol: Tolerance) -> Result<BoundResult> {
    let (fx, fy) = exp_pair(lx, ly)?;
    numerical_bounds(&fx, &fy, &BinaryOp::Product, cfg.threshold(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `P(X + Y < s)` for the linearly correlated
/// Rayleigh model
///
/// ```text
/// h_i = (sqrt(1 - rho) x_i + sqrt(rho) x_0) + j (sqrt(1 - rho) y_i + sqrt(rho) y_0)
/// ```
///
/// with all real components i.i.d. `N(0, 1/2)`, `X = |h_x|^2`, `Y = |h_y|^2`.
/// Both gains are unit-mean exponentials for every `rho`.
pub fn correlated_rayleigh_outage_mc(
    model: CorrelationModel,
    cfg: RateConfig,
    n: usize,
    rng: &mut RandomSource,
) -> Result<McEstimate> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_MC_SAMPLES} samples required (got {n})"
        )));
    }
    let s = cfg.threshold();
    let own = (1.0 - model.rho).sqrt();
    let shared = model.rho.sqrt();
    let mut hits = 0usize;
    for _ in 0..n {
        let x0 = rng.next_gaussian(0.0, 0.5);
        let y0 = rng.next_gaussian(0.0, 0.5);
        let mut gain = || {
            let re = own * rng.next_gaussian(0.0, 0.5) + shared * x0;
            let im = own * rng.next_gaussian(0.0, 0.5) + shared * y0;
            re * re + im * im
        };
        let x = gain();
        let y = gain();
        if x + y < s {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok(McEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: f64 = 0.632_120_558_828_557_7; // 1 - e^-1

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(10.0), 10.0);
        assert_eq!(db_to_linear(0.0), 1.0);
    }

    #[test]
    fn threshold_convention() {
        let cfg = RateConfig::with_snr_db(1.0, 10.0).unwrap();
        assert!((cfg.threshold() - 0.1).abs() < 1e-16);
        assert!(RateConfig::new(-1.0, 1.0).is_err());
        assert!(RateConfig::new(1.0, 0.0).is_err());
    }

    #[test]
    fn p2p_reference_point() {
        let r = p2p_outage_bounds(1.0, 1.0, RateConfig::with_snr_db(1.0, 10.0).unwrap()).unwrap();
        assert_eq!(r.lower, 0.0);
        assert!((r.upper - 0.095_162_581_964_040_44).abs() < 1e-12);
    }

    #[test]
    fn p2p_zero_rate() {
        let r = p2p_outage_bounds(1.0, 1.0, RateConfig::new(0.0, 10.0).unwrap()).unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
    }

    #[test]
    fn p2p_low_snr() {
        let r = p2p_outage_bounds(1.0, 1.0, RateConfig::new(1.0, 0.1).unwrap()).unwrap();
        assert!((r.lower - 0.986_524_106_001_829).abs() < 1e-10);
        assert!((r.upper - 0.999_954_600_070_237_5).abs() < 1e-12);
    }

    #[test]
    fn mac_symmetric_case() {
        let b = mac_lower_breakdown(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            b.thresholds,
            MacThresholds {
                alpha: 1.0,
                beta: 1.0,
                s: 3.0
            }
        );
        assert!((b.y_star - 1.5).abs() < 1e-15);
        assert!((b.sum_rate - (1.0 - 2.0 * (-1.5f64).exp())).abs() < 1e-12);
        assert!((b.value() - E1).abs() < 1e-9);
        assert_eq!(mac_outage_upper(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn mac_low_clamp_branch() {
        let b = mac_lower_breakdown(1.0, 4.0, 1.0, 1.0).unwrap();
        assert!((b.y_opt - (3.0 + 4f64.ln()) / 5.0).abs() < 1e-15);
        assert_eq!(b.y_star, 1.0);
        let g = (1.0 - (-2.0f64).exp()) + (1.0 - (-4.0f64).exp()) - 1.0;
        assert!((b.sum_rate - g).abs() < 1e-12);
        assert!((b.value() - (1.0 - (-4.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn mac_single_user_limit() {
        let v = mac_outage_lower(1.0, 1.0, 0.0, 1.5).unwrap();
        let beta = 2f64.powf(1.5) - 1.0;
        assert!((v - (1.0 - (-beta).exp())).abs() < 1e-12);
        assert_eq!(mac_outage_upper(1.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn mac_high_rate_parameters() {
        let lo = mac_outage_lower(10.0, 10.0, 1.0, 1.0).unwrap();
        let hi = mac_outage_upper(10.0, 10.0, 1.0, 1.0).unwrap();
        assert_eq!(hi, 1.0);
        assert!(lo <= hi);
    }

    #[test]
    fn mac_rejects_negative_rates() {
        assert!(matches!(
            mac_outage_lower(1.0, 1.0, -0.1, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(mac_outage_upper(1.0, 1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn mac_numerical_path_agrees() {
        let tol = Tolerance::default();
        for &(lx, ly, r1, r2) in &[
            (1.0, 1.0, 1.0, 1.0),
            (1.0, 4.0, 1.0, 1.0),
            (0.3, 2.0, 0.5, 2.0),
        ] {
            let (fx, fy) = exp_pair(lx, ly).unwrap();
            let (lo, hi) = mac_outage_bounds_numerical(&fx, &fy, r1, r2, tol, 257).unwrap();
            assert!((lo - mac_outage_lower(lx, ly, r1, r2).unwrap()).abs() < 1e-9);
            assert!((hi - mac_outage_upper(lx, ly, r1, r2).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn ris_independent_values() {
        let one = RateConfig::new(1.0, 1.0).unwrap();
        let v = ris_independent_outage(1.0, 1.0, one).unwrap();
        assert!((v - 0.720_268_236_366_955_1).abs() < 1e-8);
        // s = 4: 1 - 4 K1(4)
        let four = RateConfig::new(5f64.log2(), 1.0).unwrap();
        let v = ris_independent_outage(1.0, 1.0, four).unwrap();
        assert!((v - 0.950_066_004_450_926_3).abs() < 1e-6);
        assert_eq!(
            ris_independent_outage(1.0, 1.0, RateConfig::new(0.0, 1.0).unwrap()).unwrap(),
            0.0
        );
        let tiny = RateConfig::new(1e-9, 1.0).unwrap();
        assert!(ris_independent_outage(1.0, 1.0, tiny).unwrap() < 1e-7);
        assert!(ris_independent_outage(0.0, 1.0, one).is_err());
    }

    #[test]
    fn ris_bounds_zero_rate() {
        let r = ris_outage_bounds(
            1.0,
            1.0,
            RateConfig::new(0.0, 1.0).unwrap(),
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
    }

    #[test]
    fn correlation_model_validation() {
        assert!(CorrelationModel::new(-0.1).is_err());
        assert!(CorrelationModel::new(1.1).is_err());
        let cfg = RateConfig::new(1.0, 10.0).unwrap();
        let mut rng = RandomSource::new(1);
        let m = CorrelationModel::new(0.5).unwrap();
        assert!(correlated_rayleigh_outage_mc(m, cfg, 100, &mut rng).is_err());
    }

    #[test]
    fn correlation_model_limits() {
        let cfg = RateConfig::with_snr_db(1.0, 10.0).unwrap();
        let s: f64 = 0.1;
        let cases = [
            (0.0, 1.0 - (-s).exp() * (1.0 + s)),
            (1.0, 1.0 - (-s / 2.0).exp()),
        ];
        for (i, (rho, want)) in cases.into_iter().enumerate() {
            let mut rng = RandomSource::new(77 + i as u64);
            let m = CorrelationModel::new(rho).unwrap();
            let est = correlated_rayleigh_outage_mc(m, cfg, 400_000, &mut rng).unwrap();
            assert!(
                (est.estimate - want).abs() <= 3.0 * est.stderr.max(1e-12),
                "rho {rho}: {est:?} vs {want}"
            );
        }
    }
}
