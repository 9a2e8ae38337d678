//! Dependence-free bounds on `P(L(X, Y) < s)`.
//!
//! For marginals `F_X`, `F_Y` and a binary operation `L` that is continuous
//! and non-decreasing in each place, every joint distribution satisfies
//!
//! ```text
//! sup_{L(x,y)=s} W(F_X(x), F_Y(y))  <=  P(L(X,Y) < s)  <=  inf_{L(x,y)=s} W~(F_X(x), F_Y(y))
//! ```
//!
//! with `W(a, b) = max(a + b - 1, 0)` and its dual `W~(a, b) = min(a + b, 1)`.
//! Both sides are attained pointwise in `s`.
//!
//! The generic path parameterizes the level curve by `x` and runs a grid scan
//! plus golden-section refinement. When the `x`-range of the curve is
//! unbounded the search runs over `u = F_X(x)` instead, which compactifies it
//! to a sub-interval of [0, 1].

use std::fmt;
use std::sync::Arc;

use crate::copulas::Copula;
use crate::error::{Error, LevelSide, Result};
use crate::marginals::Marginal;
use crate::numerics::{maximize_scalar, minimize_scalar, Tolerance};

/// Coarse grid size for the level-curve search.
pub const DEFAULT_GRID_N: usize = 257;

/// Opening applied to a search interval endpoint where the level curve is
/// singular (e.g. `x = 0` for the product).
pub const ENDPOINT_EPS: f64 = 1e-12;

type OpFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type SolveFn = dyn Fn(f64, f64) -> Option<f64> + Send + Sync;

/// Binary operation `L` combining the two gains.
#[derive(Clone)]
pub enum BinaryOp {
    Sum,
    Product,
    /// `f` must be continuous and non-decreasing in each argument;
    /// `solve_y(x, s)` returns the `y` with `f(x, y) = s`, if any.
    Custom {
        name: String,
        f: Arc<OpFn>,
        solve_y: Arc<SolveFn>,
    },
}

impl BinaryOp {
    pub fn custom<F, S>(name: impl Into<String>, f: F, solve_y: S) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64) -> Option<f64> + Send + Sync + 'static,
    {
        BinaryOp::Custom {
            name: name.into(),
            f: Arc::new(f),
            solve_y: Arc::new(solve_y),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            BinaryOp::Sum => "sum",
            BinaryOp::Product => "product",
            BinaryOp::Custom { name, .. } => name,
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> f64 {
        match self {
            BinaryOp::Sum => x + y,
            BinaryOp::Product => x * y,
            BinaryOp::Custom { f, .. } => f(x, y),
        }
    }

    /// The `y` on the level curve `L(x, y) = s`.
    pub fn solve_y(&self, x: f64, s: f64) -> Option<f64> {
        match self {
            BinaryOp::Sum => Some(s - x),
            BinaryOp::Product => (x > 0.0).then(|| s / x),
            BinaryOp::Custom { solve_y, .. } => solve_y(x, s),
        }
    }

    /// `x`-range of the level curve inside the support rectangle, or the
    /// side of the range of `L` that `s` falls on when the curve misses it.
    fn level_x_range(&self, fx: &Marginal, fy: &Marginal, s: f64) -> Result<(f64, f64)> {
        let (xlo, xhi) = fx.support();
        let (ylo, yhi) = fy.support();
        let lmin = self.apply(xlo, ylo);
        let lmax = self.apply(xhi, yhi);
        if s <= lmin {
            return Err(Error::EmptyLevelSet {
                s,
                side: LevelSide::Below,
            });
        }
        if s >= lmax {
            return Err(Error::EmptyLevelSet {
                s,
                side: LevelSide::Above,
            });
        }
        let (a, b) = match self {
            BinaryOp::Sum => (xlo.max(s - yhi), xhi.min(s - ylo)),
            BinaryOp::Product => {
                let b = if ylo > 0.0 { xhi.min(s / ylo) } else { xhi };
                (xlo.max(s / yhi), b)
            }
            BinaryOp::Custom { .. } => (xlo, xhi),
        };
        Ok((a, b))
    }
}

impl fmt::Debug for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryOp({})", self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Numerical,
}

/// One side of the bound together with the level-curve point attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelBound {
    pub value: f64,
    /// `None` when the level curve misses the support and the bound is 0 or 1.
    pub argpoint: Option<(f64, f64)>,
}

impl LevelBound {
    fn empty(side: LevelSide) -> Self {
        LevelBound {
            value: match side {
                LevelSide::Below => 0.0,
                LevelSide::Above => 1.0,
            },
            argpoint: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_argpoint: Option<(f64, f64)>,
    pub upper_argpoint: Option<(f64, f64)>,
    pub method: Method,
}

impl BoundResult {
    fn from_sides(s: f64, lower: LevelBound, upper: LevelBound, method: Method) -> Self {
        BoundResult {
            threshold: s,
            lower: lower.value,
            upper: upper.value,
            lower_argpoint: lower.argpoint,
            upper_argpoint: upper.argpoint,
            method,
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Sup,
    Inf,
}

/// Optimize `C(F_X(x), F_Y(y))` (sup) or its dual (inf) over the level curve.
fn level_curve_extremum(
    copula: &Copula,
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    direction: Direction,
    tol: Tolerance,
    grid_n: usize,
) -> Result<LevelBound> {
    check_non_negative(fx)?;
    check_non_negative(fy)?;
    if s.is_nan() {
        return Err(Error::InvalidParameter("threshold is NaN".into()));
    }
    let (a, b) = match op.level_x_range(fx, fy, s) {
        Ok(r) => r,
        Err(Error::EmptyLevelSet { side, .. }) => return Ok(LevelBound::empty(side)),
        Err(e) => return Err(e),
    };

    let point = |x: f64| -> Option<(f64, f64)> {
        if !x.is_finite() {
            return None;
        }
        op.solve_y(x, s).filter(|y| !y.is_nan()).map(|y| (x, y))
    };
    let objective = |p: Option<(f64, f64)>| -> f64 {
        match p {
            Some((x, y)) => {
                let (u, v) = (fx.cdf(x), fy.cdf(y));
                match direction {
                    Direction::Sup => copula.eval_unchecked(u, v),
                    Direction::Inf => copula.dual_unchecked(u, v),
                }
            }
            None => f64::NAN,
        }
    };

    // Finite x-range: search in x. Otherwise: search in u = F_X(x).
    let in_cdf_space = !(a.is_finite() && b.is_finite());
    let to_x = |t: f64| {
        if in_cdf_space {
            fx.quantile_unchecked(t)
        } else {
            t
        }
    };
    let (mut lo, mut hi) = if in_cdf_space {
        (fx.cdf(a), fx.cdf(b))
    } else {
        (a, b)
    };
    let eps = if in_cdf_space {
        ENDPOINT_EPS
    } else {
        ENDPOINT_EPS * (hi - lo).abs().max(1.0)
    };
    if point(to_x(lo)).is_none() {
        lo = (lo + eps).min(hi);
    }
    if point(to_x(hi)).is_none() {
        hi = (hi - eps).max(lo);
    }

    let f = |t: f64| objective(point(to_x(t)));
    let (t, value) = match direction {
        Direction::Sup => maximize_scalar(f, lo, hi, tol, grid_n)?,
        Direction::Inf => minimize_scalar(f, lo, hi, tol, grid_n)?,
    };
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "level curve of {} at s = {s} has no evaluable point",
            op.name()
        )));
    }
    Ok(LevelBound {
        value: value.clamp(0.0, 1.0),
        argpoint: point(to_x(t)),
    })
}

fn check_non_negative(m: &Marginal) -> Result<()> {
    if m.support().0 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "marginal {m} has support below zero"
        )));
    }
    Ok(())
}

/// `sup_{L(x,y)=s} C(F_X(x), F_Y(y))` for an arbitrary copula `C`.
pub fn tau_bound(
    copula: &Copula,
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    tol: Tolerance,
    grid_n: usize,
) -> Result<LevelBound> {
    level_curve_extremum(copula, fx, fy, op, s, Direction::Sup, tol, grid_n)
}

/// `inf_{L(x,y)=s} C~(F_X(x), F_Y(y))` with `C~` the dual of `C`.
pub fn phi_bound(
    copula: &Copula,
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    tol: Tolerance,
    grid_n: usize,
) -> Result<LevelBound> {
    level_curve_extremum(copula, fx, fy, op, s, Direction::Inf, tol, grid_n)
}

/// Pointwise-tight lower bound on `P(L(X, Y) < s)`.
pub fn tau_lower(
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    tol: Tolerance,
) -> Result<LevelBound> {
    tau_bound(&Copula::W, fx, fy, op, s, tol, DEFAULT_GRID_N)
}

/// Pointwise-tight upper bound on `P(L(X, Y) < s)`.
pub fn phi_upper(
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    tol: Tolerance,
) -> Result<LevelBound> {
    phi_bound(&Copula::W, fx, fy, op, s, tol, DEFAULT_GRID_N)
}

/// Both bounds via the generic level-curve search.
pub fn numerical_bounds(
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    tol: Tolerance,
) -> Result<BoundResult> {
    let lower = tau_lower(fx, fy, op, s, tol)?;
    let upper = phi_upper(fx, fy, op, s, tol)?;
    Ok(BoundResult::from_sides(s, lower, upper, Method::Numerical))
}

/// Both bounds, using a closed form where one is known (sums of two uniform
/// or two exponential gains) and the generic search otherwise.
pub fn compute_bounds(
    fx: &Marginal,
    fy: &Marginal,
    op: &BinaryOp,
    s: f64,
    tol: Tolerance,
) -> Result<BoundResult> {
    match (op, fx, fy) {
        (BinaryOp::Sum, Marginal::Uniform { .. }, Marginal::Uniform { .. }) => {
            closed_form_sum_uniform(fx, fy, s)
        }
        (BinaryOp::Sum, Marginal::Exponential { .. }, Marginal::Exponential { .. }) => {
            closed_form_sum_exponential(fx, fy, s)
        }
        _ => numerical_bounds(fx, fy, op, s, tol),
    }
}

/// Sum of two uniforms. The lower bound is uniform on
/// `[min(x_min + y_max, y_min + x_max), x_max + y_max]`, the upper bound
/// uniform on `[x_min + y_min, max(x_min + y_max, y_min + x_max)]`.
pub fn closed_form_sum_uniform(fx: &Marginal, fy: &Marginal, s: f64) -> Result<BoundResult> {
    let (
        &Marginal::Uniform {
            min: xmin,
            max: xmax,
        },
        &Marginal::Uniform {
            min: ymin,
            max: ymax,
        },
    ) = (fx, fy)
    else {
        return Err(Error::TypeMismatch {
            expected: "uniform",
        });
    };

    let lower_start = (xmin + ymax).min(ymin + xmax);
    let lower_end = xmax + ymax;
    let upper_start = xmin + ymin;
    let upper_end = (xmin + ymax).max(ymin + xmax);
    let lower = ((s - lower_start) / (lower_end - lower_start)).clamp(0.0, 1.0);
    let upper = ((s - upper_start) / (upper_end - upper_start)).clamp(0.0, 1.0);

    let (lower_argpoint, upper_argpoint) = if s <= upper_start || s >= lower_end {
        (None, None)
    } else {
        // The objective is linear along x + y = s, so both extrema sit at
        // the ends of the segment inside the support rectangle.
        let x1 = xmin.max(s - ymax);
        let x2 = xmax.min(s - ymin);
        let g = |x: f64| fx.cdf(x) + fy.cdf(s - x);
        let (hi_end, lo_end) = if g(x2) >= g(x1) { (x2, x1) } else { (x1, x2) };
        (Some((hi_end, s - hi_end)), Some((lo_end, s - lo_end)))
    };

    Ok(BoundResult {
        threshold: s,
        lower,
        upper,
        lower_argpoint,
        upper_argpoint,
        method: Method::ClosedForm,
    })
}

/// Sum of two exponentials with scales `a = 1/rate_x`, `b = 1/rate_y`.
///
/// Lower: shifted exponential `max(0, 1 - exp(-(s - k) / (a + b)))` with
/// `k = (a + b) ln(a + b) - b ln b - a ln a`, attained at
/// `x* = (s / b + ln(b / a)) a b / (a + b)`.
/// Upper: `min(F_X(s), F_Y(s))`, exponential with rate `min(rate_x, rate_y)`.
pub fn closed_form_sum_exponential(fx: &Marginal, fy: &Marginal, s: f64) -> Result<BoundResult> {
    let (&Marginal::Exponential { rate: rate_x }, &Marginal::Exponential { rate: rate_y }) =
        (fx, fy)
    else {
        return Err(Error::TypeMismatch {
            expected: "exponential",
        });
    };
    if s.is_nan() {
        return Err(Error::InvalidParameter("threshold is NaN".into()));
    }
    if s <= 0.0 {
        return Ok(BoundResult {
            threshold: s,
            lower: 0.0,
            upper: 0.0,
            lower_argpoint: None,
            upper_argpoint: None,
            method: Method::ClosedForm,
        });
    }

    let scale_x = 1.0 / rate_x;
    let scale_y = 1.0 / rate_y;
    let total = scale_x + scale_y;
    let shift = total * total.ln() - scale_y * scale_y.ln() - scale_x * scale_x.ln();
    let lower = (-(-(s - shift) / total).exp_m1()).max(0.0);
    let x_star =
        ((s / scale_y + (scale_y / scale_x).ln()) * scale_x * scale_y / total).clamp(0.0, s);

    let (fxs, fys) = (fx.cdf(s), fy.cdf(s));
    let (upper, upper_argpoint) = if fxs <= fys {
        (fxs, (s, 0.0))
    } else {
        (fys, (0.0, s))
    };

    Ok(BoundResult {
        threshold: s,
        lower,
        upper,
        lower_argpoint: Some((x_star, s - x_star)),
        upper_argpoint: Some(upper_argpoint),
        method: Method::ClosedForm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(a: f64, b: f64) -> Marginal {
        Marginal::uniform(a, b).unwrap()
    }
    fn e(rate: f64) -> Marginal {
        Marginal::exponential(rate).unwrap()
    }
    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn uniform_sum_lower_at_six() {
        let lb = tau_lower(&u(1.0, 3.0), &u(2.0, 5.0), &BinaryOp::Sum, 6.0, tol()).unwrap();
        assert!((lb.value - 1.0 / 3.0).abs() < 1e-9);
        let (x, y) = lb.argpoint.unwrap();
        assert!((x - 3.0).abs() < 1e-6 && (y - 3.0).abs() < 1e-6);
    }

    #[test]
    fn exponential_sum_lower_below_shift() {
        let lb = tau_lower(&e(1.0), &e(1.0), &BinaryOp::Sum, 1.0, tol()).unwrap();
        assert_eq!(lb.value, 0.0);
    }

    #[test]
    fn uniform_product_lower_at_min() {
        let lb = tau_lower(&u(1.0, 3.0), &u(2.0, 5.0), &BinaryOp::Product, 2.0, tol()).unwrap();
        assert_eq!(lb.value, 0.0);
    }

    #[test]
    fn uniform_sum_upper_at_four() {
        let ub = phi_upper(&u(1.0, 3.0), &u(2.0, 5.0), &BinaryOp::Sum, 4.0, tol()).unwrap();
        assert!((ub.value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_sum_upper_small_threshold() {
        let ub = phi_upper(&e(1.0), &e(1.0), &BinaryOp::Sum, 0.1, tol()).unwrap();
        assert!((ub.value - 0.095_162_581_964_040_44).abs() < 1e-6);
    }

    #[test]
    fn below_range_gives_zero_for_every_op() {
        let ops = [
            BinaryOp::Sum,
            BinaryOp::Product,
            BinaryOp::custom("max", f64::max, |x: f64, s: f64| (x <= s).then_some(s)),
        ];
        for op in ops {
            let r = numerical_bounds(&u(1.0, 3.0), &u(2.0, 5.0), &op, 0.5, tol()).unwrap();
            assert_eq!((r.lower, r.upper), (0.0, 0.0), "{op:?}");
            assert!(r.lower_argpoint.is_none());
        }
    }

    #[test]
    fn above_range_gives_one() {
        let r =
            numerical_bounds(&u(1.0, 3.0), &u(2.0, 5.0), &BinaryOp::Product, 20.0, tol()).unwrap();
        assert_eq!((r.lower, r.upper), (1.0, 1.0));
    }

    #[test]
    fn closed_form_uniform_supports() {
        let (x, y) = (u(1.0, 3.0), u(2.0, 5.0));
        let at = |s| closed_form_sum_uniform(&x, &y, s).unwrap();
        assert_eq!(at(5.0).lower, 0.0);
        assert_eq!(at(8.0).lower, 1.0);
        assert_eq!(at(3.0).upper, 0.0);
        assert_eq!(at(6.0).upper, 1.0);
        let mid = at(5.5);
        assert!((mid.lower - 1.0 / 6.0).abs() < 1e-12);
        // (5.5 - 3) / (6 - 3)
        assert!((mid.upper - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(mid.method, Method::ClosedForm);
    }

    #[test]
    fn closed_form_uniform_argpoints() {
        let r = closed_form_sum_uniform(&u(1.0, 3.0), &u(2.0, 5.0), 6.0).unwrap();
        assert_eq!(r.lower_argpoint, Some((3.0, 3.0)));
        assert_eq!(r.upper_argpoint, Some((1.0, 5.0)));
    }

    #[test]
    fn closed_forms_reject_wrong_families() {
        assert!(matches!(
            closed_form_sum_uniform(&e(1.0), &u(0.0, 1.0), 1.0),
            Err(Error::TypeMismatch { .. })
        ));
        assert!(matches!(
            closed_form_sum_exponential(&u(0.0, 1.0), &e(1.0), 1.0),
            Err(Error::TypeMismatch { .. })
        ));
    }

    #[test]
    fn closed_form_exponential_values() {
        let one = e(1.0);
        let r = closed_form_sum_exponential(&one, &one, 2.0 * 2f64.ln()).unwrap();
        assert!(r.lower.abs() < 1e-15);
        let r = closed_form_sum_exponential(&one, &one, 0.1).unwrap();
        assert!((r.upper - 0.095_162_581_964_040_44).abs() < 1e-15);
        assert_eq!(r.lower, 0.0);

        // k = 1.5 ln 1.5 - 0.5 ln 0.5
        let r = closed_form_sum_exponential(&e(1.0), &e(2.0), 10.0).unwrap();
        let k = 1.5 * 1.5f64.ln() - 0.5 * 0.5f64.ln();
        assert!((k - 0.954_771_252_442_219_2).abs() < 1e-12);
        assert!((r.lower - 0.997_594_872_827_326_4).abs() < 1e-12);
        let num = tau_lower(&e(1.0), &e(2.0), &BinaryOp::Sum, 10.0, tol()).unwrap();
        assert!((num.value - r.lower).abs() < 1e-9);
    }

    #[test]
    fn closed_form_exponential_argpoint_on_curve() {
        let r = closed_form_sum_exponential(&e(0.5), &e(3.0), 4.0).unwrap();
        let (x, y) = r.lower_argpoint.unwrap();
        assert!((x + y - 4.0).abs() < 1e-12);
        let g = e(0.5).cdf(x) + e(3.0).cdf(y) - 1.0;
        assert!((g - r.lower).abs() < 1e-12);
    }

    #[test]
    fn compute_bounds_picks_closed_form() {
        let r = compute_bounds(&e(1.0), &e(1.0), &BinaryOp::Sum, 1.0, tol()).unwrap();
        assert_eq!(r.method, Method::ClosedForm);
        let r = compute_bounds(&e(1.0), &e(1.0), &BinaryOp::Product, 1.0, tol()).unwrap();
        assert_eq!(r.method, Method::Numerical);
    }

    #[test]
    fn uniform_product_matches_hand_derivation() {
        // lower = (s - 5) / 10 on [5, 15]
        for s in [5.5, 7.0, 10.0, 14.0] {
            let lb = tau_lower(&u(1.0, 3.0), &u(2.0, 5.0), &BinaryOp::Product, s, tol()).unwrap();
            assert!((lb.value - (s - 5.0) / 10.0).abs() < 1e-9, "s = {s}");
        }
        let lb = tau_lower(&u(1.0, 3.0), &u(2.0, 5.0), &BinaryOp::Product, 15.0, tol()).unwrap();
        assert_eq!(lb.value, 1.0);
    }

    #[test]
    fn product_with_unbounded_supports() {
        let r = numerical_bounds(&e(1.0), &e(1.0), &BinaryOp::Product, 0.5, tol()).unwrap();
        assert!(r.lower <= r.upper);
        let (x, y) = r.upper_argpoint.unwrap();
        assert!((x * y - 0.5).abs() < 1e-6);
    }

    #[test]
    fn negative_support_rejected() {
        let neg = Marginal::uniform(-1.0, 1.0).unwrap();
        assert!(tau_lower(&neg, &u(0.0, 1.0), &BinaryOp::Sum, 0.5, tol()).is_err());
    }

    #[test]
    fn independence_copula_bound_is_between() {
        // sup over the curve of Pi lies between the W-based lower bound and 1.
        let (x, y) = (e(1.0), e(1.0));
        let w = tau_lower(&x, &y, &BinaryOp::Sum, 3.0, tol()).unwrap();
        let pi = tau_bound(
            &Copula::Pi,
            &x,
            &y,
            &BinaryOp::Sum,
            3.0,
            tol(),
            DEFAULT_GRID_N,
        )
        .unwrap();
        assert!(pi.value >= w.value);
        // symmetric marginals put the Pi extremum at x = s / 2
        let want = (1.0 - (-1.5f64).exp()).powi(2);
        assert!((pi.value - want).abs() < 1e-9);
    }
}
