//! Two-dimensional copulas: the Fréchet–Hoeffding bounds `W` and `M`, the
//! product copula `Pi`, and user-supplied functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::marginals::Marginal;
use crate::numerics::RandomSource;

/// Slack allowed when checking copula axioms in floating point.
pub const VALIDITY_EPS: f64 = 1e-12;

type CopulaFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Copula {
    /// Countermonotone lower bound `max(a + b - 1, 0)`.
    W,
    /// Comonotone upper bound `min(a, b)`.
    M,
    /// Independence `a * b`.
    Pi,
    /// Black-box function; nothing about it is assumed to be valid.
    Custom { name: String, f: Arc<CopulaFn> },
}

impl Copula {
    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Copula::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Copula::W => "W",
            Copula::M => "M",
            Copula::Pi => "Pi",
            Copula::Custom { name, .. } => name,
        }
    }

    pub fn eval(&self, a: f64, b: f64) -> Result<f64> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: f64, b: f64) -> f64 {
        match self {
            Copula::W => (a + b - 1.0).max(0.0),
            Copula::M => a.min(b),
            Copula::Pi => a * b,
            Copula::Custom { f, .. } => f(a, b),
        }
    }

    /// Dual copula `a + b - C(a, b)`.
    pub fn dual(&self, a: f64, b: f64) -> Result<f64> {
        Ok(a + b - self.eval(a, b)?)
    }

    pub(crate) fn dual_unchecked(&self, a: f64, b: f64) -> f64 {
        match self {
            Copula::W => (a + b).min(1.0),
            _ => a + b - self.eval_unchecked(a, b),
        }
    }

    /// Joint CDF `H(x, y) = C(F_X(x), F_Y(y))`.
    pub fn sklar_joint_cdf(&self, fx: &Marginal, fy: &Marginal, x: f64, y: f64) -> f64 {
        self.eval_unchecked(fx.cdf(x), fy.cdf(y))
    }

    /// One draw `(U, V)` with uniform marginals and this dependence.
    ///
    /// Only the named copulas have samplers; `Custom` returns `None`.
    pub fn sample(&self, rng: &mut RandomSource) -> Option<(f64, f64)> {
        match self {
            Copula::W => {
                let u = rng.next_uniform();
                Some((u, 1.0 - u))
            }
            Copula::M => {
                let u = rng.next_uniform();
                Some((u, u))
            }
            Copula::Pi => Some((rng.next_uniform(), rng.next_uniform())),
            Copula::Custom { .. } => None,
        }
    }
}

impl fmt::Debug for Copula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Copula({})", self.name())
    }
}

fn check_unit(label: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain(format!(
            "copula argument {label} = {v} outside [0, 1]"
        )))
    }
}

/// Draw from a convex mixture of samplable copulas. Weights need not be
/// normalized. A mixture of copulas is itself a copula.
pub fn sample_mixture(components: &[(f64, Copula)], rng: &mut RandomSource) -> Option<(f64, f64)> {
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if !(total > 0.0) {
        return None;
    }
    let mut pick = rng.next_uniform() * total;
    for (w, c) in components {
        if pick < *w {
            return c.sample(rng);
        }
        pick -= w;
    }
    components.last().and_then(|(_, c)| c.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Value outside [0, 1].
    Range,
    /// `C(a, 0) = 0 = C(0, b)` fails.
    GroundedBoundary,
    /// `C(a, 1) = a` or `C(1, b) = b` fails.
    UniformMarginBoundary,
    /// Negative `C`-volume of a grid rectangle.
    TwoIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub a: f64,
    pub b: f64,
    /// How far the axiom is missed, always positive.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub copula: String,
    pub grid_n: usize,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.violations
            .iter()
            .max_by(|x, y| x.magnitude.total_cmp(&y.magnitude))
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Check both copula axioms on a `grid_n x grid_n` uniform grid of the unit
/// square, testing every adjacent rectangle for 2-increasingness.
pub fn check_copula(c: &Copula, grid_n: usize) -> ValidityReport {
    let n = grid_n.max(2);
    let node = |i: usize| {
        if i == n - 1 {
            1.0
        } else {
            i as f64 / (n - 1) as f64
        }
    };
    let values: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| c.eval_unchecked(node(i), node(j))).collect())
        .collect();

    let mut violations = Vec::new();
    let mut push = |kind, a, b, magnitude: f64| {
        if magnitude > VALIDITY_EPS || magnitude.is_nan() {
            violations.push(Violation {
                kind,
                a,
                b,
                magnitude,
            });
        }
    };

    for i in 0..n {
        for j in 0..n {
            let v = values[i][j];
            let range_miss = if v.is_nan() {
                f64::NAN
            } else {
                (-v).max(v - 1.0)
            };
            push(ViolationKind::Range, node(i), node(j), range_miss);
        }
    }
    for k in 0..n {
        let t = node(k);
        push(ViolationKind::GroundedBoundary, t, 0.0, values[k][0].abs());
        push(ViolationKind::GroundedBoundary, 0.0, t, values[0][k].abs());
        push(
            ViolationKind::UniformMarginBoundary,
            t,
            1.0,
            (values[k][n - 1] - t).abs(),
        );
        push(
            ViolationKind::UniformMarginBoundary,
            1.0,
            t,
            (values[n - 1][k] - t).abs(),
        );
    }
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let volume = values[i + 1][j + 1] - values[i + 1][j] - values[i][j + 1] + values[i][j];
            push(ViolationKind::TwoIncreasing, node(i), node(j), -volume);
        }
    }

    ValidityReport {
        copula: c.name().to_string(),
        grid_n: n,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_values() {
        assert_eq!(Copula::W.eval(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(Copula::M.eval(0.3, 0.8).unwrap(), 0.3);
        assert_eq!(Copula::Pi.eval(0.5, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn duals() {
        assert_eq!(Copula::W.dual(0.5, 0.5).unwrap(), 1.0);
        assert!((Copula::M.dual(0.3, 0.8).unwrap() - 0.8).abs() < 1e-15);
        for b in [0.0, 0.2, 0.7, 1.0] {
            assert_eq!(Copula::Pi.dual(1.0, b).unwrap(), 1.0);
        }
    }

    #[test]
    fn out_of_range_arguments() {
        assert!(Copula::W.eval(1.2, 0.5).is_err());
        assert!(Copula::M.dual(0.5, -0.1).is_err());
    }

    #[test]
    fn sklar_composition() {
        let e = Marginal::exponential(1.0).unwrap();
        let h = Copula::Pi.sklar_joint_cdf(&e, &e, 1.0, 1.0);
        assert!((h - (1.0 - (-1.0f64).exp()).powi(2)).abs() < 1e-9);

        let u = Marginal::uniform(0.0, 1.0).unwrap();
        assert_eq!(Copula::M.sklar_joint_cdf(&u, &u, 0.4, 0.7), 0.4);
        assert_eq!(Copula::W.sklar_joint_cdf(&u, &u, 0.4, 0.5), 0.0);
        assert!(
            (Copula::Pi.sklar_joint_cdf(&e, &u, 0.3, f64::INFINITY) - e.cdf(0.3)).abs() < 1e-12
        );
    }

    #[test]
    fn named_copulas_are_valid() {
        for c in [Copula::W, Copula::M, Copula::Pi] {
            let r = check_copula(&c, 50);
            assert!(r.is_valid(), "{:?}: {:?}", c, r.worst());
        }
    }

    #[test]
    fn max_is_not_a_copula() {
        let r = check_copula(&Copula::custom("max", |a: f64, b: f64| a.max(b)), 10);
        assert!(!r.is_valid());
        assert!(r.count(ViolationKind::GroundedBoundary) > 0);
        let w = r.worst().unwrap();
        assert!((w.magnitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_two_increasing_detected() {
        // Boundaries are fine but the interior bump has negative volume.
        let bumped = Copula::custom("bumped", |a: f64, b: f64| {
            a * b - 0.5 * (std::f64::consts::PI * a).sin() * (std::f64::consts::PI * b).sin()
        });
        let r = check_copula(&bumped, 20);
        assert!(r.count(ViolationKind::TwoIncreasing) > 0);
        assert_eq!(r.count(ViolationKind::GroundedBoundary), 0);
    }

    #[test]
    fn samplers_have_expected_structure() {
        let mut rng = RandomSource::new(3);
        let (u, v) = Copula::W.sample(&mut rng).unwrap();
        assert!((u + v - 1.0).abs() < 1e-15);
        let (u, v) = Copula::M.sample(&mut rng).unwrap();
        assert_eq!(u, v);
        assert!(Copula::custom("x", |a, _| a).sample(&mut rng).is_none());
        let mix = [(1.0, Copula::M), (0.0, Copula::W)];
        let (u, v) = sample_mixture(&mix, &mut rng).unwrap();
        assert_eq!(u, v);
    }
}
