//! Scalar numerical primitives used by the bound engine.
//!
//! Everything here is pure except [`RandomSource`], which owns its generator
//! state and is meant to be held by a single thread.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

/// Convergence controls shared by the root finder and the scalar optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let tol = Self {
            abs_tol,
            rel_tol,
            max_iter,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_iter < 1 {
            return Err(Error::InvalidParameter(format!(
                "tolerance requires abs_tol > 0, rel_tol > 0, max_iter >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    fn width(&self, x: f64) -> f64 {
        self.abs_tol + self.rel_tol * x.abs()
    }
}

/// Brent's method on a bracketing interval.
///
/// Inverse quadratic interpolation and secant steps are only accepted while
/// they shrink the bracket fast enough; otherwise the step is a bisection.
pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    tol.validate()?;
    if !(lo <= hi) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoBracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.width(b);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::MaxIterExceeded {
        iterations: tol.max_iter,
    })
}

/// Grid scan followed by golden-section refinement around the best cell.
///
/// Returns `(argmax, max)`. The refined point replaces the grid winner only
/// if it is strictly better, so the result never loses to the grid.
pub fn maximize_scalar<F>(
    f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
    grid_n: usize,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    tol.validate()?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval { lo, hi });
    }
    if grid_n < 3 {
        return Err(Error::InvalidParameter(format!(
            "grid_n must be at least 3 (got {grid_n})"
        )));
    }
    // NaN never wins a comparison.
    let eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let step = (hi - lo) / (grid_n - 1) as f64;
    let node = |i: usize| {
        if i == grid_n - 1 {
            hi
        } else {
            lo + step * i as f64
        }
    };
    let mut best_i = 0;
    let mut best_x = lo;
    let mut best_v = eval(lo);
    for i in 1..grid_n {
        let x = node(i);
        let v = eval(x);
        if v > best_v {
            best_i = i;
            best_x = x;
            best_v = v;
        }
    }

    let a = node(best_i.saturating_sub(1));
    let b = node((best_i + 1).min(grid_n - 1));
    let (rx, rv) = golden_section_max(&eval, a, b, tol);
    if rv > best_v {
        Ok((rx, rv))
    } else {
        Ok((best_x, best_v))
    }
}

/// `(argmin, min)` via [`maximize_scalar`] on `-f`.
pub fn minimize_scalar<F>(
    f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
    grid_n: usize,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let (x, v) = maximize_scalar(|x| -f(x), lo, hi, tol, grid_n)?;
    Ok((x, -v))
}

fn golden_section_max<F>(f: &F, mut a: f64, mut b: f64, tol: Tolerance) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let (mut best_x, mut best_v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };

    for _ in 0..tol.max_iter {
        if (b - a).abs() <= tol.width(0.5 * (a + b)) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            if f1 > best_v {
                best_x = x1;
                best_v = f1;
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            if f2 > best_v {
                best_x = x2;
                best_v = f2;
            }
        }
    }
    (best_x, best_v)
}

/// Crossover between the ascending series and the continued-fraction branch.
pub const BESSEL_K1_SPLIT: f64 = 2.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain(format!("bessel_k1 requires x > 0 (got {x})")));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(if x <= BESSEL_K1_SPLIT {
        bessel_k1_series(x)
    } else {
        bessel_k1_large(x)
    })
}

/// Ascending series with the logarithmic term:
///
/// ```text
/// K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
/// ```
///
/// Accurate to a few ulps up to x ~ 3; cancellation grows like e^{2x} beyond.
pub fn bessel_k1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    // term_k = y^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut i1_sum = 0.0;
    let mut psi_sum = 0.0;
    for k in 0..100 {
        i1_sum += term;
        let contrib = (psi_k1 + psi_k2) * term;
        psi_sum += contrib;
        if term < 1e-18 * i1_sum && contrib.abs() < 1e-18 * psi_sum.abs() {
            break;
        }
        let kf = k as f64;
        term *= y / ((kf + 1.0) * (kf + 2.0));
        psi_k1 += 1.0 / (kf + 1.0);
        psi_k2 += 1.0 / (kf + 2.0);
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * psi_sum
}

/// Large-argument branch: Steed's continued fraction (Temme's CF2) for K0
/// with `sqrt(pi / 2x) e^{-x}` factored out, followed by the K1/K0 ratio
/// from the same fraction. Converges quickly for x >= 1.5.
pub fn bessel_k1_large(x: f64) -> f64 {
    const MAX_TERMS: usize = 10_000;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    k0 * (x + 0.5 - h) / x
}

/// Seedable random stream (ChaCha8) with a Box–Muller Gaussian transform.
///
/// Identical seeds give bit-identical streams. Sweeps derive per-point
/// sources with [`RandomSource::derive`], i.e. seed `seed + index`
/// (wrapping), so results do not depend on evaluation order.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh source seeded with `seed + index`.
    pub fn derive(&self, index: u64) -> Self {
        Self::new(self.seed.wrapping_add(index))
    }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Normal deviate with the given mean and variance.
    ///
    /// Box–Muller: for U1 in (0, 1], U2 in [0, 1),
    /// `sqrt(-2 ln U1) * (cos 2 pi U2, sin 2 pi U2)` is a pair of independent
    /// standard normals. The sine half is cached for the next call.
    pub fn next_gaussian(&mut self, mean: f64, var: f64) -> f64 {
        debug_assert!(var >= 0.0, "variance must be non-negative");
        let z = match self.spare.take() {
            Some(z) => z,
            None => {
                let u1 = 1.0 - self.next_uniform();
                let u2 = self.next_uniform();
                let r = (-2.0 * u1.ln()).sqrt();
                let (sin, cos) = (2.0 * PI * u2).sin_cos();
                self.spare = Some(r * sin);
                r * cos
            }
        };
        mean + var.sqrt() * z
    }
}
