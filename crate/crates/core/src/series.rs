//! Power-series solution of `f' = -(m~ * f)` with `f(0) = 1`, `f'(0) = 0`.
//!
//! Substituting `f = sum f_n z^n` and `m~ = sum m_j z^j` and using
//! `integral_0^z (z - s)^j s^i ds = z^(i+j+1) i! j! / (i+j+1)!` gives, for `n >= 1`,
//!
//! ```text
//! f_{n+1} = -1/(n (n+1)) * sum_{j=0}^{n-1} m_j f_{n-1-j} / C(n-1, j)
//! ```
//!
//! which reproduces `f = 1 - m0/2 z^2 - m1/6 z^3 + (m0^2 - 2 m2)/24 z^4 + ...`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::KernelSeries;

/// Field operations needed by the coefficient recursion.
///
/// Floating-point scalars sum with Neumaier compensation; exact scalars
/// (rationals) can use the plain sum.
pub trait SeriesScalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(n: u64) -> Self;

    fn sum<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |a, b| a + b)
    }
}

fn neumaier(items: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl SeriesScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn sum<I: IntoIterator<Item = Self>>(items: I) -> Self {
        neumaier(items)
    }
}

impl SeriesScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_u64(n: u64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn sum<I: IntoIterator<Item = Self>>(items: I) -> Self {
        let v: Vec<Complex64> = items.into_iter().collect();
        Complex64::new(
            neumaier(v.iter().map(|c| c.re)),
            neumaier(v.iter().map(|c| c.im)),
        )
    }
}

impl<T> SeriesScalar for num_rational::Ratio<T>
where
    T: Clone + num_integer::Integer + num_traits::FromPrimitive + Neg<Output = T>,
{
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_u64(n: u64) -> Self {
        num_rational::Ratio::from_integer(T::from_u64(n).expect("integer overflow"))
    }
}

/// Largest order whose binomials `C(n-1, j)` fit in a `u64`.
pub const MAX_ORDER: usize = 64;

/// Runs the recursion on arbitrary kernel coefficients `m_0 ..`, producing
/// `f_0 ..= f_order`. Needs `m.len() >= order - 1`.
pub fn recurrence<T: SeriesScalar>(m: &[T], order: usize) -> Result<Vec<T>> {
    if order < 2 {
        return Err(Error::param("order", format!("must be >= 2, got {order}")));
    }
    if order > MAX_ORDER {
        return Err(Error::param(
            "order",
            format!("must be <= {MAX_ORDER}, got {order}"),
        ));
    }
    if m.len() < order - 1 {
        return Err(Error::Truncation {
            have: m.len().saturating_sub(1),
            need: order,
        });
    }
    let mut f = Vec::with_capacity(order + 1);
    f.push(T::one());
    f.push(T::zero());
    for n in 1..order {
        // binomial C(n-1, j) built incrementally
        let mut binom: u128 = 1;
        let terms = (0..n).map(|j| {
            let t = m[j].clone() * f[n - 1 - j].clone() / T::from_u64(binom as u64);
            binom = binom * (n - 1 - j) as u128 / (j as u128 + 1);
            t
        });
        let s = T::sum(terms.collect::<Vec<_>>());
        f.push(-s / T::from_u64((n * (n + 1)) as u64));
    }
    Ok(f)
}

/// Taylor coefficients `f_0 ..= f_K` of the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub coeffs: Vec<Complex64>,
}

impl AmplitudeSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

pub fn amplitude_series(kernel: &KernelSeries, order: usize) -> Result<AmplitudeSeries> {
    let coeffs = recurrence(&kernel.coeffs, order)?;
    Ok(AmplitudeSeries { coeffs })
}

/// Value of a truncated series together with the size of its last term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// `|f_K z^K|`, a rough bound on what was cut off.
    pub remainder: f64,
}

pub fn eval_series(s: &AmplitudeSeries, z: f64) -> SeriesValue {
    let value = s
        .coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let last = s.coeffs.last().copied().unwrap_or_default();
    SeriesValue {
        value,
        remainder: last.norm() * z.abs().powi(s.order() as i32),
    }
}

/// Closed-form fourth-order coefficients `[f_0, .., f_4]` for each reservoir at
/// resonance, written out independently of the recursion.
pub fn closed_form_quartic(kind: crate::ReservoirKind, alpha: f64, gamma: f64) -> [f64; 5] {
    use crate::kernels::LN_256;
    use crate::ReservoirKind::*;
    let a2 = alpha * alpha;
    match kind {
        Lorentzian => [
            1.0,
            0.0,
            -a2 / 2.0,
            a2 * gamma / 12.0,
            a2 / 24.0 * (a2 - gamma * gamma / 4.0),
        ],
        Gaussian => [
            1.0,
            0.0,
            -a2 / 2.0,
            0.0,
            a2 / 24.0 * (a2 + gamma * gamma / LN_256),
        ],
        Uniform => [
            1.0,
            0.0,
            -a2 / 2.0,
            0.0,
            a2 / 24.0 * (a2 + gamma * gamma / 12.0),
        ],
        Hermitian => [1.0, 0.0, -a2 / 2.0, 0.0, a2 * a2 / 24.0],
    }
}
