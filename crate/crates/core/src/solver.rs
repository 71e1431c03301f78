//! Trapezoid/PECE solver for the memory equation `f' = -(m~ * f)`, `f(0) = 1`.
//!
//! On a uniform grid `z_k = k h` the memory integral
//! `g_k = integral_0^{z_k} m~(z_k - s) f(s) ds` is the composite trapezoid sum
//! over the stored history, and `f` is advanced with the trapezoid rule
//! `f_{k+1} = f_k - h/2 (g_k + g_{k+1})`. The only unknown in `g_{k+1}` is the
//! end-point term `h/2 m~(0) f_{k+1}`, so each step predicts `f_{k+1}`
//! (second-order Adams-Bashforth), evaluates `g`, corrects, and evaluates again.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_value, ReservoirSpec};

/// Kernel samples below this fraction of `alpha^2` contribute nothing in double
/// precision and are dropped from the history sum.
const KERNEL_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Method {
    #[default]
    TrapezoidPece,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Propagation length `L`.
    pub length: f64,
    /// Requested grid step `h`; the grid uses the largest `L/N <= h`.
    pub step: f64,
    #[serde(default)]
    pub method: Method,
}

impl SolverConfig {
    pub fn new(length: f64, step: f64) -> Self {
        SolverConfig {
            length,
            step,
            method: Method::TrapezoidPece,
        }
    }

    /// Number of grid intervals.
    pub fn intervals(&self) -> usize {
        (self.length / self.step - 1e-9).ceil().max(1.0) as usize
    }

    pub fn grid_step(&self) -> f64 {
        self.length / self.intervals() as f64
    }

    /// Checks the grid on its own, without reference to a reservoir.
    pub fn validate_grid(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Config(format!(
                "length must be > 0, got {}",
                self.length
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!(
                "step must be > 0, got {}",
                self.step
            )));
        }
        if self.length / self.step < 8.0 {
            return Err(Error::Config(format!(
                "L/h = {} is below the minimum of 8 grid intervals",
                self.length / self.step
            )));
        }
        Ok(())
    }

    /// Grid checks plus the resolution guard `h * max(alpha, gamma) <= 0.1`.
    pub fn validate(&self, spec: &ReservoirSpec) -> Result<()> {
        self.validate_grid()?;
        let scale = spec.alpha().max(spec.gamma());
        if self.step * scale > 0.1 + 1e-12 {
            return Err(Error::Config(format!(
                "h * max(alpha, gamma) = {} exceeds 0.1",
                self.step * scale
            )));
        }
        Ok(())
    }
}

/// Amplitude samples `f(z_k)` on a uniform grid starting at `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub z: Vec<f64>,
    pub f: Vec<Complex64>,
    pub spec: ReservoirSpec,
}

impl AmplitudeTrace {
    /// Builds a trace from samples `f_0 ..` spaced by `h`.
    pub fn from_samples(spec: ReservoirSpec, h: f64, f: Vec<Complex64>) -> Self {
        let z = (0..f.len()).map(|k| k as f64 * h).collect();
        AmplitudeTrace { z, f, spec }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        match self.z.len() {
            0 | 1 => 0.0,
            n => self.z[n - 1] / (n - 1) as f64,
        }
    }

    pub fn length(&self) -> f64 {
        self.z.last().copied().unwrap_or(0.0)
    }

    /// Linear interpolation of `f` at `z` (clamped to the grid).
    pub fn sample(&self, z: f64) -> Complex64 {
        let h = self.step();
        if h == 0.0 || z <= 0.0 {
            return self.f[0];
        }
        let x = z / h;
        let k = (x.floor() as usize).min(self.len() - 2);
        let t = (x - k as f64).min(1.0);
        self.f[k] * (1.0 - t) + self.f[k + 1] * t
    }
}

/// Composite trapezoid approximation of `integral_0^{z_k} m~(z_k - s) f(s) ds`
/// with `k = len - 1`, from kernel samples `m~(z_0 ..= z_k)` and `f(z_0 ..= z_k)`.
pub fn convolve_history(kernel: &[Complex64], f: &[Complex64], h: f64) -> Result<Complex64> {
    if kernel.len() != f.len() || f.is_empty() {
        return Err(Error::Contract(format!(
            "kernel and amplitude histories must have equal nonzero length ({} vs {})",
            kernel.len(),
            f.len()
        )));
    }
    let k = f.len() - 1;
    if k == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inner: Complex64 = (1..k).map(|j| kernel[k - j] * f[j]).sum();
    Ok((inner + 0.5 * (kernel[k] * f[0] + kernel[0] * f[k])) * h)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

enum Engine {
    /// `m~(z) = m0 exp(lambda z)`: the history sum obeys a one-term recursion.
    Recursive {
        ratio: Complex64,
        /// `sum_{j<=k} m~(z_k - z_j) f_j` for the last pushed `k`.
        acc: Complex64,
    },
    Direct {
        /// `rev[i] = m~(z_{N - i})`
        rev_re: Vec<f64>,
        rev_im: Vec<f64>,
        real: bool,
        /// largest lag with a non-negligible kernel sample
        support: usize,
        f_re: Vec<f64>,
        f_im: Vec<f64>,
    },
}

/// Incremental trapezoid history sums for one kernel on one grid.
///
/// Usage: `push(f_0)`, then for each `n = 1, 2, ..`: `tail(n)` (needs
/// `f_0 .. f_{n-1}`), then `push(f_n)`. The full memory integral at `z_n` is
/// `tail(n) + endpoint() * f_n`.
pub(crate) struct HistoryQuadrature {
    h: f64,
    m: Vec<Complex64>,
    f0: Complex64,
    pushed: usize,
    engine: Engine,
}

impl HistoryQuadrature {
    pub(crate) fn new(spec: &ReservoirSpec, h: f64, intervals: usize) -> Self {
        let m: Vec<Complex64> = (0..=intervals)
            .map(|k| kernel_value(spec, k as f64 * h))
            .collect();
        let engine = match spec.exponential_rate() {
            Some(lambda) => Engine::Recursive {
                ratio: (lambda * h).exp(),
                acc: Complex64::new(0.0, 0.0),
            },
            None => {
                let floor = KERNEL_FLOOR * m[0].norm();
                let support = m.iter().rposition(|c| c.norm() >= floor).unwrap_or(0);
                Engine::Direct {
                    rev_re: m.iter().rev().map(|c| c.re).collect(),
                    rev_im: m.iter().rev().map(|c| c.im).collect(),
                    real: m.iter().all(|c| c.im == 0.0),
                    support,
                    f_re: Vec::with_capacity(intervals + 1),
                    f_im: Vec::with_capacity(intervals + 1),
                }
            }
        };
        HistoryQuadrature {
            h,
            m,
            f0: Complex64::new(0.0, 0.0),
            pushed: 0,
            engine,
        }
    }

    /// Weight of the still-unknown `f_n` in the memory integral at `z_n`.
    pub(crate) fn endpoint(&self) -> Complex64 {
        self.m[0] * (0.5 * self.h)
    }

    pub(crate) fn push(&mut self, f: Complex64) {
        if self.pushed == 0 {
            self.f0 = f;
        }
        match &mut self.engine {
            Engine::Recursive { ratio, acc } => *acc = *ratio * *acc + self.m[0] * f,
            Engine::Direct { f_re, f_im, .. } => {
                f_re.push(f.re);
                f_im.push(f.im);
            }
        }
        self.pushed += 1;
    }

    /// `h [ m~(z_n) f_0 / 2 + sum_{j=1}^{n-1} m~(z_n - z_j) f_j ]`.
    pub(crate) fn tail(&self, n: usize) -> Complex64 {
        debug_assert!(n >= 1 && self.pushed == n);
        let first = 0.5 * self.m[n] * self.f0;
        let inner = match &self.engine {
            Engine::Recursive { ratio, acc } => {
                // ratio * acc = sum_{j=0}^{n-1} m~(z_n - z_j) f_j
                return (*ratio * *acc - first) * self.h;
            }
            Engine::Direct {
                rev_re,
                rev_im,
                real,
                support,
                f_re,
                f_im,
            } => {
                let lo = 1.max(n.saturating_sub(*support));
                if lo > n - 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let big_n = rev_re.len() - 1;
                    let kr = &rev_re[big_n - n + lo..big_n];
                    let fr = &f_re[lo..n];
                    let fi = &f_im[lo..n];
                    if *real {
                        Complex64::new(dot(kr, fr), dot(kr, fi))
                    } else {
                        let ki = &rev_im[big_n - n + lo..big_n];
                        Complex64::new(dot(kr, fr) - dot(ki, fi), dot(kr, fi) + dot(ki, fr))
                    }
                }
            }
        };
        (inner + first) * self.h
    }
}

/// Solves the memory equation on `[0, L]`.
pub fn solve_volterra(spec: &ReservoirSpec, cfg: &SolverConfig) -> Result<AmplitudeTrace> {
    cfg.validate(spec)?;
    let n = cfg.intervals();
    let h = cfg.grid_step();
    let mut hist = HistoryQuadrature::new(spec, h, n);
    let end = hist.endpoint();

    let mut f = Vec::with_capacity(n + 1);
    let one = Complex64::new(1.0, 0.0);
    f.push(one);
    hist.push(one);
    let mut g_prev = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let fk = f[k];
        let predicted = if k == 0 {
            fk - g * h
        } else {
            fk - (3.0 * g - g_prev) * (0.5 * h)
        };
        let tail = hist.tail(k + 1);
        let g_pred = tail + end * predicted;
        let corrected = fk - (g + g_pred) * (0.5 * h);
        let g_next = tail + end * corrected;

        if !(corrected.re.is_finite() && corrected.im.is_finite()) || corrected.norm() > 1e6 {
            return Err(Error::Instability {
                z: (k + 1) as f64 * h,
            });
        }
        f.push(corrected);
        hist.push(corrected);
        g_prev = g;
        g = g_next;
    }
    Ok(AmplitudeTrace::from_samples(*spec, h, f))
}

/// Memory integral `(m~ * f)(z_k)` at every grid point of a trace, using the
/// solver's quadrature.
pub fn memory_convolution(trace: &AmplitudeTrace, spec: &ReservoirSpec) -> Vec<Complex64> {
    let n = trace.len() - 1;
    let h = trace.step();
    let mut hist = HistoryQuadrature::new(spec, h, n);
    let end = hist.endpoint();
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex64::new(0.0, 0.0));
    hist.push(trace.f[0]);
    for k in 1..=n {
        out.push(hist.tail(k) + end * trace.f[k]);
        hist.push(trace.f[k]);
    }
    out
}
