//! Reservoir spectral densities and their memory kernels.
//!
//! A reservoir is a distribution `rho(beta)` of propagation constants centred
//! on `beta_c`, parametrised by its full width at half maximum `gamma`. The
//! memory kernel seen by the guided mode is the autocorrelation
//! `m(z) = alpha^2 * integral rho(b) exp(-i b z) db`, taken in the frame of the
//! guide, so that at resonance it reduces to a real envelope:
//!
//! | kind       | envelope                          |
//! |------------|-----------------------------------|
//! | Lorentzian | `alpha^2 exp(-gamma z / 2)`       |
//! | Gaussian   | `alpha^2 exp(-gamma^2 z^2 / ln 65536)` |
//! | Uniform    | `alpha^2 sinc(gamma z / 2)`       |
//! | Hermitian  | `alpha^2`                         |
//!
//! A detuning `delta = beta - beta_c` multiplies the envelope by `exp(i delta z)`.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln 256`, the squared ratio between the Gaussian FWHM and its standard deviation.
pub const LN_256: f64 = 8.0 * LN_2;
/// `ln 65536 = 2 ln 256`, the denominator of the Gaussian kernel exponent.
pub const LN_65536: f64 = 16.0 * LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReservoirKind {
    Lorentzian,
    Gaussian,
    Uniform,
    /// Zero-width limit shared by every distribution: a single reservoir mode.
    Hermitian,
}

impl ReservoirKind {
    /// The three structured reservoirs, in the order used for tables and plots.
    pub const STRUCTURED: [ReservoirKind; 3] = [
        ReservoirKind::Lorentzian,
        ReservoirKind::Gaussian,
        ReservoirKind::Uniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReservoirKind::Lorentzian => "lorentzian",
            ReservoirKind::Gaussian => "gaussian",
            ReservoirKind::Uniform => "uniform",
            ReservoirKind::Hermitian => "hermitian",
        }
    }
}

impl fmt::Display for ReservoirKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReservoirKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorentzian" | "lorentz" => Ok(ReservoirKind::Lorentzian),
            "gaussian" | "gauss" => Ok(ReservoirKind::Gaussian),
            "uniform" | "rect" => Ok(ReservoirKind::Uniform),
            "hermitian" => Ok(ReservoirKind::Hermitian),
            other => Err(Error::param(
                "kind",
                format!("unknown reservoir kind `{other}`"),
            )),
        }
    }
}

/// Physical configuration of the guide/reservoir pair.
///
/// Constructing a structured kind with `gamma == 0` yields the Hermitian
/// reservoir: every distribution collapses onto the same single mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ReservoirSpec {
    kind: ReservoirKind,
    alpha: f64,
    gamma: f64,
    detuning: f64,
    beta_c: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    kind: ReservoirKind,
    alpha: f64,
    gamma: f64,
    #[serde(default)]
    detuning: f64,
    #[serde(default)]
    beta_c: f64,
}

impl TryFrom<RawSpec> for ReservoirSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        ReservoirSpec::new(raw.kind, raw.alpha, raw.gamma)?
            .with_detuning(raw.detuning)?
            .with_center(raw.beta_c)
    }
}

impl ReservoirSpec {
    pub fn new(kind: ReservoirKind, alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param(
                "alpha",
                format!("must be finite and > 0, got {alpha}"),
            ));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::param(
                "gamma",
                format!("must be finite and >= 0, got {gamma}"),
            ));
        }
        let kind = match kind {
            ReservoirKind::Hermitian if gamma != 0.0 => {
                return Err(Error::param(
                    "gamma",
                    format!("the hermitian reservoir has zero width, got {gamma}"),
                ))
            }
            _ if gamma == 0.0 => ReservoirKind::Hermitian,
            k => k,
        };
        Ok(ReservoirSpec {
            kind,
            alpha,
            gamma,
            detuning: 0.0,
            beta_c: 0.0,
        })
    }

    /// Single-mode reservoir with coupling `alpha`.
    pub fn hermitian(alpha: f64) -> Result<Self> {
        Self::new(ReservoirKind::Hermitian, alpha, 0.0)
    }

    /// Sets `delta = beta - beta_c`.
    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        if !detuning.is_finite() {
            return Err(Error::param("detuning", "must be finite"));
        }
        self.detuning = detuning;
        Ok(self)
    }

    /// Sets the reservoir centre `beta_c`. Only the detuning enters the dynamics.
    pub fn with_center(mut self, beta_c: f64) -> Result<Self> {
        if !beta_c.is_finite() {
            return Err(Error::param("beta_c", "must be finite"));
        }
        self.beta_c = beta_c;
        Ok(self)
    }

    pub fn kind(&self) -> ReservoirKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Full width at half maximum of the spectral density.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn beta_c(&self) -> f64 {
        self.beta_c
    }

    /// Propagation constant of the isolated guide, `beta_c + delta`.
    pub fn beta(&self) -> f64 {
        self.beta_c + self.detuning
    }

    /// Lorentzian half width `Gamma = gamma / 2`.
    pub fn lorentzian_half_width(&self) -> f64 {
        self.gamma / 2.0
    }

    /// Gaussian standard deviation `sigma = gamma / sqrt(ln 256)`.
    pub fn gaussian_sigma(&self) -> f64 {
        self.gamma / LN_256.sqrt()
    }

    /// Half width of the flat band.
    pub fn uniform_half_width(&self) -> f64 {
        self.gamma / 2.0
    }

    /// Real kernel envelope at resonance, `m~(z)` for `delta = 0`.
    pub fn resonant_kernel(&self, z: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        match self.kind {
            ReservoirKind::Lorentzian => a2 * (-self.gamma * z / 2.0).exp(),
            ReservoirKind::Gaussian => a2 * (-(self.gamma * z).powi(2) / LN_65536).exp(),
            ReservoirKind::Uniform => a2 * sinc(self.gamma * z / 2.0),
            ReservoirKind::Hermitian => a2,
        }
    }

    /// If the kernel is a pure exponential `alpha^2 exp(lambda z)`, returns `lambda`.
    pub fn exponential_rate(&self) -> Option<Complex64> {
        match self.kind {
            ReservoirKind::Lorentzian => Some(Complex64::new(-self.gamma / 2.0, self.detuning)),
            ReservoirKind::Hermitian => Some(Complex64::new(0.0, self.detuning)),
            _ => None,
        }
    }
}

/// `sin(x) / x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Spectral density `rho(beta)` of the reservoir, in units of length.
pub fn pdf(spec: &ReservoirSpec, beta: f64) -> Result<f64> {
    let x = beta - spec.beta_c;
    match spec.kind {
        ReservoirKind::Lorentzian => {
            let g = spec.lorentzian_half_width();
            Ok(g / (PI * (x * x + g * g)))
        }
        ReservoirKind::Gaussian => {
            let s = spec.gaussian_sigma();
            Ok((-(x * x) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt()))
        }
        ReservoirKind::Uniform => {
            if x.abs() <= spec.uniform_half_width() {
                Ok(1.0 / spec.gamma)
            } else {
                Ok(0.0)
            }
        }
        ReservoirKind::Hermitian => Err(Error::Unsupported {
            op: "pointwise density",
            kind: "hermitian",
        }),
    }
}

/// Memory kernel `m~(z)` in the frame of the guide.
pub fn autocorrelation(spec: &ReservoirSpec, z: f64) -> Result<Complex64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!(
            "kernel argument must be >= 0, got {z}"
        )));
    }
    Ok(kernel_value(spec, z))
}

/// Unchecked kernel evaluation for the solvers.
pub(crate) fn kernel_value(spec: &ReservoirSpec, z: f64) -> Complex64 {
    let env = spec.resonant_kernel(z);
    if spec.detuning == 0.0 {
        Complex64::new(env, 0.0)
    } else {
        Complex64::from_polar(env, spec.detuning * z)
    }
}

/// Taylor coefficients `m_0 .. m_K` of the memory kernel about `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    pub coeffs: Vec<Complex64>,
}

impl KernelSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Sum of the truncated series at `z`.
    pub fn eval(&self, z: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

pub fn kernel_series(spec: &ReservoirSpec, order: usize) -> KernelSeries {
    let a2 = spec.alpha * spec.alpha;
    let mut resonant = vec![0.0; order + 1];
    match spec.kind {
        ReservoirKind::Lorentzian => {
            let r = -spec.gamma / 2.0;
            let mut term = a2;
            for (j, c) in resonant.iter_mut().enumerate() {
                if j > 0 {
                    term *= r / j as f64;
                }
                *c = term;
            }
        }
        ReservoirKind::Gaussian => {
            let r = -(spec.gamma * spec.gamma) / LN_65536;
            let mut term = a2;
            for j in 0..=order / 2 {
                if j > 0 {
                    term *= r / j as f64;
                }
                resonant[2 * j] = term;
            }
        }
        ReservoirKind::Uniform => {
            let w2 = (spec.gamma / 2.0).powi(2);
            let mut term = a2;
            for j in 0..=order / 2 {
                if j > 0 {
                    term *= -w2 / ((2 * j) as f64 * (2 * j + 1) as f64);
                }
                resonant[2 * j] = term;
            }
        }
        ReservoirKind::Hermitian => resonant[0] = a2,
    }

    let coeffs = if spec.detuning == 0.0 {
        resonant
            .into_iter()
            .map(|c| Complex64::new(c, 0.0))
            .collect()
    } else {
        // Cauchy product with the Taylor series of exp(i delta z).
        let mut phase = Vec::with_capacity(order + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for k in 0..=order {
            if k > 0 {
                p *= Complex64::new(0.0, spec.detuning) / k as f64;
            }
            phase.push(p);
        }
        (0..=order)
            .map(|n| (0..=n).map(|j| phase[n - j] * resonant[j]).sum())
            .collect()
    };
    KernelSeries { coeffs }
}

/// Markovian decay rate `kappa = Re integral_0^inf m~(z) dz = pi alpha^2 rho(beta)`.
///
/// At resonance this is `2 alpha^2/gamma` (Lorentzian), `sqrt(pi ln 16) alpha^2/gamma`
/// (Gaussian) and `pi alpha^2/gamma` (Uniform).
pub fn markov_rate(spec: &ReservoirSpec) -> Result<f64> {
    if spec.gamma == 0.0 {
        return Err(Error::DivergentRate);
    }
    Ok(PI * spec.alpha * spec.alpha * pdf(spec, spec.beta())?)
}
