//! Independent reference solutions.
//!
//! * [`lorentzian_exact`]: with `m~ = alpha^2 exp(-gamma z/2)` the memory
//!   equation closes to the damped oscillator `f'' + (gamma/2) f' + alpha^2 f = 0`.
//! * [`solve_discrete_modes`]: brute-force integration of the guide coupled to
//!   a finite set of reservoir modes in the single-excitation sector, with the
//!   reservoir initially empty.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::kernels::{pdf, ReservoirKind, ReservoirSpec};
use crate::solver::{AmplitudeTrace, SolverConfig};

/// Closed-form amplitude for the Lorentzian reservoir at resonance.
///
/// With `Gamma = gamma/2` the roots are `lambda = -Gamma/2 +- s`,
/// `s^2 = Gamma^2/4 - alpha^2`, and
/// `f = exp(-Gamma z/2) [cosh(s z) + (Gamma/2) sinh(s z)/s]`. Written this way
/// the critically damped case `Gamma = 2 alpha`, `f = (1 + Gamma z/2) exp(-Gamma z/2)`,
/// is the `s -> 0` limit and needs no separate branch.
pub fn lorentzian_exact(alpha: f64, gamma: f64, z: f64) -> Complex64 {
    let damping = gamma / 2.0;
    let s = Complex64::new(damping * damping / 4.0 - alpha * alpha, 0.0).sqrt();
    let w = s * z;
    let sinhc = if w.norm() < 1e-4 {
        1.0 + w * w / 6.0
    } else {
        w.sinh() / w
    };
    (w.cosh() + damping / 2.0 * z * sinhc) * (-damping * z / 2.0).exp()
}

/// Finite set of reservoir modes: offsets `beta_n - beta_c` and couplings `g_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    pub offsets: Vec<f64>,
    pub couplings: Vec<f64>,
    /// Sampled interval of `beta - beta_c`.
    pub window: (f64, f64),
    /// Exact spectral mass of the density inside the window.
    pub captured_mass: f64,
    pub alpha: f64,
}

impl DiscreteBath {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `sum g_n^2`, which should equal `alpha^2 * captured_mass`.
    pub fn coupling_sum(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }

    /// Mode spacing (zero for a single mode).
    pub fn spacing(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            (self.window.1 - self.window.0) / (self.len() - 1) as f64
        }
    }

    /// Propagation distance after which the discrete bath revives artificially.
    pub fn recurrence_length(&self) -> f64 {
        let d = self.spacing();
        if d == 0.0 {
            f64::INFINITY
        } else {
            2.0 * PI / d
        }
    }
}

/// Default half width of the sampling window in units of `gamma`.
pub fn default_window(kind: ReservoirKind) -> f64 {
    match kind {
        ReservoirKind::Lorentzian => 200.0,
        ReservoirKind::Gaussian => 10.0,
        ReservoirKind::Uniform => 0.5,
        ReservoirKind::Hermitian => 0.0,
    }
}

fn mass_inside(spec: &ReservoirSpec, half_width: f64) -> f64 {
    match spec.kind() {
        ReservoirKind::Lorentzian => 2.0 / PI * (half_width / spec.lorentzian_half_width()).atan(),
        ReservoirKind::Gaussian => erf(half_width / (spec.gaussian_sigma() * 2f64.sqrt())),
        ReservoirKind::Uniform | ReservoirKind::Hermitian => 1.0,
    }
}

/// Samples `modes` reservoir modes uniformly over `beta_c +- window_halfwidth * gamma`
/// with couplings `g_n = alpha sqrt(rho(beta_n) w_n)` (trapezoid weights `w_n`).
///
/// `window_halfwidth = None` picks [`default_window`]. The Uniform window must
/// be its exact support, `0.5`. The Hermitian reservoir is the single mode
/// `(beta_c, alpha)`.
pub fn build_bath(
    spec: &ReservoirSpec,
    modes: usize,
    window_halfwidth: Option<f64>,
) -> Result<DiscreteBath> {
    let alpha = spec.alpha();
    if spec.kind() == ReservoirKind::Hermitian {
        return Ok(DiscreteBath {
            offsets: vec![0.0],
            couplings: vec![alpha],
            window: (0.0, 0.0),
            captured_mass: 1.0,
            alpha,
        });
    }
    if modes < 2 {
        return Err(Error::param(
            "modes",
            format!("need at least 2, got {modes}"),
        ));
    }
    let w = window_halfwidth.unwrap_or_else(|| default_window(spec.kind()));
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::param(
            "window_halfwidth",
            format!("must be > 0, got {w}"),
        ));
    }
    if spec.kind() == ReservoirKind::Uniform && w != 0.5 {
        return Err(Error::param(
            "window_halfwidth",
            "the uniform bath must sample exactly its support (0.5 gamma)",
        ));
    }
    let half = w * spec.gamma();
    let spacing = 2.0 * half / (modes - 1) as f64;
    let mut offsets = Vec::with_capacity(modes);
    let mut couplings = Vec::with_capacity(modes);
    for n in 0..modes {
        // pin the end points so the Uniform edges land exactly on the support
        let x = if n == modes - 1 {
            half
        } else {
            -half + n as f64 * spacing
        };
        let weight = if n == 0 || n == modes - 1 {
            0.5 * spacing
        } else {
            spacing
        };
        let rho = pdf(spec, spec.beta_c() + x)?;
        offsets.push(x);
        couplings.push(alpha * (rho * weight).sqrt());
    }
    Ok(DiscreteBath {
        offsets,
        couplings,
        window: (-half, half),
        captured_mass: mass_inside(spec, half),
        alpha,
    })
}

/// Amplitudes of the single-excitation state: guide `c_a` and bath `c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub guide: Complex64,
    pub bath: Vec<Complex64>,
}

impl SingleExcitationState {
    /// Photon in the guide, empty reservoir.
    pub fn initial(modes: usize) -> Self {
        SingleExcitationState {
            guide: Complex64::new(1.0, 0.0),
            bath: vec![Complex64::new(0.0, 0.0); modes],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.guide.norm_sqr() + self.bath.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Result of a discrete-bath integration.
#[derive(Debug, Clone)]
pub struct BathEvolution {
    pub trace: AmplitudeTrace,
    /// `max_k | |c_a|^2 + sum |c_n|^2 - 1 |` along the run.
    pub max_norm_drift: f64,
}

/// Tolerated drift of the single-excitation norm.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Integrates `i c_a' = sum g_n c_n`, `i c_n' = (beta_n - beta) c_n + g_n c_a`
/// in the frame of the guide with classical RK4 at the configured step.
///
/// `spec` only labels the returned trace.
pub fn solve_discrete_modes(
    bath: &DiscreteBath,
    spec: &ReservoirSpec,
    detuning: f64,
    cfg: &SolverConfig,
) -> Result<BathEvolution> {
    cfg.validate_grid()?;
    let n = cfg.intervals();
    let h = cfg.grid_step();
    let freq: Vec<f64> = bath.offsets.iter().map(|x| x - detuning).collect();
    let fastest = freq
        .iter()
        .map(|w| w.abs())
        .fold(bath.coupling_sum().sqrt(), f64::max);
    if fastest * h > 1.0 {
        return Err(Error::Config(format!(
            "RK4 step resolves frequencies up to 1/h = {}, bath needs {fastest}",
            1.0 / h
        )));
    }
    let g = &bath.couplings;
    let m = bath.len();
    let mi = Complex64::new(0.0, -1.0);

    // derivative of (guide, bath) into (da, db)
    let rhs = |a: Complex64, b: &[Complex64], db: &mut [Complex64]| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..m {
            s += g[i] * b[i];
            db[i] = mi * (freq[i] * b[i] + g[i] * a);
        }
        mi * s
    };

    let mut state = SingleExcitationState::initial(m);
    let mut out = Vec::with_capacity(n + 1);
    out.push(state.guide);
    let mut drift: f64 = 0.0;
    let mut k1 = vec![Complex64::new(0.0, 0.0); m];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    for step in 1..=n {
        let a = state.guide;
        let b = &state.bath;
        let ka1 = rhs(a, b, &mut k1);
        for i in 0..m {
            tmp[i] = b[i] + 0.5 * h * k1[i];
        }
        let ka2 = rhs(a + 0.5 * h * ka1, &tmp, &mut k2);
        for i in 0..m {
            tmp[i] = b[i] + 0.5 * h * k2[i];
        }
        let ka3 = rhs(a + 0.5 * h * ka2, &tmp, &mut k3);
        for i in 0..m {
            tmp[i] = b[i] + h * k3[i];
        }
        let ka4 = rhs(a + h * ka3, &tmp, &mut k4);

        state.guide = a + h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
        for i in 0..m {
            state.bath[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let z = step as f64 * h;
        let d = (state.norm_sqr() - 1.0).abs();
        if !d.is_finite() {
            return Err(Error::Instability { z });
        }
        if d > NORM_TOLERANCE {
            return Err(Error::NormDrift { drift: d, z });
        }
        drift = drift.max(d);
        out.push(state.guide);
    }
    Ok(BathEvolution {
        trace: AmplitudeTrace::from_samples(*spec, h, out),
        max_norm_drift: drift,
    })
}
