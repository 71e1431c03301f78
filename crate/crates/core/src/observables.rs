//! Observables derived from amplitude traces: transmission, flux into the
//! reservoir, decay-rate fits and the BLP non-Markovianity measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{markov_rate, ReservoirKind, ReservoirSpec};
use crate::solver::{memory_convolution, AmplitudeTrace};

/// `T(z_k) = |f(z_k)|^2`.
pub fn transmission(trace: &AmplitudeTrace) -> Vec<f64> {
    trace.f.iter().map(|f| f.norm_sqr()).collect()
}

/// `dT/dz = -2 Re{ f* (m~ * f) }` on the grid. Negative values are leakage
/// into the reservoir, positive values are revivals.
pub fn flux_rate(trace: &AmplitudeTrace, spec: &ReservoirSpec) -> Vec<f64> {
    memory_convolution(trace, spec)
        .iter()
        .zip(&trace.f)
        .map(|(g, f)| -2.0 * (f.conj() * g).re)
        .collect()
}

/// Total positive variation of `|f|` along the guide: the sum of the positive
/// increments of `|f|` between grid samples.
///
/// A segment across which the phase of `f` turns by more than a right angle
/// passes near zero between samples. There the amplitude is interpolated
/// linearly and the segment contributes the rise from the interpolant's
/// minimum, recovering the dip the samples miss.
pub fn blp_measure(trace: &AmplitudeTrace) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for w in trace.f.windows(2) {
        let inc = segment_rise(w[0], w[1]);
        if inc > 0.0 {
            // Kahan
            let y = inc - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    sum
}

fn segment_rise(start: Complex64, end: Complex64) -> f64 {
    let (a0, a1) = (start.norm(), end.norm());
    if (start.conj() * end).re < 0.0 {
        let d = end - start;
        let t = -(start.conj() * d).re / d.norm_sqr();
        if t > 0.0 && t < 1.0 {
            return a1 - (start + d * t).norm();
        }
    }
    (a1 - a0).max(0.0)
}

/// BLP measure of the cosine amplitude, `floor(aL/pi) + [1 - Theta(tan aL)] |cos aL|`
/// with `Theta(0) = 1`.
pub fn blp_hermitian_closed_form(alpha_l: f64) -> f64 {
    assert!(alpha_l >= 0.0, "alpha L must be non-negative");
    let turns = alpha_l / PI;
    let nearest = turns.round();
    // tan(aL) = 0 within rounding of aL itself
    if (alpha_l - nearest * PI).abs() <= 4.0 * f64::EPSILON * alpha_l.max(1.0) {
        return nearest;
    }
    let (s, c) = alpha_l.sin_cos();
    let theta = if s * c >= 0.0 { 1.0 } else { 0.0 };
    turns.floor() + (1.0 - theta) * c.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kappa: f64,
    /// RMS residual of `-ln|f|` about the fitted line.
    pub residual: f64,
    pub window: (f64, f64),
    /// Intercept of the fitted line, `-ln|f| ~ offset + kappa z`.
    pub offset: f64,
}

/// Least-squares slope of `-ln|f(z)|` over grid points inside `window`.
pub fn fit_decay_rate(trace: &AmplitudeTrace, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    let end = trace.length();
    let slack = 1e-9 * end.max(1.0);
    if !(lo >= -slack && hi <= end + slack && lo < hi) {
        return Err(Error::Domain(format!(
            "fit window [{lo}, {hi}] is not inside the grid [0, {end}]"
        )));
    }
    let mut pts = Vec::new();
    for (&z, f) in trace.z.iter().zip(&trace.f) {
        if z < lo - slack || z > hi + slack {
            continue;
        }
        let a = f.norm();
        if a.is_nan() || a <= 1e-12 {
            return Err(Error::Underflow { value: a, z });
        }
        pts.push((z, -a.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::Domain(format!(
            "fit window [{lo}, {hi}] holds fewer than two grid points"
        )));
    }
    let n = pts.len() as f64;
    let mz = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mz) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
    let kappa = sxy / sxx;
    let offset = my - kappa * mz;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - offset - kappa * p.0).powi(2))
        .sum();
    Ok(DecayFit {
        kappa,
        residual: (ss / n).sqrt(),
        window,
        offset,
    })
}

/// `[1/kappa, 5/kappa]` with `kappa` the Markovian rate, past the shared
/// quadratic transient at short range.
pub fn default_fit_window(spec: &ReservoirSpec) -> Result<(f64, f64)> {
    let k = markov_rate(spec)?;
    Ok((1.0 / k, 5.0 / k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub transmission: Vec<f64>,
    pub flux: Vec<f64>,
    pub blp: f64,
    pub kappa_fit: Option<DecayFit>,
}

/// Computes every observable of a trace. The decay fit uses `window`, or the
/// default window when `None`; it is omitted when the fit is undefined (zero
/// width, window past the end, or an amplitude zero inside the window).
pub fn observe(trace: &AmplitudeTrace, window: Option<(f64, f64)>) -> ObservableReport {
    let spec = &trace.spec;
    let window = window.or_else(|| default_fit_window(spec).ok());
    let kappa_fit = window.and_then(|w| fit_decay_rate(trace, w).ok());
    ObservableReport {
        transmission: transmission(trace),
        flux: flux_rate(trace, spec),
        blp: blp_measure(trace),
        kappa_fit,
    }
}

/// Scalar summary written as the JSON report of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub kind: ReservoirKind,
    pub alpha: f64,
    pub gamma: f64,
    pub detuning: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub h: f64,
    pub blp: f64,
    pub kappa_fit: Option<f64>,
    pub residual: Option<f64>,
}

impl ReportSummary {
    pub fn new(trace: &AmplitudeTrace, blp: f64, fit: Option<&DecayFit>) -> Self {
        ReportSummary {
            kind: trace.spec.kind(),
            alpha: trace.spec.alpha(),
            gamma: trace.spec.gamma(),
            detuning: trace.spec.detuning(),
            length: trace.length(),
            h: trace.step(),
            blp,
            kappa_fit: fit.map(|f| f.kappa),
            residual: fit.map(|f| f.residual),
        }
    }

    /// Summary of a trace, with the decay fit over the default window.
    pub fn from_trace(trace: &AmplitudeTrace) -> Self {
        let fit = default_fit_window(&trace.spec)
            .ok()
            .and_then(|w| fit_decay_rate(trace, w).ok());
        Self::new(trace, blp_measure(trace), fit.as_ref())
    }
}
