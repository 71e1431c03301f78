//! Parameter sweeps: transmission and `log10|f|` along the guide, transmission
//! at fixed length against the reservoir width, and the BLP measure against
//! the reservoir width.
//!
//! Every sweep point is an independent solve; points run in parallel and are
//! gathered in axis order.

use std::collections::BTreeMap;
use std::f64::consts::LN_10;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{markov_rate, ReservoirKind, ReservoirSpec};
use crate::observables::{blp_measure, transmission};
use crate::solver::{solve_volterra, AmplitudeTrace, SolverConfig};

/// Grid and unit settings shared by all sweeps. Lengths are in units of
/// `1/alpha`, widths and detunings in units of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub alpha: f64,
    /// Grid step in units of `1/alpha`.
    pub step: f64,
    /// Detuning in units of `alpha`.
    pub detuning: f64,
    /// Upper bound on the number of points kept along a `z` axis.
    pub max_points: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            alpha: 1.0,
            step: 1e-3,
            detuning: 0.0,
            max_points: 2001,
        }
    }
}

impl SweepSettings {
    fn spec(&self, kind: ReservoirKind, gamma_over_alpha: f64) -> Result<ReservoirSpec> {
        let kind = if gamma_over_alpha == 0.0 {
            ReservoirKind::Hermitian
        } else {
            kind
        };
        ReservoirSpec::new(kind, self.alpha, gamma_over_alpha * self.alpha)?
            .with_detuning(self.detuning * self.alpha)
    }

    fn solve(
        &self,
        kind: ReservoirKind,
        gamma_over_alpha: f64,
        alpha_l: f64,
    ) -> Result<AmplitudeTrace> {
        let spec = self.spec(kind, gamma_over_alpha)?;
        let cfg = SolverConfig::new(alpha_l / self.alpha, self.step / self.alpha);
        solve_volterra(&spec, &cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub values: Vec<f64>,
}

/// One observable per curve, all sampled on a shared strictly increasing axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub axis_name: String,
    pub observable: String,
    pub axis: Vec<f64>,
    pub curves: Vec<Curve>,
    /// Fixed parameters of the sweep, recorded for the manifest.
    pub fixed: BTreeMap<String, f64>,
}

impl SweepResult {
    pub fn curve(&self, label: &str) -> Option<&[f64]> {
        self.curves
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.values.as_slice())
    }

    fn check(&self) {
        debug_assert!(self.axis.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(self
            .curves
            .iter()
            .all(|c| c.values.len() == self.axis.len()));
    }
}

/// `points` values log-spaced over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default width axis for transmission-vs-width sweeps: 40 points over `[0.2, 50]`.
pub fn default_gamma_grid() -> Vec<f64> {
    log_grid(0.2, 50.0, 40)
}

/// Width grid for the BLP sweep: the zero-width point followed by 12 values
/// log-spaced over `[0.1, 10]`.
pub fn default_blp_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain(log_grid(0.1, 10.0, 12))
        .collect()
}

fn check_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::param("gamma", "empty width grid"));
    }
    if ratios.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::param(
            "gamma",
            "width ratios must be finite and >= 0",
        ));
    }
    if ratios.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(
            "gamma",
            "width ratios must be strictly increasing",
        ));
    }
    Ok(())
}

fn decimated_indices(n: usize, max_points: usize) -> Vec<usize> {
    let stride = n.div_ceil(max_points.max(2) - 1).max(1);
    let mut idx: Vec<usize> = (0..=n).step_by(stride).collect();
    if *idx.last().unwrap() != n {
        idx.push(n);
    }
    idx
}

fn structured_traces(
    settings: &SweepSettings,
    gamma_over_alpha: f64,
    alpha_l: f64,
) -> Result<Vec<AmplitudeTrace>> {
    ReservoirKind::STRUCTURED
        .par_iter()
        .map(|&k| settings.solve(k, gamma_over_alpha, alpha_l))
        .collect()
}

fn fixed(pairs: &[(&str, f64)], settings: &SweepSettings) -> BTreeMap<String, f64> {
    let mut m: BTreeMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    m.insert("alpha".into(), settings.alpha);
    m.insert("step".into(), settings.step);
    m.insert("detuning".into(), settings.detuning);
    m
}

/// `T(z)` for the three reservoirs at `gamma = ratio * alpha`, plus the
/// zero-width `cos^2` reference labelled `hermitian`. Axis: `alpha z`.
pub fn sweep_transmission_vs_z(
    gamma_over_alpha: f64,
    alpha_l: f64,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_ratios(&[gamma_over_alpha])?;
    let mut traces = structured_traces(settings, gamma_over_alpha, alpha_l)?;
    traces.push(settings.solve(ReservoirKind::Hermitian, 0.0, alpha_l)?);
    let labels = ["lorentzian", "gaussian", "uniform", "hermitian"];

    let n = traces[0].len() - 1;
    let idx = decimated_indices(n, settings.max_points);
    let axis = idx
        .iter()
        .map(|&k| traces[0].z[k] * settings.alpha)
        .collect();
    let curves = traces
        .iter()
        .zip(labels)
        .map(|(tr, label)| {
            let t = transmission(tr);
            Curve {
                label: label.into(),
                values: idx.iter().map(|&k| t[k]).collect(),
            }
        })
        .collect();
    let out = SweepResult {
        name: "fig2".into(),
        axis_name: "alpha_z".into(),
        observable: "T".into(),
        axis,
        curves,
        fixed: fixed(
            &[("gamma_over_alpha", gamma_over_alpha), ("alphaL", alpha_l)],
            settings,
        ),
    };
    out.check();
    Ok(out)
}

/// `log10|f(z)|` for the three reservoirs, with the Markovian overlays
/// `log10 exp(-kappa z)` labelled `<kind>_markov`.
pub fn sweep_logf_vs_z(
    gamma_over_alpha: f64,
    alpha_l: f64,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_ratios(&[gamma_over_alpha])?;
    let traces = structured_traces(settings, gamma_over_alpha, alpha_l)?;
    let n = traces[0].len() - 1;
    let idx = decimated_indices(n, settings.max_points);
    let z: Vec<f64> = idx.iter().map(|&k| traces[0].z[k]).collect();
    let mut curves = Vec::new();
    for (tr, kind) in traces.iter().zip(ReservoirKind::STRUCTURED) {
        curves.push(Curve {
            label: kind.as_str().into(),
            values: idx.iter().map(|&k| tr.f[k].norm().log10()).collect(),
        });
    }
    if gamma_over_alpha > 0.0 {
        for kind in ReservoirKind::STRUCTURED {
            let kappa = markov_rate(&settings.spec(kind, gamma_over_alpha)?)?;
            curves.push(Curve {
                label: format!("{kind}_markov"),
                values: z.iter().map(|z| -kappa * z / LN_10).collect(),
            });
        }
    }
    let out = SweepResult {
        name: "fig3".into(),
        axis_name: "alpha_z".into(),
        observable: "log10_abs_f".into(),
        axis: z.iter().map(|z| z * settings.alpha).collect(),
        curves,
        fixed: fixed(
            &[("gamma_over_alpha", gamma_over_alpha), ("alphaL", alpha_l)],
            settings,
        ),
    };
    out.check();
    Ok(out)
}

/// `T` at each fixed `alpha z` as a function of `gamma/alpha`, one result per
/// `alpha z` value.
pub fn sweep_transmission_vs_gamma(
    alphaz_values: &[f64],
    gamma_ratios: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepResult>> {
    check_ratios(gamma_ratios)?;
    if alphaz_values
        .iter()
        .any(|az| !(az.is_finite() && *az > 0.0))
    {
        return Err(Error::param("alphaz", "propagation lengths must be > 0"));
    }
    let tasks: Vec<(usize, ReservoirKind, f64)> = alphaz_values
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            ReservoirKind::STRUCTURED
                .into_iter()
                .flat_map(move |k| gamma_ratios.iter().map(move |&g| (i, k, g)))
        })
        .collect();
    let values: Vec<f64> = tasks
        .par_iter()
        .map(|&(i, k, g)| {
            let tr = settings.solve(k, g, alphaz_values[i])?;
            Ok(tr.f.last().unwrap().norm_sqr())
        })
        .collect::<Result<_>>()?;

    let per_kind = gamma_ratios.len();
    let per_az = per_kind * 3;
    Ok(alphaz_values
        .iter()
        .enumerate()
        .map(|(i, &az)| {
            let curves = ReservoirKind::STRUCTURED
                .iter()
                .enumerate()
                .map(|(j, k)| {
                    let start = i * per_az + j * per_kind;
                    Curve {
                        label: k.as_str().into(),
                        values: values[start..start + per_kind].to_vec(),
                    }
                })
                .collect();
            let out = SweepResult {
                name: "fig4".into(),
                axis_name: "gamma_over_alpha".into(),
                observable: "T".into(),
                axis: gamma_ratios.to_vec(),
                curves,
                fixed: fixed(&[("alphaz", az)], settings),
            };
            out.check();
            out
        })
        .collect())
}

/// BLP measure at fixed `alpha L` as a function of `gamma/alpha`.
pub fn sweep_blp_vs_gamma(
    gamma_ratios: &[f64],
    alpha_l: f64,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_ratios(gamma_ratios)?;
    if !(alpha_l.is_finite() && alpha_l > 0.0) {
        return Err(Error::param("alphaL", "must be > 0"));
    }
    let tasks: Vec<(ReservoirKind, f64)> = ReservoirKind::STRUCTURED
        .into_iter()
        .flat_map(|k| gamma_ratios.iter().map(move |&g| (k, g)))
        .collect();
    let values: Vec<f64> = tasks
        .par_iter()
        .with_max_len(1)
        .map(|&(k, g)| Ok(blp_measure(&settings.solve(k, g, alpha_l)?)))
        .collect::<Result<_>>()?;
    let n = gamma_ratios.len();
    let curves = ReservoirKind::STRUCTURED
        .iter()
        .enumerate()
        .map(|(j, k)| Curve {
            label: k.as_str().into(),
            values: values[j * n..(j + 1) * n].to_vec(),
        })
        .collect();
    let out = SweepResult {
        name: "fig5".into(),
        axis_name: "gamma_over_alpha".into(),
        observable: "blp".into(),
        axis: gamma_ratios.to_vec(),
        curves,
        fixed: fixed(&[("alphaL", alpha_l)], settings),
    };
    out.check();
    Ok(out)
}

/// True when every step rises by at least `-tol`.
pub fn is_non_decreasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - tol)
}

pub fn is_non_increasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorMinimum {
    /// Location on the axis, refined by a parabola through the three points
    /// around the discrete minimum (in log-axis coordinates when the axis is
    /// positive).
    pub at: f64,
    pub value: f64,
    pub index: usize,
}

/// Finds a minimum strictly inside the sweep that lies at least `tol` below
/// both end points.
pub fn interior_minimum(axis: &[f64], values: &[f64], tol: f64) -> Option<InteriorMinimum> {
    let n = values.len();
    if n < 3 || axis.len() != n {
        return None;
    }
    let (index, &vmin) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    if index == 0 || index == n - 1 || vmin >= values[0].min(values[n - 1]) - tol {
        return None;
    }
    let logx = axis[index - 1] > 0.0;
    let x = |i: usize| if logx { axis[i].ln() } else { axis[i] };
    let (x0, x1, x2) = (x(index - 1), x(index), x(index + 1));
    let (y0, y1, y2) = (values[index - 1], values[index], values[index + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    let c = y1 - a * x1 * x1 - b * x1;
    let (at, value) = if a > 0.0 {
        let xv = (-b / (2.0 * a)).clamp(x0, x2);
        (xv, (a * xv * xv + b * xv + c).min(vmin))
    } else {
        (x1, vmin)
    };
    Some(InteriorMinimum {
        at: if logx { at.exp() } else { at },
        value,
        index,
    })
}

/// Label of the curve with the largest value at axis index `i`.
pub fn argmax_curve(sweep: &SweepResult, i: usize) -> Option<&str> {
    sweep
        .curves
        .iter()
        .max_by(|a, b| a.values[i].total_cmp(&b.values[i]))
        .map(|c| c.label.as_str())
}
