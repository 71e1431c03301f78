//! Photon-amplitude dynamics in a single waveguide coupled to a structured
//! reservoir with memory.
//!
//! The guided-mode amplitude obeys the integro-differential equation
//! `f'(z) = -(m~ * f)(z)` with `f(0) = 1`, where the memory kernel `m~` is the
//! autocorrelation of the reservoir spectral density ([`kernels`]). The crate
//! solves it by series ([`series`]) and on a grid ([`solver`]), checks both
//! against independent references ([`oracles`]), and derives transmission,
//! flux, decay rates and the BLP non-Markovianity measure ([`observables`]),
//! including the width sweeps in [`sweeps`].

pub mod error;
pub mod io;
pub mod kernels;
pub mod observables;
pub mod oracles;
pub mod series;
pub mod solver;
pub mod sweeps;

pub use error::{Error, Result};
pub use kernels::{
    autocorrelation, kernel_series, markov_rate, pdf, KernelSeries, ReservoirKind, ReservoirSpec,
};
pub use num_complex::Complex64;
pub use observables::{
    blp_hermitian_closed_form, blp_measure, fit_decay_rate, flux_rate, observe, transmission,
    DecayFit, ObservableReport, ReportSummary,
};
pub use oracles::{build_bath, lorentzian_exact, solve_discrete_modes, DiscreteBath};
pub use series::{amplitude_series, eval_series, AmplitudeSeries};
pub use solver::{convolve_history, solve_volterra, AmplitudeTrace, SolverConfig};
pub use sweeps::{SweepResult, SweepSettings};
