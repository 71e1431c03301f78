//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use guidemem::kernels::LN_256;
use guidemem::series::{closed_form_quartic, recurrence};
use guidemem::sweeps::{
    argmax_curve, default_gamma_grid, interior_minimum, is_non_decreasing, is_non_increasing,
    sweep_blp_vs_gamma, sweep_transmission_vs_gamma,
};
use guidemem::{
    amplitude_series, blp_hermitian_closed_form, blp_measure, build_bath, fit_decay_rate,
    flux_rate, kernel_series, lorentzian_exact, markov_rate, solve_discrete_modes, solve_volterra,
    transmission, AmplitudeTrace, ReservoirKind, ReservoirSpec, SolverConfig, SweepSettings,
};
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ReservoirKind::{Gaussian, Hermitian, Lorentzian, Uniform};

const T1_TOL: f64 = 1e-5;
const T1_TIME: Duration = Duration::from_secs(1);
const T2_TOL: f64 = 1e-6;
const T2_ORDER: (f64, f64) = (1.8, 2.2);
const T2_TIME: Duration = Duration::from_secs(5);
const T3_TOL: f64 = 1e-12;
const T3_TIME: Duration = Duration::from_secs(1);
const T4_TOL: f64 = 1e-3;
const T4_NORM: f64 = 1e-6;
const T4_TIME: Duration = Duration::from_secs(60);
const T5_TOL: f64 = 1e-3;
const T5_TIME: Duration = Duration::from_secs(10);
const T6_REL: f64 = 0.05;
const T6_TIME: Duration = Duration::from_secs(30);
const T7_MIN_TOL: f64 = 1e-4;
const T7_TIME: Duration = Duration::from_secs(300);
const T8_TIME: Duration = Duration::from_secs(600);
const T9_TIME: Duration = Duration::from_secs(5);

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spec(kind: ReservoirKind, alpha: f64, gamma: f64) -> ReservoirSpec {
    ReservoirSpec::new(kind, alpha, gamma).expect("valid spec")
}

fn solve(s: &ReservoirSpec, length: f64, step: f64) -> AmplitudeTrace {
    solve_volterra(s, &SolverConfig::new(length, step)).expect("solve")
}

fn timed(limit: Duration, run: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = run();
    let took = start.elapsed();
    o.detail = format!("{}; {:.2?} (limit {:?})", o.detail, took, limit);
    o.pass &= took < limit;
    o
}

fn hermitian_limit() -> Outcome {
    let tr = solve(&spec(Hermitian, 1.0, 0.0), 4.0 * PI, 1e-3);
    let err =
        tr.z.iter()
            .zip(transmission(&tr))
            .map(|(z, t)| (t - z.cos().powi(2)).abs())
            .fold(0.0, f64::max);
    outcome(
        err < T1_TOL,
        format!("max |T - cos^2| = {err:.3e} (tol {T1_TOL:e})"),
    )
}

fn lorentzian_oracle() -> Outcome {
    let (alpha, gamma) = (1.0, 2.0);
    let s = spec(Lorentzian, alpha, gamma);
    let err_at = |h: f64| {
        let tr = solve(&s, 10.0, h);
        tr.z.iter()
            .zip(&tr.f)
            .map(|(&z, f)| (f - lorentzian_exact(alpha, gamma, z)).norm())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&h| err_at(h)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|p| (T2_ORDER.0..=T2_ORDER.1).contains(p));
    outcome(
        errs[2] < T2_TOL && order_ok,
        format!(
            "max err at h=1e-3: {:.3e} (tol {T2_TOL:e}); orders {:.3}, {:.3}",
            errs[2], orders[0], orders[1]
        ),
    )
}

fn series_conformance() -> Outcome {
    let mut worst: f64 = 0.0;
    for kind in [Lorentzian, Gaussian, Uniform] {
        for alpha in [0.5, 1.0, 2.0] {
            for gamma in [0.0, 1.0, 2.0, 10.0] {
                let s = spec(kind, alpha, gamma);
                let series = amplitude_series(&kernel_series(&s, 4), 4).expect("series");
                let exact = closed_form_quartic(s.kind(), alpha, gamma);
                for (c, e) in series.coeffs.iter().zip(exact) {
                    worst = worst.max((c - e).norm() / e.abs().max(1.0));
                }
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut symbolic = true;
    for _ in 0..200 {
        let mut r = || Ratio::new(rng.random_range(-999i64..=999), rng.random_range(1i64..=99));
        let m = [r(), r(), r()];
        let f = recurrence(&m, 4).expect("recurrence");
        let f4 = (m[0] * m[0] - m[2] * 2) / 24;
        symbolic &= f[2] == -m[0] / 2 && f[3] == -m[1] / 6 && f[4] == f4;
    }
    outcome(
        worst < T3_TOL && symbolic,
        format!(
            "worst closed-form deviation {worst:.3e} (tol {T3_TOL:e}); exact rational f4 identity on 200 samples: {symbolic}"
        ),
    )
}

fn bath_equivalence() -> Outcome {
    let s = spec(Uniform, 1.0, 2.0);
    let cfg = SolverConfig::new(10.0, 1e-3);
    let tr = solve_volterra(&s, &cfg).expect("solve");
    let bath = build_bath(&s, 2000, None).expect("bath");
    let ev = match solve_discrete_modes(&bath, &s, 0.0, &cfg) {
        Ok(ev) => ev,
        Err(e) => return outcome(false, format!("bath integration failed: {e}")),
    };
    let err =
        tr.f.iter()
            .zip(&ev.trace.f)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
    outcome(
        err < T4_TOL && ev.max_norm_drift < T4_NORM,
        format!(
            "max |f_volterra - c_a| = {err:.3e} (tol {T4_TOL:e}); norm drift {:.3e} (tol {T4_NORM:e})",
            ev.max_norm_drift
        ),
    )
}

fn blp_closed_form() -> Outcome {
    let l = 100.0 * PI;
    let tr = solve(&spec(Hermitian, 1.0, 0.0), l, 1e-3);
    let n = blp_measure(&tr);
    let n0 = blp_hermitian_closed_form(l);
    outcome(
        (n - 100.0).abs() < T5_TOL && (n - n0).abs() < T5_TOL,
        format!("N = {n:.6}, closed form {n0:.6} (target 100 +- {T5_TOL:e})"),
    )
}

fn markov_rates() -> Outcome {
    let (alpha, gamma) = (1.0, 10.0);
    let predicted = [
        (Lorentzian, 2.0 * alpha * alpha / gamma),
        (Gaussian, (PI * LN_256 / 2.0).sqrt() * alpha * alpha / gamma),
        (Uniform, PI * alpha * alpha / gamma),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut fitted = Vec::new();
    for (kind, k_expected) in predicted {
        let s = spec(kind, alpha, gamma);
        let k_markov = markov_rate(&s).expect("rate");
        let window = (1.0 / k_markov, 5.0 / k_markov);
        let tr = solve(&s, window.1, 1e-3);
        let fit = fit_decay_rate(&tr, window).expect("fit");
        let rel = (fit.kappa - k_expected).abs() / k_expected;
        pass &= rel < T6_REL;
        fitted.push(fit.kappa);
        parts.push(format!(
            "{kind} {:.4} vs {k_expected:.4} ({:.1}%)",
            fit.kappa,
            100.0 * rel
        ));
    }
    let ordered = fitted[2] > fitted[1] && fitted[1] > fitted[0];
    outcome(
        pass && ordered,
        format!("{}; U > G > L: {ordered}", parts.join(", ")),
    )
}

fn fig4_shape() -> Outcome {
    let settings = SweepSettings::default();
    let grid = default_gamma_grid();
    let alphaz = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let sweeps = match sweep_transmission_vs_gamma(&alphaz, &grid, &settings) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let mut pass = true;
    let mut notes = Vec::new();
    for sw in &sweeps[..2] {
        for c in &sw.curves {
            if !is_non_decreasing(&c.values, 0.0) {
                pass = false;
                notes.push(format!(
                    "{} not monotone at az={:.4}",
                    c.label, sw.fixed["alphaz"]
                ));
            }
        }
    }
    for sw in &sweeps[2..] {
        for c in &sw.curves {
            match interior_minimum(&sw.axis, &c.values, T7_MIN_TOL) {
                Some(m) => notes.push(format!(
                    "{} min at g={:.2} (az={:.3})",
                    c.label, m.at, sw.fixed["alphaz"]
                )),
                None => {
                    pass = false;
                    notes.push(format!(
                        "{} no interior min at az={:.4}",
                        c.label, sw.fixed["alphaz"]
                    ));
                }
            }
        }
    }
    let ends = match sweep_transmission_vs_gamma(&[PI], &[0.5, 20.0], &settings) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let small = argmax_curve(&ends[0], 0).unwrap_or("?").to_string();
    let large = argmax_curve(&ends[0], 1).unwrap_or("?").to_string();
    pass &= small == "uniform" && large == "lorentzian";
    notes.push(format!("argmax T at az=pi: g=0.5 {small}, g=20 {large}"));
    outcome(pass, notes.join("; "))
}

fn fig5_properties() -> Outcome {
    let settings = SweepSettings::default();
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let sw = match sweep_blp_vs_gamma(&grid, 100.0, &settings) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let mut pass = true;
    let mut notes = Vec::new();
    for c in &sw.curves {
        let mono = is_non_increasing(&c.values, 0.0);
        pass &= mono;
        let vals: Vec<String> = c.values.iter().map(|v| format!("{v:.4}")).collect();
        notes.push(format!(
            "{} [{}]{}",
            c.label,
            vals.join(" "),
            if mono { "" } else { " NOT monotone" }
        ));
    }
    let at = |label: &str| sw.curve(label).expect("curve")[2];
    let (u, g, l) = (at("uniform"), at("gaussian"), at("lorentzian"));
    let ordered = u > g && g > l;
    pass &= ordered;
    notes.push(format!("g=2: U {u:.4} > G {g:.4} > L {l:.4}: {ordered}"));
    outcome(pass, notes.join("; "))
}

fn flux_identity() -> Outcome {
    let h = 1e-3;
    let length = 10.0;
    let residual = |s: &ReservoirSpec| {
        let tr = solve(s, length, h);
        let t = transmission(&tr);
        let flux = flux_rate(&tr, s);
        (1..t.len() - 1)
            .map(|k| ((t[k + 1] - t[k - 1]) / (2.0 * h) - flux[k]).abs())
            .fold(0.0, f64::max)
    };
    let c = residual(&spec(Hermitian, 1.0, 0.0)) / (h * h);
    let mut pass = true;
    let mut parts = vec![format!("C = {c:.4}")];
    for kind in [Lorentzian, Gaussian, Uniform] {
        let r = residual(&spec(kind, 1.0, 2.0));
        pass &= r < c * h * h;
        parts.push(format!("{kind} {:.4} h^2", r / (h * h)));
    }
    outcome(pass, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 hermitian limit", T1_TIME, hermitian_limit),
        ("2 lorentzian oracle", T2_TIME, lorentzian_oracle),
        ("3 series conformance", T3_TIME, series_conformance),
        ("4 discrete-bath equivalence", T4_TIME, bath_equivalence),
        ("5 blp closed form", T5_TIME, blp_closed_form),
        ("6 markov rates", T6_TIME, markov_rates),
        ("7 transmission vs width shape", T7_TIME, fig4_shape),
        ("8 blp vs width properties", T8_TIME, fig5_properties),
        ("9 flux identity", T9_TIME, flux_identity),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, limit, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let o = timed(limit, run);
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
