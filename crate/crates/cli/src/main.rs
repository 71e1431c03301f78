//! `guidemem`: solve the waveguide memory equation, print its power series and
//! run the width sweeps, writing CSV, JSON and SVG files.

mod svg;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use guidemem::io::{quantized, write_sweep_csv, write_trace_csv};
use guidemem::series::closed_form_quartic;
use guidemem::sweeps::{
    default_blp_grid, default_gamma_grid, sweep_blp_vs_gamma, sweep_logf_vs_z,
    sweep_transmission_vs_gamma, sweep_transmission_vs_z,
};
use guidemem::{
    amplitude_series, kernel_series, solve_volterra, transmission, Error, ReportSummary,
    ReservoirKind, ReservoirSpec, SolverConfig, SweepResult, SweepSettings,
};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "guidemem",
    version,
    about = "Photon amplitude in a waveguide coupled to a structured reservoir"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for f(z) and write the trace and its observables.
    Solve(SolveArgs),
    /// Print the Taylor coefficients of f(z) next to the closed-form reference.
    Series(SeriesArgs),
    /// Run one of the figure sweeps.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Serialize)]
struct Common {
    /// Coupling strength alpha; lengths are in units of 1/alpha.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Grid step in units of 1/alpha.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Detuning beta - beta_c in units of alpha.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    detuning: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output formats.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json])]
    format: Vec<Format>,
}

#[derive(Args)]
struct SolveArgs {
    /// Reservoir line shape.
    #[arg(long)]
    kind: ReservoirKind,
    /// Width gamma/alpha (0 for hermitian).
    #[arg(long)]
    gamma: Option<f64>,
    /// Propagation length alpha L.
    #[arg(long = "alphaL", default_value_t = 10.0)]
    alpha_l: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    kind: ReservoirKind,
    /// Width gamma/alpha (0 for hermitian).
    #[arg(long)]
    gamma: Option<f64>,
    /// Highest coefficient order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    figure: Figure,
    /// Width gamma/alpha (fig2 default 2, fig3 default 10).
    #[arg(long)]
    gamma: Option<f64>,
    /// Length alpha L (fig2 default 10, fig3 default 8, fig5 default 100).
    #[arg(long = "alphaL")]
    alpha_l: Option<f64>,
    /// Propagation lengths alpha z for fig4.
    #[arg(long, value_delimiter = ',')]
    alphaz: Vec<f64>,
    /// Width grid gamma/alpha for fig4 and fig5, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    gammas: Vec<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

/// Resolved configuration echoed into every manifest.
#[derive(Serialize)]
struct RunConfig {
    subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    figure: Option<Figure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<ReservoirKind>,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_over_alpha: Option<f64>,
    #[serde(rename = "alphaL", skip_serializing_if = "Option::is_none")]
    alpha_l: Option<f64>,
    step: f64,
    detuning_over_alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    alphaz: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    gammas: Vec<f64>,
    out: PathBuf,
    formats: Vec<Format>,
}

impl RunConfig {
    fn new(subcommand: &'static str, common: &Common) -> Self {
        RunConfig {
            subcommand,
            figure: None,
            kind: None,
            alpha: common.alpha,
            gamma_over_alpha: None,
            alpha_l: None,
            step: common.step,
            detuning_over_alpha: common.detuning,
            order: None,
            alphaz: Vec::new(),
            gammas: Vec::new(),
            out: common.out.clone(),
            formats: common.format.clone(),
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Format(_) => Failure::Runtime(e.to_string()),
            e if e.is_numerical() => Failure::Runtime(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Files collected in memory and written once the run has succeeded.
struct Output {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn add_json(&mut self, name: impl Into<String>, value: &impl Serialize) -> Outcome<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Writes every file plus `manifest.json`.
    fn finish(mut self, cfg: &RunConfig, extra: serde_json::Value) -> Outcome<()> {
        let names: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        let manifest = json!({
            "program": "guidemem",
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": chrono::Utc::now().to_rfc3339(),
            "config": cfg,
            "files": names,
            "details": extra,
        });
        self.add_json("manifest.json", &manifest)?;
        fs::create_dir_all(&self.dir)?;
        for (name, bytes) in &self.files {
            fs::write(self.dir.join(name), bytes)?;
        }
        Ok(())
    }
}

fn reservoir(kind: ReservoirKind, gamma: Option<f64>, common: &Common) -> Outcome<ReservoirSpec> {
    let ratio = match (kind, gamma) {
        (ReservoirKind::Hermitian, g) => g.unwrap_or(0.0),
        (_, Some(g)) => g,
        (_, None) => {
            return Err(Failure::Usage(format!(
                "--gamma is required for --kind {kind}"
            )))
        }
    };
    let a = common.alpha;
    Ok(ReservoirSpec::new(kind, a, ratio * a)?.with_detuning(common.detuning * a)?)
}

fn cmd_solve(args: &SolveArgs) -> Outcome<()> {
    let c = &args.common;
    let spec = reservoir(args.kind, args.gamma, c)?;
    let mut cfg = RunConfig::new("solve", c);
    cfg.kind = Some(spec.kind());
    cfg.gamma_over_alpha = Some(spec.gamma() / c.alpha);
    cfg.alpha_l = Some(args.alpha_l);

    let solver = SolverConfig::new(args.alpha_l / c.alpha, c.step / c.alpha);
    let trace = quantized(&solve_volterra(&spec, &solver)?);
    let report = ReportSummary::from_trace(&trace);

    let mut out = Output::new(&c.out);
    if cfg.wants(Format::Csv) {
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf)?;
        out.add("trace.csv", buf);
    }
    if cfg.wants(Format::Json) {
        out.add_json("report.json", &report)?;
    }
    if cfg.wants(Format::Svg) {
        let xs: Vec<f64> = trace.z.iter().map(|z| z * c.alpha).collect();
        let ys = transmission(&trace);
        let title = format!(
            "{} reservoir, gamma = {}",
            spec.kind(),
            spec.gamma() / c.alpha
        );
        let chart = svg::Chart {
            title: &title,
            x_label: "alpha z",
            y_label: "T",
            log_x: false,
        };
        let line = svg::Line {
            label: spec.kind().as_str(),
            xs: &xs,
            ys: &ys,
            dash: None,
        };
        out.add("trace.svg", svg::line_chart(&chart, &[line]).into_bytes());
    }
    let end = trace.f.last().copied().unwrap_or_default();
    println!(
        "solved {} to alpha L = {}: f(L) = {:.6} {:+.6}i, T(L) = {:.6}, blp = {:.6}",
        spec.kind(),
        args.alpha_l,
        end.re,
        end.im,
        end.norm_sqr(),
        report.blp
    );
    out.finish(&cfg, json!({ "points": trace.len() }))
}

#[derive(Serialize)]
struct SeriesRow {
    n: usize,
    re: f64,
    im: f64,
    reference: Option<f64>,
    abs_diff: Option<f64>,
}

/// Closed-form coefficient of order `n`, where one is known.
fn reference_coefficient(spec: &ReservoirSpec, n: usize) -> Option<f64> {
    if spec.detuning() != 0.0 {
        return None;
    }
    if spec.kind() == ReservoirKind::Hermitian {
        if n % 2 == 1 {
            return Some(0.0);
        }
        let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        return Some(sign * spec.alpha().powi(n as i32) / fact);
    }
    (n <= 4).then(|| closed_form_quartic(spec.kind(), spec.alpha(), spec.gamma())[n])
}

fn cmd_series(args: &SeriesArgs) -> Outcome<()> {
    let c = &args.common;
    let spec = reservoir(args.kind, args.gamma, c)?;
    let mut cfg = RunConfig::new("series", c);
    cfg.kind = Some(spec.kind());
    cfg.gamma_over_alpha = Some(spec.gamma() / c.alpha);
    cfg.order = Some(args.order);

    let series = amplitude_series(&kernel_series(&spec, args.order), args.order)?;
    let rows: Vec<SeriesRow> = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, f)| {
            let reference = reference_coefficient(&spec, n);
            SeriesRow {
                n,
                re: f.re + 0.0,
                im: f.im + 0.0,
                reference,
                abs_diff: reference.map(|r| (f - r).norm()),
            }
        })
        .collect();

    println!(
        "{:>3}  {:>22}  {:>22}  {:>22}",
        "n", "re f_n", "im f_n", "reference"
    );
    let mut mismatches = Vec::new();
    for r in &rows {
        let reference = r
            .reference
            .map(|v| format!("{v:.15e}"))
            .unwrap_or_else(|| "-".into());
        let bad = match (r.reference, r.abs_diff) {
            (Some(v), Some(d)) => d > 1e-12 * v.abs().max(1.0),
            _ => false,
        };
        println!(
            "{:>3}  {:>22.15e}  {:>22.15e}  {:>22}{}",
            r.n,
            r.re + 0.0,
            r.im + 0.0,
            reference,
            if bad { "  MISMATCH" } else { "" }
        );
        if bad {
            mismatches.push(r.n);
        }
    }

    let mut out = Output::new(&c.out);
    if cfg.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "re_f", "im_f", "reference", "abs_diff"])
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        for r in &rows {
            let opt = |v: Option<f64>| v.map(guidemem::io::fmt_num).unwrap_or_default();
            w.write_record([
                r.n.to_string(),
                guidemem::io::fmt_num(r.re),
                guidemem::io::fmt_num(r.im),
                opt(r.reference),
                opt(r.abs_diff),
            ])
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        }
        let buf = w
            .into_inner()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        out.add("series.csv", buf);
    }
    if cfg.wants(Format::Json) {
        out.add_json(
            "series.json",
            &json!({ "kind": spec.kind(), "coefficients": rows, "mismatches": mismatches }),
        )?;
    }
    out.finish(&cfg, json!({ "mismatches": mismatches }))?;
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "coefficients {mismatches:?} differ from the closed form by more than 1e-12"
        )))
    }
}

fn sweep_chart(sweep: &SweepResult) -> String {
    let (title, x_label) = match sweep.name.as_str() {
        "fig2" => ("Transmission along the guide", "alpha z"),
        "fig3" => ("Amplitude decay and Markovian rates", "alpha z"),
        "fig4" => ("Transmission against reservoir width", "gamma / alpha"),
        _ => ("BLP measure against reservoir width", "gamma / alpha"),
    };
    let title = match sweep.fixed.get("alphaz") {
        Some(az) => format!("{title}, alpha z = {az:.4}"),
        None => title.to_string(),
    };
    let log_x = sweep.axis_name == "gamma_over_alpha" && sweep.axis.iter().any(|&x| x > 0.0);
    let lines: Vec<svg::Line> = sweep
        .curves
        .iter()
        .map(|c| svg::Line {
            label: &c.label,
            xs: &sweep.axis,
            ys: &c.values,
            dash: if c.label == "hermitian" {
                Some("2,3")
            } else if c.label.ends_with("_markov") {
                Some("6,4")
            } else {
                None
            },
        })
        .collect();
    let chart = svg::Chart {
        title: &title,
        x_label,
        y_label: &sweep.observable,
        log_x,
    };
    svg::line_chart(&chart, &lines)
}

fn cmd_sweep(args: &SweepArgs) -> Outcome<()> {
    let c = &args.common;
    let mut cfg = RunConfig::new("sweep", c);
    cfg.figure = Some(args.figure);
    let settings = SweepSettings {
        alpha: c.alpha,
        step: c.step,
        detuning: c.detuning,
        ..SweepSettings::default()
    };
    if !(c.alpha.is_finite() && c.alpha > 0.0) {
        return Err(Failure::Usage(format!(
            "--alpha must be > 0, got {}",
            c.alpha
        )));
    }
    let gammas = |default: Vec<f64>| {
        if args.gammas.is_empty() {
            default
        } else {
            args.gammas.clone()
        }
    };

    let sweeps = match args.figure {
        Figure::Fig2 | Figure::Fig3 => {
            let fig2 = args.figure == Figure::Fig2;
            let g = args.gamma.unwrap_or(if fig2 { 2.0 } else { 10.0 });
            let l = args.alpha_l.unwrap_or(if fig2 { 10.0 } else { 8.0 });
            cfg.gamma_over_alpha = Some(g);
            cfg.alpha_l = Some(l);
            vec![if fig2 {
                sweep_transmission_vs_z(g, l, &settings)?
            } else {
                sweep_logf_vs_z(g, l, &settings)?
            }]
        }
        Figure::Fig4 => {
            let az = if args.alphaz.is_empty() {
                vec![PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI]
            } else {
                args.alphaz.clone()
            };
            cfg.alphaz = az.clone();
            cfg.gammas = gammas(default_gamma_grid());
            sweep_transmission_vs_gamma(&az, &cfg.gammas, &settings)?
        }
        Figure::Fig5 => {
            let l = args.alpha_l.unwrap_or(100.0);
            cfg.alpha_l = Some(l);
            cfg.gammas = gammas(default_blp_grid());
            vec![sweep_blp_vs_gamma(&cfg.gammas, l, &settings)?]
        }
    };

    let mut out = Output::new(&c.out);
    let mut listing = Vec::new();
    for sw in &sweeps {
        let stem = match sw.fixed.get("alphaz") {
            Some(az) if sw.name == "fig4" => format!("fig4_alphaz{az:.4}"),
            _ => sw.name.clone(),
        };
        let mut files = Vec::new();
        if cfg.wants(Format::Csv) {
            let mut buf = Vec::new();
            write_sweep_csv(sw, &mut buf)?;
            files.push(format!("{stem}.csv"));
            out.add(format!("{stem}.csv"), buf);
        }
        if cfg.wants(Format::Json) {
            files.push(format!("{stem}.json"));
            out.add_json(format!("{stem}.json"), sw)?;
        }
        if cfg.wants(Format::Svg) {
            files.push(format!("{stem}.svg"));
            out.add(format!("{stem}.svg"), sweep_chart(sw).into_bytes());
        }
        println!(
            "{stem}: {} curves x {} points",
            sw.curves.len(),
            sw.axis.len()
        );
        listing.push(json!({
            "name": sw.name,
            "axis": sw.axis_name,
            "observable": sw.observable,
            "fixed": sw.fixed,
            "files": files,
        }));
    }
    out.finish(&cfg, json!({ "sweeps": listing }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match &cli.command {
        Command::Solve(a) => ("solve", cmd_solve(a)),
        Command::Series(a) => ("series", cmd_series(a)),
        Command::Sweep(a) => ("sweep", cmd_sweep(a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let sub = cmd.find_subcommand_mut(name).expect("known subcommand");
            sub.error(ErrorKind::ValueValidation, msg).exit()
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
