//! CSV serialisation of traces and sweeps.
//!
//! Numbers are written in scientific notation with 12 significant digits so
//! identical runs produce byte-identical files.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::ReservoirSpec;
use crate::solver::AmplitudeTrace;
use crate::sweeps::SweepResult;

pub const TRACE_HEADER: [&str; 5] = ["z", "re_f", "im_f", "abs_f", "T"];
pub const SWEEP_HEADER: [&str; 3] = ["kind", "axis_value", "observable"];

/// Formats with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds to the value that survives a write/read cycle.
pub fn quantize(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted float parses")
}

/// The trace as it reads back from its CSV form.
pub fn quantized(trace: &AmplitudeTrace) -> AmplitudeTrace {
    AmplitudeTrace {
        z: trace.z.iter().map(|&z| quantize(z)).collect(),
        f: trace
            .f
            .iter()
            .map(|f| Complex64::new(quantize(f.re), quantize(f.im)))
            .collect(),
        spec: trace.spec,
    }
}

pub fn write_trace_csv<W: Write>(trace: &AmplitudeTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for (z, f) in trace.z.iter().zip(&trace.f) {
        w.write_record([
            fmt_num(*z),
            fmt_num(f.re),
            fmt_num(f.im),
            fmt_num(f.norm()),
            fmt_num(f.norm_sqr()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace CSV. The file carries no reservoir parameters, so the spec
/// that produced it is supplied by the caller.
pub fn read_trace_csv<R: Read>(input: R, spec: ReservoirSpec) -> Result<AmplitudeTrace> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    };
    let (iz, ire, iim) = (col("z")?, col("re_f")?, col("im_f")?);
    let mut z = Vec::new();
    let mut f = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad number in row {}", line + 2)))
        };
        z.push(get(iz)?);
        f.push(Complex64::new(get(ire)?, get(iim)?));
    }
    if f.len() < 2 {
        return Err(Error::Format("a trace needs at least two rows".into()));
    }
    if z[0] != 0.0 {
        return Err(Error::Format(format!(
            "trace must start at z = 0, got {}",
            z[0]
        )));
    }
    Ok(AmplitudeTrace { z, f, spec })
}

pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for curve in &sweep.curves {
        for (x, y) in sweep.axis.iter().zip(&curve.values) {
            w.write_record([curve.label.clone(), fmt_num(*x), fmt_num(*y)])?;
        }
    }
    w.flush()?;
    Ok(())
}
