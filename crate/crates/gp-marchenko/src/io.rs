//! Bit-stable text export and re-import of sampled fields.
//!
//! Values are printed with 17 significant digits (`{:.17e}`), which is
//! enough for `f64` to survive a write/parse round trip bit-exactly; rerun
//! determinism therefore reduces to deterministic computation.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::nsoliton::{Axis, FieldGrid, Provenance};
use crate::{Error, Result};

/// Header of the field export format.
pub const FIELD_CSV_HEADER: &str = "t,x,re_u,im_u,abs_u";

/// Write a sampled field as CSV rows `t,x,re_u,im_u,abs_u` (t-major, 17
/// significant digits).
pub fn write_field_csv(out: &mut impl Write, field: &FieldGrid) -> std::io::Result<()> {
    writeln!(out, "{FIELD_CSV_HEADER}")?;
    for it in 0..field.t.len {
        let t = field.t.value(it);
        for ix in 0..field.x.len {
            let u = field.at(it, ix);
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                t,
                field.x.value(ix),
                u.re,
                u.im,
                u.norm()
            )?;
        }
    }
    Ok(())
}

/// Re-parse a field CSV produced by [`write_field_csv`], reconstructing the
/// uniform axes from the sample coordinates.
pub fn read_field_csv(input: &mut impl BufRead, provenance: Provenance) -> Result<FieldGrid> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("field CSV is empty".to_string()))??;
    if header.trim() != FIELD_CSV_HEADER {
        return Err(Error::Config(format!(
            "unexpected field CSV header: {header:?}"
        )));
    }
    let mut ts: Vec<f64> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    let mut values: Vec<Complex64> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Config(format!(
                "field CSV row {} has {} columns, expected 5",
                idx + 2,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?} in field CSV: {e}")))
        };
        ts.push(parse(cols[0])?);
        xs.push(parse(cols[1])?);
        values.push(Complex64::new(parse(cols[2])?, parse(cols[3])?));
    }
    if values.is_empty() {
        return Err(Error::Config("field CSV has no data rows".to_string()));
    }
    // t-major layout: x sweeps fastest; the first run of equal t values
    // delimits one row.
    let x_len = ts.iter().take_while(|&&t| t == ts[0]).count();
    if values.len() % x_len != 0 {
        return Err(Error::Config(format!(
            "field CSV rows ({}) not a multiple of the x count ({x_len})",
            values.len()
        )));
    }
    let t_len = values.len() / x_len;
    let x_axis = axis_from_samples(&xs[..x_len])?;
    let t_samples: Vec<f64> = (0..t_len).map(|it| ts[it * x_len]).collect();
    let t_axis = axis_from_samples(&t_samples)?;
    // Cross-check the full coordinate lattice.
    for it in 0..t_len {
        for ix in 0..x_len {
            let row = it * x_len + ix;
            if ts[row] != t_samples[it] || xs[row] != xs[ix] {
                return Err(Error::Config(format!(
                    "field CSV row {} breaks the uniform t-major lattice",
                    row + 2
                )));
            }
        }
    }
    FieldGrid::from_values(t_axis, x_axis, values, provenance)
}

fn axis_from_samples(samples: &[f64]) -> Result<Axis> {
    if samples.is_empty() {
        return Err(Error::Config("empty axis in field CSV".to_string()));
    }
    if samples.len() == 1 {
        return Ok(Axis::singleton(samples[0]));
    }
    let step = samples[1] - samples[0];
    if !(step > 0.0) {
        return Err(Error::Config(format!(
            "non-increasing axis in field CSV (step {step})"
        )));
    }
    let axis = Axis::new(samples[0], step, samples.len())?;
    for (i, &s) in samples.iter().enumerate() {
        if (s - axis.value(i)).abs() > 1e-9 * (1.0 + s.abs()) {
            return Err(Error::Config(format!(
                "axis sample {i} = {s} deviates from a uniform grid"
            )));
        }
    }
    Ok(axis)
}

/// Structured sidecar written next to each field CSV: grid metadata,
/// provenance, and per-run diagnostic summaries.  Serialized as JSON with a
/// fixed field order, so identical runs produce identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    pub command: String,
    pub provenance: String,
    pub t_min: f64,
    pub t_step: f64,
    pub t_len: usize,
    pub x_min: f64,
    pub x_step: f64,
    pub x_len: usize,
    /// Summary scalars (key -> value) such as residuals or iteration
    /// counts; ordered map for stable serialization.
    pub summary: std::collections::BTreeMap<String, f64>,
    /// Optional per-point diagnostics (one entry per grid point, t-major).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_point: Vec<PointDiagnostics>,
}

/// Per-point solver diagnostics exported with perturbed fields.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointDiagnostics {
    pub t: f64,
    pub x: f64,
    pub iterations: usize,
    pub contraction_ratio: f64,
    pub residual: f64,
    pub budget_total: f64,
}

impl Sidecar {
    pub fn for_field(command: &str, field: &FieldGrid) -> Sidecar {
        Sidecar {
            command: command.to_string(),
            provenance: field.provenance.as_str().to_string(),
            t_min: field.t.min,
            t_step: field.t.step,
            t_len: field.t.len,
            x_min: field.x.min,
            x_step: field.x.step,
            x_len: field.x.len,
            summary: std::collections::BTreeMap::new(),
            per_point: Vec::new(),
        }
    }

    pub fn write(&self, out: &mut impl Write) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("sidecar serialization failed: {e}")))?;
        out.write_all(text.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(input: &mut impl BufRead) -> Result<Sidecar> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("sidecar parse failed: {e}")))
    }
}
