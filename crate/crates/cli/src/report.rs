//! JSON report shapes and the diagnostics bundle shared by `solve` and `verify`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use nodal_lab::diagnostics::{
    foliated_schwarz_check, nodal_domains, pde_residual, quantization_floor, radiality_deviation,
    zero_measure_curve, PdeResidual, SymmetryReport, SymmetryTolerances, ZeroSetCurve,
};
use nodal_lab::functional::{in_constraint, ProblemSpec};
use nodal_lab::{Error, Field64, Grid64};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Thresholds};

pub const TOOL: &str = "nodal-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fields every report carries; enough for `verify` to rebuild the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// Field dump, relative to the report's directory.
    pub field_dump: String,
}

impl ReportHeader {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        ReportHeader {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config: config.clone(),
            field_dump: "field.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, R: Serialize> {
    #[serde(flatten)]
    pub header: ReportHeader,
    pub result: &'a R,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Report(SymmetryReport<f64>),
    /// No first angular mode: the field is (numerically) radial.
    AxisUndefined { radiality: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub q: f64,
    pub constraint_member: bool,
    pub constraint_residual: f64,
    pub nodal_domains: usize,
    pub zero_set: ZeroSetCurve<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radiality_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Symmetry>,
    pub pde_residual: PdeResidual<f64>,
    pub thresholds: Thresholds,
    /// Residual thresholds met.
    pub passes: bool,
}

/// `δ` values for the zero-set curve: the quantization floor, then
/// `max|u|` times `1e−6 … 1e−1`.
pub fn zero_set_deltas(u: &Field64) -> Vec<f64> {
    let scale = u.max_abs();
    let mut d: Vec<f64> = [1e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
        .iter()
        .map(|f| f * scale)
        .collect();
    d.push(quantization_floor(u));
    d.retain(|&x| x > 0.0);
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

pub fn diagnose(grid: &Grid64, u: &Field64, q: f64, thresholds: Thresholds) -> anyhow::Result<Diagnostics> {
    let spec = ProblemSpec::new(grid, q)?;
    let status = in_constraint(&spec, u);
    let zero_set = zero_measure_curve(grid, u, &zero_set_deltas(u))?;
    let pde = pde_residual(grid, u, q)?;
    let (radiality, symmetry) = if grid.is_polar() {
        let tol = SymmetryTolerances {
            monotonicity: thresholds.monotonicity,
            polarization: thresholds.polarization,
            ..SymmetryTolerances::default()
        };
        let sym = match foliated_schwarz_check(grid, u, tol) {
            Ok(r) => Symmetry::Report(r),
            Err(Error::AxisUndefined { radiality }) => Symmetry::AxisUndefined { radiality },
            Err(e) => return Err(e.into()),
        };
        (Some(radiality_deviation(grid, u)?), Some(sym))
    } else {
        (None, None)
    };
    let passes = pde.interior_norm <= thresholds.interior_residual
        && pde.bracket_violation <= thresholds.bracket_violation
        && pde.flux_norm <= thresholds.flux;
    Ok(Diagnostics {
        q,
        constraint_member: status.member,
        constraint_residual: status.residual,
        nodal_domains: nodal_domains(grid, u, 0.0)?,
        zero_set,
        radiality_deviation: radiality,
        symmetry,
        pde_residual: pde,
        thresholds,
        passes,
    })
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}
