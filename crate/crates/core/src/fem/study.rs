//! Mesh-refinement studies and their rate tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::errors::{compute_errors, ErrorReport, ReferenceFields};
use super::manufactured::ManufacturedCase;
use super::mesh::build_mesh;
use super::newton::{newton_solve, NewtonConfig, NewtonReport};
use super::space::FeSpace;
use crate::error::{io_err, Error, Result};
use crate::rheology::ViscosityModel;

/// A converged solve on one mesh together with its errors.
pub struct SolveOutcome {
    pub space: FeSpace,
    pub x: Vec<f64>,
    pub report: NewtonReport,
    pub errors: ErrorReport,
}

/// Solves the manufactured problem for `model` (load built from `forcing`)
/// on an `m × m` mesh with velocity degree `j`, and measures the errors
/// against the exact fields.
pub fn solve_manufactured(
    model: &ViscosityModel,
    forcing: &ViscosityModel,
    m: usize,
    j: usize,
    r: f64,
    cfg: &NewtonConfig,
) -> Result<SolveOutcome> {
    let case = ManufacturedCase::reference();
    let space = FeSpace::new(build_mesh(m)?, j)?;
    let (x, report) = newton_solve(&space, model, forcing, &case, cfg, None)?;
    let errors = compute_errors(&space, &x, &case, r)?;
    Ok(SolveOutcome {
        space,
        x,
        report,
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub j: usize,
    pub m: usize,
    pub h: f64,
    pub err_u: Option<f64>,
    pub err_p: Option<f64>,
    /// Rate against the previous successful row of the same degree.
    pub rate_u: Option<f64>,
    pub rate_p: Option<f64>,
    pub newton_iterations: Option<usize>,
    pub failure: Option<String>,
}

/// Least-squares slopes of `log err` against `log h` for one degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeFit {
    pub j: usize,
    pub slope_u: Option<f64>,
    pub slope_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub r: f64,
    pub rows: Vec<RateRow>,
    pub fits: Vec<DegreeFit>,
}

pub fn pairwise_rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// points.
pub fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

impl RateTable {
    /// Builds a table from per-mesh results in refinement order.
    pub fn from_results(
        r: f64,
        results: Vec<(usize, usize, f64, Result<(ErrorReport, usize)>)>,
    ) -> Self {
        let mut rows: Vec<RateRow> = Vec::new();
        for (j, m, h, res) in results {
            let prev = rows
                .iter()
                .rev()
                .find(|row| row.j == j && row.err_u.is_some());
            let row = match res {
                Ok((e, iters)) => RateRow {
                    j,
                    m,
                    h,
                    err_u: Some(e.err_u),
                    err_p: Some(e.err_p),
                    rate_u: prev.map(|p| pairwise_rate(p.err_u.unwrap(), e.err_u, p.h, h)),
                    rate_p: prev.map(|p| pairwise_rate(p.err_p.unwrap(), e.err_p, p.h, h)),
                    newton_iterations: Some(iters),
                    failure: None,
                },
                Err(err) => RateRow {
                    j,
                    m,
                    h,
                    err_u: None,
                    err_p: None,
                    rate_u: None,
                    rate_p: None,
                    newton_iterations: None,
                    failure: Some(err.to_string()),
                },
            };
            rows.push(row);
        }
        let mut degrees: Vec<usize> = rows.iter().map(|r| r.j).collect();
        degrees.dedup();
        let fits = degrees
            .into_iter()
            .map(|j| {
                let ok: Vec<&RateRow> = rows
                    .iter()
                    .filter(|r| r.j == j && r.err_u.is_some())
                    .collect();
                let h: Vec<f64> = ok.iter().map(|r| r.h).collect();
                let eu: Vec<f64> = ok.iter().map(|r| r.err_u.unwrap()).collect();
                let ep: Vec<f64> = ok.iter().map(|r| r.err_p.unwrap()).collect();
                DegreeFit {
                    j,
                    slope_u: log_slope(&h, &eu),
                    slope_p: log_slope(&h, &ep),
                }
            })
            .collect();
        Self { r, rows, fits }
    }

    pub fn fit(&self, j: usize) -> Option<&DegreeFit> {
        self.fits.iter().find(|f| f.j == j)
    }

    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.failure.is_some())
    }

    /// CSV with columns `j,m,h,err_u,err_p,rate_u,rate_p`; missing values are
    /// empty fields.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["j", "m", "h", "err_u", "err_p", "rate_u", "rate_p"])
            .expect("in-memory write");
        let f = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.j.to_string(),
                r.m.to_string(),
                format!("{:.10e}", r.h),
                f(r.err_u),
                f(r.err_p),
                f(r.rate_u),
                f(r.rate_p),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(io_err(path))
    }
}

/// Errors of `model` against the manufactured solution for every degree and
/// mesh. Failed solves are recorded in their row.
pub fn convergence_study(
    model: &ViscosityModel,
    degrees: &[usize],
    meshes: &[usize],
    r: f64,
    cfg: &NewtonConfig,
) -> Result<RateTable> {
    if meshes.len() < 2 {
        return Err(Error::InvalidInput(
            "a convergence study needs at least two meshes".into(),
        ));
    }
    let mut results = Vec::new();
    for &j in degrees {
        for &m in meshes {
            let h = std::f64::consts::SQRT_2 / m as f64;
            let res = solve_manufactured(model, model, m, j, r, cfg)
                .map(|o| (o.errors, o.report.iterations));
            if let Err(e) = &res {
                log::warn!("j={j} m={m}: {e}");
            }
            results.push((j, m, h, res));
        }
    }
    Ok(RateTable::from_results(r, results))
}

/// Errors of each coarse solution against a reference discrete solution
/// on a finer nested mesh, integrated on the fine mesh.
pub fn errors_against_reference(
    coarse: &FeSpace,
    coarse_x: &[f64],
    fine: &FeSpace,
    fine_x: &[f64],
    r: f64,
) -> Result<ErrorReport> {
    let coarse_fields = super::errors::DiscreteFields {
        space: coarse,
        x: coarse_x,
    };
    let reference: &dyn ReferenceFields = &coarse_fields;
    compute_errors(fine, fine_x, reference, r)
}
