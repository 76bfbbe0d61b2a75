//! Stokes solves with a network viscosity: error plateau against the exact
//! Carreau solution and self-convergence toward a fine-mesh solution.

use serde::{Deserialize, Serialize};

use super::carreau_fits::{sup_error, CARREAU_RANGE};
use crate::error::{Error, Result};
use crate::fem::{
    build_mesh, compute_errors, DiscreteFields, error_degree, errors_against_reference, for_each_quad_point,
    log_slope, newton_solve, pairwise_rate, ErrorReport, FeSpace, ManufacturedCase, NewtonConfig,
    RateTable,
};
use crate::icnn::IcnnModel;
use crate::rheology::{carreau_eval, CarreauParams, SymTensor2, ViscosityModel};

/// Network-viscosity solves of the manufactured problem on a mesh series.
pub struct IcnnSeries {
    pub params: CarreauParams,
    pub degree: usize,
    /// `(m, space, solution, Newton iterations)` in mesh order.
    pub solves: Vec<(usize, FeSpace, Vec<f64>, usize)>,
}

impl IcnnSeries {
    pub fn r(&self) -> f64 {
        self.params.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauRow {
    pub m: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub rate_u: Option<f64>,
    pub rate_p: Option<f64>,
    pub newton_iterations: usize,
    /// Largest strain-rate magnitude seen at the quadrature points.
    pub max_strain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauStudy {
    pub params: CarreauParams,
    pub r: f64,
    pub degree: usize,
    pub rows: Vec<PlateauRow>,
    /// Velocity error on the finest mesh.
    pub eps_icnn_u: f64,
    /// Pressure error on the finest mesh.
    pub eps_icnn_p: f64,
    /// `max |k − ICNN|` over the training range.
    pub k_gap_inf: f64,
}

impl PlateauStudy {
    /// Relative improvement of the velocity error over the last refinement.
    pub fn last_improvement(&self) -> Option<f64> {
        let n = self.rows.len();
        (n >= 2).then(|| 1.0 - self.rows[n - 1].err_u / self.rows[n - 2].err_u)
    }
}

/// Solves the manufactured problem with viscosity `icnn` and the load of the
/// Carreau law `params` on every mesh of `meshes`.
pub fn solve_icnn_series(
    icnn: &IcnnModel,
    params: CarreauParams,
    degree: usize,
    meshes: &[usize],
    cfg: &NewtonConfig,
) -> Result<IcnnSeries> {
    if meshes.is_empty() {
        return Err(Error::InvalidInput("empty mesh list".into()));
    }
    params.validate()?;
    let model = ViscosityModel::icnn(icnn.clone());
    let forcing = ViscosityModel::carreau(params);
    let case = ManufacturedCase::reference();
    let mut solves: Vec<(usize, FeSpace, Vec<f64>, usize)> = Vec::with_capacity(meshes.len());
    for &m in meshes {
        let space = FeSpace::new(build_mesh(m)?, degree)?;
        // start from the previous mesh's solution
        let initial = solves
            .last()
            .map(|(_, s, x, _)| DiscreteFields { space: s, x }.interpolate_onto(&space));
        let (x, report) = newton_solve(&space, &model, &forcing, &case, cfg, initial.as_deref())?;
        log::info!(
            "network viscosity, n={} m={m}: {} Newton iterations",
            params.n,
            report.iterations
        );
        solves.push((m, space, x, report.iterations));
    }
    Ok(IcnnSeries {
        params,
        degree,
        solves,
    })
}

fn max_strain(space: &FeSpace, x: &[f64]) -> f64 {
    let mut t: f64 = 0.0;
    for_each_quad_point(space, x, error_degree(space.degree), |_, _, v| {
        t = t.max(SymTensor2::strain_rate(v.grad).norm());
    });
    t
}

/// Errors of each solve of `series` against the exact Carreau solution.
pub fn plateau_from_series(series: &IcnnSeries, icnn: &IcnnModel) -> Result<PlateauStudy> {
    let r = series.r();
    let case = ManufacturedCase::reference();
    let mut rows: Vec<PlateauRow> = Vec::new();
    let mut strain_max: f64 = 0.0;
    for (m, space, x, iters) in &series.solves {
        let ErrorReport { err_u, err_p, .. } = compute_errors(space, x, &case, r)?;
        let h = space.mesh.h;
        let (rate_u, rate_p) = match rows.last() {
            Some(prev) => (
                Some(pairwise_rate(prev.err_u, err_u, prev.h, h)),
                Some(pairwise_rate(prev.err_p, err_p, prev.h, h)),
            ),
            None => (None, None),
        };
        let ms = max_strain(space, x);
        strain_max = strain_max.max(ms);
        rows.push(PlateauRow {
            m: *m,
            h,
            err_u,
            err_p,
            rate_u,
            rate_p,
            newton_iterations: *iters,
            max_strain: ms,
        });
    }
    if strain_max > CARREAU_RANGE {
        log::warn!("strain rate {strain_max:.3} exceeds the fitted range [0, {CARREAU_RANGE}]");
    }
    let params = series.params;
    let k_gap_inf = sup_error(
        |t| carreau_eval(t, &params),
        |t| icnn.eval_scalar(t),
        0.0,
        CARREAU_RANGE,
        20_000,
    );
    let last = rows.last().expect("non-empty series");
    Ok(PlateauStudy {
        params,
        r,
        degree: series.degree,
        eps_icnn_u: last.err_u,
        eps_icnn_p: last.err_p,
        k_gap_inf,
        rows,
    })
}

pub fn plateau_study(
    icnn: &IcnnModel,
    params: CarreauParams,
    degree: usize,
    meshes: &[usize],
    cfg: &NewtonConfig,
) -> Result<PlateauStudy> {
    plateau_from_series(&solve_icnn_series(icnn, params, degree, meshes, cfg)?, icnn)
}

/// Rates of the solves on meshes `study` toward the solve on mesh
/// `reference`, all taken from `series`. The reference mesh must be a
/// multiple of every study mesh so the meshes are nested.
pub fn reference_rates_from_series(
    series: &IcnnSeries,
    study: &[usize],
    reference: usize,
) -> Result<RateTable> {
    let find = |m: usize| {
        series
            .solves
            .iter()
            .find(|s| s.0 == m)
            .ok_or_else(|| Error::InvalidInput(format!("mesh {m} missing from the series")))
    };
    let (_, fine, fine_x, _) = find(reference)?;
    let r = series.r();
    let mut results = Vec::new();
    for &m in study {
        if m >= reference || !reference.is_multiple_of(m) {
            return Err(Error::InvalidInput(format!(
                "mesh {m} is not nested in reference mesh {reference}"
            )));
        }
        let (_, space, x, iters) = find(m)?;
        let errs = errors_against_reference(space, x, fine, fine_x, r)?;
        results.push((series.degree, m, space.mesh.h, Ok((errs, *iters))));
    }
    Ok(RateTable::from_results(r, results))
}

pub fn icnn_reference_convergence(
    icnn: &IcnnModel,
    params: CarreauParams,
    degree: usize,
    meshes: &[usize],
    reference: usize,
    cfg: &NewtonConfig,
) -> Result<RateTable> {
    let mut all = meshes.to_vec();
    all.push(reference);
    let series = solve_icnn_series(icnn, params, degree, &all, cfg)?;
    reference_rates_from_series(&series, meshes, reference)
}

/// Least-squares slope of the velocity error of a plateau study, restricted
/// to rows with index in `range`.
pub fn plateau_slope(study: &PlateauStudy, range: std::ops::Range<usize>) -> Option<f64> {
    let rows = study.rows.get(range)?;
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.err_u).collect();
    log_slope(&h, &e)
}
