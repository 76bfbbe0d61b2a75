//! Newton's method with backtracking on the residual norm, and a homotopy
//! in the power index as fallback for parametric viscosity laws.

use serde::{Deserialize, Serialize};

use super::assembly::{norm2, StokesProblem};
use super::linsolve::SparseSolver;
use super::manufactured::ManufacturedCase;
use super::space::FeSpace;
use crate::error::{Error, Result};
use crate::rheology::ViscosityModel;

/// One accepted Newton update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iteration: usize,
    pub residual_norm: f64,
    pub step_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub contraction: f64,
    pub sufficient_decrease: f64,
    pub min_step: f64,
    /// Retry along `n: 2 → target` when the direct solve fails.
    pub continuation: bool,
    pub continuation_steps: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_iter: 50,
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            min_step: 1e-8,
            continuation: true,
            continuation_steps: 4,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_iter >= 1
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.sufficient_decrease > 0.0
            && self.sufficient_decrease < 1.0
            && self.min_step > 0.0
            && self.continuation_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "invalid Newton configuration: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    /// Newton updates of the final (target) solve.
    pub iterations: usize,
    pub residual_norm: f64,
    pub continuation_used: bool,
    /// Every accepted update, across continuation stages.
    pub log: Vec<NewtonStep>,
}

/// Runs Newton on one problem from `x` (Dirichlet values are imposed first).
pub fn newton_iterate(
    problem: &StokesProblem,
    x: &mut Vec<f64>,
    cfg: &NewtonConfig,
) -> Result<Vec<NewtonStep>> {
    cfg.validate()?;
    problem.apply_dirichlet(x);
    let mut solver = SparseSolver::new(problem.n_unknowns(), &problem.pattern())?;
    let mut r = problem.residual(x);
    let mut rn = norm2(&r);
    let tol = cfg.abs_tol.max(cfg.rel_tol * rn);
    let mut log = vec![NewtonStep {
        iteration: 0,
        residual_norm: rn,
        step_length: 0.0,
    }];
    let fail = |reason: String, log: &Vec<NewtonStep>| Error::NonConvergence {
        reason,
        log: log.clone(),
    };
    for it in 1..=cfg.max_iter {
        if rn <= tol {
            return Ok(log);
        }
        if !rn.is_finite() {
            return Err(fail(format!("non-finite residual at iteration {it}"), &log));
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solver.solve(&problem.jacobian_values(x), &rhs)?;
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + step * d).collect();
            let rt = problem.residual(&trial);
            let rtn = norm2(&rt);
            if rtn.is_finite() && rtn <= (1.0 - cfg.sufficient_decrease * step) * rn {
                *x = trial;
                r = rt;
                rn = rtn;
                break;
            }
            step *= cfg.contraction;
            if step < cfg.min_step {
                return Err(fail(
                    format!("line search stalled at iteration {it} (residual {rn:.3e})"),
                    &log,
                ));
            }
        }
        log.push(NewtonStep {
            iteration: it,
            residual_norm: rn,
            step_length: step,
        });
        log::debug!("newton {it}: residual {rn:.3e}, step {step}");
    }
    if rn <= tol {
        return Ok(log);
    }
    Err(fail(
        format!(
            "no convergence in {} iterations (residual {rn:.3e}, target {tol:.3e})",
            cfg.max_iter
        ),
        &log,
    ))
}

/// Solves the problem for `model` with load from `forcing`, falling back to
/// continuation in the power index when enabled and available.
pub fn newton_solve(
    space: &FeSpace,
    model: &ViscosityModel,
    forcing: &ViscosityModel,
    case: &ManufacturedCase,
    cfg: &NewtonConfig,
    initial: Option<&[f64]>,
) -> Result<(Vec<f64>, NewtonReport)> {
    let start = || {
        initial
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.0; space.n_unknowns()])
    };
    let problem = StokesProblem::new(space, model, forcing, case);
    let mut x = start();
    let direct = newton_iterate(&problem, &mut x, cfg);
    let err = match direct {
        Ok(log) => {
            let report = NewtonReport {
                iterations: log.len() - 1,
                residual_norm: log.last().map_or(f64::NAN, |s| s.residual_norm),
                continuation_used: false,
                log,
            };
            return Ok((x, report));
        }
        Err(e @ Error::NonConvergence { .. }) => e,
        Err(e) => return Err(e),
    };
    let target = match model.power_index() {
        Some(n) if cfg.continuation && n != 2.0 => n,
        _ => return Err(err),
    };
    log::info!(
        "direct Newton solve failed ({err}); continuing in the power index from 2 to {target}"
    );
    let mut x = start();
    let mut full_log = Vec::new();
    let mut last = Vec::new();
    for s in 1..=cfg.continuation_steps {
        let n = 2.0 + (target - 2.0) * s as f64 / cfg.continuation_steps as f64;
        let m = model.with_power_index(n).expect("parametric law");
        let f = forcing
            .with_power_index(n)
            .unwrap_or_else(|| forcing.clone());
        let stage = StokesProblem::new(space, &m, &f, case);
        last = newton_iterate(&stage, &mut x, cfg)?;
        full_log.extend(last.iter().copied());
    }
    let report = NewtonReport {
        iterations: last.len() - 1,
        residual_norm: last.last().map_or(f64::NAN, |s| s.residual_norm),
        continuation_used: true,
        log: full_log,
    };
    Ok((x, report))
}
