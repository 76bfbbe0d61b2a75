//! Sensitivity of the discrete solution to a perturbation of the viscosity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    build_mesh, compute_errors, conjugate_exponent, error_degree, for_each_quad_point,
    newton_solve, strain_norm, DiscreteFields, FeSpace, ManufacturedCase, NewtonConfig,
};
use crate::rheology::{carreau_eval, CarreauParams, SymTensor2, ViscosityModel};

/// One perturbed law `k0 + delta` compared with the base law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub delta: f64,
    /// `‖u₁ − u₂‖_{W^{1,r}}`.
    pub lhs_u: f64,
    /// `‖p₁ − p₂‖_{L^{r'}}`.
    pub lhs_p: f64,
    /// `max |k₁ − k₂|` over the strain rates of `u₁` and `u₂` at the
    /// quadrature points.
    pub k_gap: [f64; 2],
    /// `‖ε(u₁)‖_{L^{r'}}` and `‖ε(u₂)‖_{L^{r'}}`.
    pub strain_norm: [f64; 2],
    /// `k_gap[i] · strain_norm[i]` for both solutions.
    pub rhs: [f64; 2],
    /// `lhs_u / rhs[i]`, absent when the bound is zero.
    pub ratio_u: [Option<f64>; 2],
    pub ratio_p: [Option<f64>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub base: CarreauParams,
    pub r: f64,
    pub degree: usize,
    pub m: usize,
    pub rows: Vec<PerturbationRow>,
}

impl PerturbationCheck {
    /// Largest over smallest velocity ratio across rows, using the first
    /// solution index.
    pub fn ratio_spread(&self) -> Option<f64> {
        let ratios: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio_u[0]).collect();
        if ratios.is_empty() {
            return None;
        }
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max / min)
    }
}

fn law_gap(space: &FeSpace, x: &[f64], k1: &CarreauParams, k2: &CarreauParams) -> f64 {
    let mut gap: f64 = 0.0;
    for_each_quad_point(space, x, error_degree(space.degree), |_, _, v| {
        let t = SymTensor2::strain_rate(v.grad).norm();
        gap = gap.max((carreau_eval(t, k1) - carreau_eval(t, k2)).abs());
    });
    gap
}

/// Solves with the base law and with `k0 + delta` for each delta, all with
/// the load of the base law, and compares the solutions.
pub fn perturbation_check(
    base: CarreauParams,
    deltas: &[f64],
    degree: usize,
    m: usize,
    cfg: &NewtonConfig,
) -> Result<PerturbationCheck> {
    base.validate()?;
    let r = base.n;
    let rp = conjugate_exponent(r);
    let space = FeSpace::new(build_mesh(m)?, degree)?;
    let case = ManufacturedCase::reference();
    let forcing = ViscosityModel::carreau(base);
    let (x1, _) = newton_solve(&space, &forcing, &forcing, &case, cfg, None)?;
    let strain1 = strain_norm(&space, &x1, rp);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let perturbed = CarreauParams {
            k0: base.k0 + delta,
            ..base
        };
        perturbed
            .validate()
            .map_err(|e| Error::InvalidInput(format!("perturbation {delta}: {e}")))?;
        let model = ViscosityModel::carreau(perturbed);
        let (x2, _) = newton_solve(&space, &model, &forcing, &case, cfg, None)?;
        let diff = compute_errors(
            &space,
            &x2,
            &DiscreteFields {
                space: &space,
                x: &x1,
            },
            r,
        )?;
        let k_gap = [
            law_gap(&space, &x1, &base, &perturbed),
            law_gap(&space, &x2, &base, &perturbed),
        ];
        let strain = [strain1, strain_norm(&space, &x2, rp)];
        let rhs = [k_gap[0] * strain[0], k_gap[1] * strain[1]];
        let ratio = |lhs: f64, i: usize| (rhs[i] > 0.0).then(|| lhs / rhs[i]);
        log::info!(
            "perturbation {delta}: lhs_u {:.3e}, rhs {:.3e}",
            diff.err_u,
            rhs[0]
        );
        rows.push(PerturbationRow {
            delta,
            lhs_u: diff.err_u,
            lhs_p: diff.err_p,
            k_gap,
            strain_norm: strain,
            rhs,
            ratio_u: [ratio(diff.err_u, 0), ratio(diff.err_u, 1)],
            ratio_p: [ratio(diff.err_p, 0), ratio(diff.err_p, 1)],
        });
    }
    Ok(PerturbationCheck {
        base,
        r,
        degree,
        m,
        rows,
    })
}
