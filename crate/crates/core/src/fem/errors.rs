//! Error norms between discrete solutions and reference fields.

use serde::{Deserialize, Serialize};

use super::basis::Tabulation;
use super::manufactured::ManufacturedCase;
use super::quadrature::triangle_rule;
use super::space::FeSpace;
use crate::error::{Error, Result};

/// Quadrature degree used for error integrals with velocity degree `j`.
pub fn error_degree(j: usize) -> usize {
    2 * j + 3
}

/// Fields a discrete solution can be compared against.
pub trait ReferenceFields {
    fn velocity(&self, x: [f64; 2]) -> [f64; 2];
    /// `[i][j] = ∂u_i/∂x_j`.
    fn velocity_grad(&self, x: [f64; 2]) -> [[f64; 2]; 2];
    fn pressure(&self, x: [f64; 2]) -> f64;
}

impl ReferenceFields for ManufacturedCase {
    fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        (self.velocity)(x)
    }
    fn velocity_grad(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        (self.velocity_grad)(x)
    }
    fn pressure(&self, x: [f64; 2]) -> f64 {
        (self.pressure)(x)
    }
}

/// Discrete velocity and pressure values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub u: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub p: f64,
}

/// A discrete solution viewed as a function on the whole domain.
pub struct DiscreteFields<'a> {
    pub space: &'a FeSpace,
    pub x: &'a [f64],
}

impl DiscreteFields<'_> {
    /// Values inside element `t` at reference point `r`.
    pub fn eval_in(&self, t: usize, r: [f64; 2]) -> PointValues {
        let s = self.space;
        let map = s.mesh.element_map(t);
        let (vu, gu) = s.velocity_basis.eval(r[0], r[1]);
        let (vp, _) = s.pressure_basis.eval(r[0], r[1]);
        let mut out = PointValues {
            u: [0.0; 2],
            grad: [[0.0; 2]; 2],
            p: 0.0,
        };
        for (i, &d) in s.velocity.element(t).iter().enumerate() {
            let g = map.grad(gu[i]);
            let c = [self.x[s.ux(d)], self.x[s.uy(d)]];
            for k in 0..2 {
                out.u[k] += c[k] * vu[i];
                out.grad[k][0] += c[k] * g[0];
                out.grad[k][1] += c[k] * g[1];
            }
        }
        for (k, &d) in s.pressure.element(t).iter().enumerate() {
            out.p += self.x[s.p(d)] * vp[k];
        }
        out
    }

    pub fn eval(&self, x: [f64; 2]) -> PointValues {
        let (t, r) = self.space.mesh.locate(x).expect("point inside the domain");
        self.eval_in(t, r)
    }

    /// Nodal interpolant of these fields in `target`, used as a Newton
    /// starting guess on another mesh.
    pub fn interpolate_onto(&self, target: &FeSpace) -> Vec<f64> {
        let mut y = vec![0.0; target.n_unknowns()];
        for (d, &c) in target.velocity.coords.iter().enumerate() {
            let u = self.eval(c).u;
            y[target.ux(d)] = u[0];
            y[target.uy(d)] = u[1];
        }
        for (d, &c) in target.pressure.coords.iter().enumerate() {
            y[target.p(d)] = self.eval(c).p;
        }
        y[target.multiplier()] = self.x[self.space.multiplier()];
        y
    }
}

impl ReferenceFields for DiscreteFields<'_> {
    fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        self.eval(x).u
    }
    fn velocity_grad(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        self.eval(x).grad
    }
    fn pressure(&self, x: [f64; 2]) -> f64 {
        self.eval(x).p
    }
}

/// Visits every quadrature point of a rule of the given degree with its
/// weight (including the Jacobian), physical position and discrete values.
pub fn for_each_quad_point(
    space: &FeSpace,
    x: &[f64],
    degree: usize,
    mut f: impl FnMut(f64, [f64; 2], &PointValues),
) {
    let rule = triangle_rule(degree);
    let tab_u = Tabulation::new(&space.velocity_basis, &rule);
    let tab_p = Tabulation::new(&space.pressure_basis, &rule);
    for t in 0..space.mesh.n_triangles() {
        let map = space.mesh.element_map(t);
        let vd = space.velocity.element(t);
        let pd = space.pressure.element(t);
        for (q, (rp, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let mut pv = PointValues {
                u: [0.0; 2],
                grad: [[0.0; 2]; 2],
                p: 0.0,
            };
            for (i, (&phi, rg)) in tab_u.values_at(q).iter().zip(tab_u.grads_at(q)).enumerate() {
                let g = map.grad(*rg);
                let c = [x[space.ux(vd[i])], x[space.uy(vd[i])]];
                for k in 0..2 {
                    pv.u[k] += c[k] * phi;
                    pv.grad[k][0] += c[k] * g[0];
                    pv.grad[k][1] += c[k] * g[1];
                }
            }
            for (k, &psi) in tab_p.values_at(q).iter().enumerate() {
                pv.p += x[space.p(pd[k])] * psi;
            }
            f(w * map.det.abs(), map.point(*rp), &pv);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub r: f64,
    /// `(∫ |e_u|^r + |∇e_u|^r)^{1/r}`.
    pub err_u: f64,
    /// `(∫ |e_p|^{r'})^{1/r'}` with `r' = r/(r−1)`.
    pub err_p: f64,
}

pub fn conjugate_exponent(r: f64) -> f64 {
    r / (r - 1.0)
}

/// Errors of the discrete solution `x` against `reference` in `W^{1,r}` for
/// the velocity and `L^{r'}` for the pressure.
pub fn compute_errors(
    space: &FeSpace,
    x: &[f64],
    reference: &dyn ReferenceFields,
    r: f64,
) -> Result<ErrorReport> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "error exponent must lie in (1, ∞), got {r}"
        )));
    }
    if x.len() != space.n_unknowns() {
        return Err(Error::DimensionMismatch {
            expected: space.n_unknowns(),
            got: x.len(),
        });
    }
    let rp = conjugate_exponent(r);
    let (mut iu, mut ip) = (0.0, 0.0);
    for_each_quad_point(space, x, error_degree(space.degree), |w, pt, v| {
        let u = reference.velocity(pt);
        let g = reference.velocity_grad(pt);
        let e = [v.u[0] - u[0], v.u[1] - u[1]];
        let ge: f64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (v.grad[i][j] - g[i][j]).powi(2))
            .sum();
        iu += w * ((e[0] * e[0] + e[1] * e[1]).powf(r / 2.0) + ge.powf(r / 2.0));
        ip += w * (v.p - reference.pressure(pt)).abs().powf(rp);
    });
    Ok(ErrorReport {
        r,
        err_u: iu.powf(1.0 / r),
        err_p: ip.powf(1.0 / rp),
    })
}

/// `∫ p_h`.
pub fn pressure_mean(space: &FeSpace, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for_each_quad_point(space, x, error_degree(space.degree), |w, _, v| s += w * v.p);
    s
}

/// `(∫ |ε(u_h)|^s)^{1/s}` with the Frobenius norm.
pub fn strain_norm(space: &FeSpace, x: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for_each_quad_point(space, x, error_degree(space.degree), |w, _, v| {
        let eps = crate::rheology::SymTensor2::strain_rate(v.grad);
        acc += w * eps.norm().powf(s);
    });
    acc.powf(1.0 / s)
}
