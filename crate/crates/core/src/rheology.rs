//! Viscosity laws and the generalized Newtonian stress `tau = k(|eps|) eps`.
//!
//! The shear rate entering `k` is the Frobenius norm of the symmetric strain
//! rate tensor, `|eps|^2 = eps_xx^2 + 2 eps_xy^2 + eps_yy^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::icnn::IcnnModel;

/// Default floor applied to the shear rate where a law is singular at zero.
pub const DEFAULT_T_FLOOR: f64 = 1e-10;

/// Symmetric 2x2 tensor stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    /// Symmetric part of a velocity gradient `[[du/dx, du/dy], [dv/dx, dv/dy]]`.
    pub fn strain_rate(grad: [[f64; 2]; 2]) -> Self {
        Self {
            xx: grad[0][0],
            xy: 0.5 * (grad[0][1] + grad[1][0]),
            yy: grad[1][1],
        }
    }

    /// Double contraction `A : B`.
    #[inline]
    pub fn ddot(&self, other: &SymTensor2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.ddot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scale(&self, a: f64) -> SymTensor2 {
        SymTensor2::new(a * self.xx, a * self.xy, a * self.yy)
    }

    #[inline]
    pub fn add(&self, other: &SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx + other.xx, self.xy + other.xy, self.yy + other.yy)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }
}

/// Carreau law `k(t) = k_inf + (k0 - k_inf) (1 + lambda t^2)^((n-2)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarreauParams {
    pub k0: f64,
    pub k_inf: f64,
    pub lambda: f64,
    pub n: f64,
}

impl CarreauParams {
    pub fn new(k0: f64, k_inf: f64, lambda: f64, n: f64) -> Result<Self> {
        let p = Self {
            k0,
            k_inf,
            lambda,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    /// The parameter family used throughout the manufactured-solution studies.
    pub fn reference(n: f64) -> Self {
        Self {
            k0: 2.0,
            k_inf: 0.0,
            lambda: 2.0,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.k0.is_finite()
            && self.k_inf.is_finite()
            && self.lambda.is_finite()
            && self.n.is_finite()
            && self.k0 > self.k_inf
            && self.k_inf >= 0.0
            && self.lambda > 0.0
            && self.n > 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "Carreau parameters need k0 > k_inf >= 0, lambda > 0, n > 1; got {self:?}"
            )))
        }
    }
}

/// Power law `k(t) = k0 t^(n-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawParams {
    pub k0: f64,
    pub n: f64,
}

impl PowerLawParams {
    pub fn new(k0: f64, n: f64) -> Result<Self> {
        if k0.is_finite() && n.is_finite() && k0 > 0.0 && n > 1.0 {
            Ok(Self { k0, n })
        } else {
            Err(Error::InvalidInput(format!(
                "power law needs k0 > 0, n > 1; got k0={k0}, n={n}"
            )))
        }
    }
}

pub fn carreau_eval(t: f64, p: &CarreauParams) -> f64 {
    p.k_inf + (p.k0 - p.k_inf) * (1.0 + p.lambda * t * t).powf(0.5 * (p.n - 2.0))
}

pub fn carreau_deriv(t: f64, p: &CarreauParams) -> f64 {
    t * carreau_deriv_over_t(t, p)
}

/// `k'(t) / t`, finite at `t = 0`.
pub fn carreau_deriv_over_t(t: f64, p: &CarreauParams) -> f64 {
    (p.k0 - p.k_inf) * (p.n - 2.0) * p.lambda * (1.0 + p.lambda * t * t).powf(0.5 * (p.n - 4.0))
}

pub fn power_eval(t: f64, p: &PowerLawParams, t_floor: f64) -> f64 {
    p.k0 * t.max(t_floor).powf(p.n - 2.0)
}

pub fn power_deriv(t: f64, p: &PowerLawParams, t_floor: f64) -> f64 {
    let t = t.max(t_floor);
    p.k0 * (p.n - 2.0) * t.powf(p.n - 3.0)
}

/// The functional form behind a [`ViscosityModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum ViscosityLaw {
    Carreau(CarreauParams),
    PowerLaw(PowerLawParams),
    Icnn(Box<IcnnModel>),
}

/// A scalar viscosity `k(t)` of the shear rate, with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityModel {
    pub law: ViscosityLaw,
    pub t_floor: f64,
}

/// Stress at a strain rate together with the coefficients of its derivative.
///
/// The directional derivative of `tau` at `eps` in direction `d` is
/// `a d + b (eps : d) eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressEval {
    pub tau: SymTensor2,
    pub a: f64,
    pub b: f64,
}

impl StressEval {
    pub fn directional(&self, eps: &SymTensor2, d: &SymTensor2) -> SymTensor2 {
        d.scale(self.a).add(&eps.scale(self.b * eps.ddot(d)))
    }
}

impl ViscosityModel {
    pub fn carreau(p: CarreauParams) -> Self {
        Self {
            law: ViscosityLaw::Carreau(p),
            t_floor: DEFAULT_T_FLOOR,
        }
    }

    pub fn power_law(p: PowerLawParams) -> Self {
        Self {
            law: ViscosityLaw::PowerLaw(p),
            t_floor: DEFAULT_T_FLOOR,
        }
    }

    pub fn icnn(model: IcnnModel) -> Self {
        Self {
            law: ViscosityLaw::Icnn(Box::new(model)),
            t_floor: DEFAULT_T_FLOOR,
        }
    }

    pub fn as_carreau(&self) -> Option<&CarreauParams> {
        match &self.law {
            ViscosityLaw::Carreau(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.law {
            ViscosityLaw::Carreau(p) => carreau_eval(t, p),
            ViscosityLaw::PowerLaw(p) => power_eval(t, p, self.t_floor),
            ViscosityLaw::Icnn(m) => m.eval_scalar(t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match &self.law {
            ViscosityLaw::Carreau(p) => carreau_deriv(t, p),
            ViscosityLaw::PowerLaw(p) => power_deriv(t, p, self.t_floor),
            ViscosityLaw::Icnn(m) => m.eval_scalar_with_deriv(t).1,
        }
    }

    /// Value and derivative together; cheaper than two calls for the network.
    pub fn eval_with_deriv(&self, t: f64) -> (f64, f64) {
        match &self.law {
            ViscosityLaw::Icnn(m) => m.eval_scalar_with_deriv(t),
            _ => (self.eval(t), self.deriv(t)),
        }
    }

    /// `(k(t), k'(t)/t)` with the quotient safeguarded near `t = 0`.
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        match &self.law {
            ViscosityLaw::Carreau(p) => (carreau_eval(t, p), carreau_deriv_over_t(t, p)),
            _ => {
                let (k, dk) = self.eval_with_deriv(t);
                if t < self.t_floor {
                    (k, self.deriv(self.t_floor) / self.t_floor)
                } else {
                    (k, dk / t)
                }
            }
        }
    }

    pub fn stress(&self, eps: &SymTensor2) -> StressEval {
        let t = eps.norm();
        let (a, b) = self.coefficients(t);
        StressEval {
            tau: eps.scale(a),
            a,
            b,
        }
    }

    /// Returns a copy with the power index replaced, for continuation paths.
    pub(crate) fn with_power_index(&self, n: f64) -> Option<ViscosityModel> {
        let law = match &self.law {
            ViscosityLaw::Carreau(p) => ViscosityLaw::Carreau(CarreauParams { n, ..*p }),
            ViscosityLaw::PowerLaw(p) => ViscosityLaw::PowerLaw(PowerLawParams { n, ..*p }),
            ViscosityLaw::Icnn(_) => return None,
        };
        Some(ViscosityModel {
            law,
            t_floor: self.t_floor,
        })
    }

    /// Power index of an analytic law.
    pub fn power_index(&self) -> Option<f64> {
        match &self.law {
            ViscosityLaw::Carreau(p) => Some(p.n),
            ViscosityLaw::PowerLaw(p) => Some(p.n),
            ViscosityLaw::Icnn(_) => None,
        }
    }
}

/// Free-function form of [`ViscosityModel::eval`].
pub fn viscosity_eval(model: &ViscosityModel, t: f64) -> f64 {
    model.eval(t)
}

pub fn viscosity_deriv(model: &ViscosityModel, t: f64) -> f64 {
    model.deriv(t)
}

pub fn stress_eval(model: &ViscosityModel, eps: &SymTensor2) -> StressEval {
    model.stress(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(n: f64) -> CarreauParams {
        CarreauParams::reference(n)
    }

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn carreau_values() {
        assert_eq!(carreau_eval(0.0, &p(1.6)), 2.0);
        assert_eq!(carreau_eval(1.0, &p(2.0)), 2.0);
        let expected = 2.0 * 3f64.powf(-0.4);
        assert!((carreau_eval(1.0, &p(1.2)) - expected).abs() < 1e-14);
        assert!((expected - 1.288788).abs() < 1e-6);
    }

    #[test]
    fn carreau_derivative_values() {
        assert_eq!(carreau_deriv(0.0, &p(1.6)), 0.0);
        assert_eq!(carreau_deriv(1.0, &p(2.0)), 0.0);
        let expected = 2.0 * -0.8 * 2.0 * 3f64.powf(-1.4);
        let got = carreau_deriv(1.0, &p(1.2));
        assert!((got - expected).abs() < 1e-14);
        assert!((expected + 0.687354).abs() < 1e-6);
        let fd = central(|t| carreau_eval(t, &p(1.2)), 1.0, 1e-6);
        assert!(((fd - got) / got).abs() < 1e-6);
    }

    #[test]
    fn power_law_values() {
        let pl = PowerLawParams::new(2.0, 1.5).unwrap();
        assert_eq!(power_eval(1.0, &pl, DEFAULT_T_FLOOR), 2.0);
        assert_eq!(power_eval(4.0, &pl, DEFAULT_T_FLOOR), 1.0);
        let floored = power_eval(1e-20, &pl, DEFAULT_T_FLOOR);
        assert!((floored - 2e5).abs() < 1e-6);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(CarreauParams::new(1.0, 2.0, 1.0, 1.5).is_err());
        assert!(CarreauParams::new(2.0, 0.0, 0.0, 1.5).is_err());
        assert!(CarreauParams::new(2.0, 0.0, 1.0, 1.0).is_err());
        assert!(PowerLawParams::new(2.0, 0.9).is_err());
    }

    #[test]
    fn dispatch_matches_formulas() {
        let m = ViscosityModel::carreau(p(1.6));
        for t in [0.0, 0.3, 5.0, 69.0] {
            assert_eq!(viscosity_eval(&m, t), carreau_eval(t, &p(1.6)));
        }
    }

    #[test]
    fn viscosity_deriv_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let models = [
            ViscosityModel::carreau(p(1.2)),
            ViscosityModel::carreau(p(2.8)),
            ViscosityModel::power_law(PowerLawParams::new(2.0, 1.5).unwrap()),
        ];
        for m in &models {
            for _ in 0..20 {
                let t: f64 = rng.random_range(0.01..70.0);
                let fd = central(|s| m.eval(s), t, 1e-6 * t.max(1.0));
                let d = viscosity_deriv(m, t);
                assert!(
                    (fd - d).abs() <= 1e-5 * d.abs().max(1e-8),
                    "{t}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn stress_of_zero_strain_is_zero() {
        let m = ViscosityModel::carreau(p(1.6));
        assert_eq!(stress_eval(&m, &SymTensor2::ZERO).tau, SymTensor2::ZERO);
    }

    #[test]
    fn newtonian_stress_is_linear() {
        let m = ViscosityModel::carreau(p(2.0));
        let eps = SymTensor2::new(0.3, -0.2, 0.7);
        let s = stress_eval(&m, &eps);
        assert_eq!(s.tau, eps.scale(2.0));
        let d = SymTensor2::new(1.0, 2.0, -3.0);
        assert_eq!(s.directional(&eps, &d), d.scale(2.0));
    }

    fn check_stress_derivative(m: &ViscosityModel, eps: SymTensor2, d: SymTensor2, tol: f64) {
        let h = 1e-6;
        let plus = m.stress(&eps.add(&d.scale(h))).tau;
        let minus = m.stress(&eps.add(&d.scale(-h))).tau;
        let fd = plus.add(&minus.scale(-1.0)).scale(0.5 / h);
        let an = m.stress(&eps).directional(&eps, &d);
        let diff = fd.add(&an.scale(-1.0)).norm();
        assert!(diff <= tol * fd.norm(), "fd {fd:?} analytic {an:?}");
    }

    #[test]
    fn stress_derivative_matches_finite_differences() {
        let m = ViscosityModel::carreau(p(1.6));
        let eps = SymTensor2::new(1.0, 0.0, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let d = SymTensor2::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            check_stress_derivative(&m, eps, d, 1e-6);
        }
    }

    #[test]
    fn stress_derivative_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.random_range(1.2..2.8);
            let m = ViscosityModel::carreau(p(n));
            let eps = SymTensor2::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let d = SymTensor2::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            check_stress_derivative(&m, eps, d, 1e-5);
        }
    }

    #[test]
    fn frobenius_norm_is_sum_of_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let e = SymTensor2::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let full = e.xx * e.xx + e.xy * e.xy + e.xy * e.xy + e.yy * e.yy;
            assert!((e.norm_sq() - full).abs() <= 1e-14 * full.max(1.0));
        }
    }

    #[test]
    fn carreau_flux_is_monotone() {
        for n in [1.2, 1.6, 2.0, 2.4, 2.8] {
            let m = ViscosityModel::carreau(p(n));
            let mut prev = -1.0;
            for i in 0..=10_000 {
                let t = 70.0 * i as f64 / 10_000.0;
                let flux = m.eval(t) * t;
                assert!(flux > prev, "n={n} t={t}");
                prev = flux;
            }
        }
    }

    #[test]
    fn shear_thinning_and_thickening_direction() {
        for (n, thinning) in [(1.2, true), (1.6, true), (2.4, false), (2.8, false)] {
            let m = ViscosityModel::carreau(p(n));
            let mut prev = m.eval(0.0);
            for i in 1..=10_000 {
                let k = m.eval(70.0 * i as f64 / 10_000.0);
                if thinning {
                    assert!(k <= prev);
                } else {
                    assert!(k >= prev);
                }
                prev = k;
            }
        }
    }
}
