//! Network fits of the Carreau family `k0 = 2, k_inf = 0, λ = 2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FIT_ARCHITECTURE;
use crate::error::{Error, Result};
use crate::icnn::{select_convex_concave, Branch, IcnnModel, TrainConfig};
use crate::rheology::{carreau_eval, CarreauParams};

/// Shear-rate interval of the training samples.
pub const CARREAU_RANGE: f64 = 70.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFamilyConfig {
    pub n_samples: usize,
    pub t_max: f64,
    pub architecture: Vec<usize>,
    pub train: TrainConfig,
    /// Seed of the sample locations; the training seed lives in `train`.
    pub seed: u64,
}

impl Default for FitFamilyConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            t_max: CARREAU_RANGE,
            architecture: FIT_ARCHITECTURE.to_vec(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CarreauFit {
    pub n: f64,
    pub params: CarreauParams,
    pub model: IcnnModel,
    pub branch: Branch,
    pub loss_convex: f64,
    pub loss_concave: f64,
    /// `(∫_0^T (k − ICNN)² / T)^{1/2}`.
    pub l2_error: f64,
    /// `max |k − ICNN|` on a dense grid of `[0, T]`.
    pub sup_error: f64,
}

/// Uniform random shear rates in `(0, t_max)`.
impl CarreauFit {
    pub fn summary(&self) -> FitSummary {
        FitSummary {
            n: self.n,
            branch: self.branch,
            loss_convex: self.loss_convex,
            loss_concave: self.loss_concave,
            l2_error: self.l2_error,
            sup_error: self.sup_error,
        }
    }
}

/// Tabular view of a [`CarreauFit`] without the network weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n: f64,
    pub branch: Branch,
    pub loss_convex: f64,
    pub loss_concave: f64,
    pub l2_error: f64,
    pub sup_error: f64,
}

pub fn carreau_training_points(n_samples: usize, t_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| loop {
            let t = rng.random_range(0.0..t_max);
            if t > 0.0 {
                break t;
            }
        })
        .collect()
}

/// Root-mean-square gap of two functions over `[0, t_max]` by the
/// trapezoid rule on `n` intervals.
pub fn l2_error(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, t_max: f64, n: usize) -> f64 {
    let h = t_max / n as f64;
    let d2 = |i: usize| {
        let t = i as f64 * h;
        (f(t) - g(t)).powi(2)
    };
    let inner: f64 = (1..n).map(d2).sum();
    let integral = h * (0.5 * (d2(0) + d2(n)) + inner);
    (integral / t_max).sqrt()
}

/// Largest gap of two functions on `n + 1` equispaced points of `[lo, hi]`.
pub fn sup_error(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> f64 {
    (0..=n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            (f(t) - g(t)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn fit_carreau(n: f64, cfg: &FitFamilyConfig) -> Result<CarreauFit> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "power index must exceed 1, got {n}"
        )));
    }
    let params = CarreauParams::reference(n);
    let t = carreau_training_points(cfg.n_samples, cfg.t_max, cfg.seed);
    let inputs: Vec<Vec<f64>> = t.iter().map(|&x| vec![x]).collect();
    let targets: Vec<f64> = t.iter().map(|&x| carreau_eval(x, &params)).collect();
    let sel = select_convex_concave(&inputs, &targets, &cfg.architecture, &cfg.train)?;
    let k = |x: f64| carreau_eval(x, &params);
    let net = |x: f64| sel.model.eval_scalar(x);
    let l2 = l2_error(k, net, cfg.t_max, 10_000);
    let sup = sup_error(k, net, 0.0, cfg.t_max, 10_000);
    log::info!(
        "Carreau n={n}: branch {:?}, L2 error {l2:.3e}, sup error {sup:.3e}",
        sel.branch
    );
    Ok(CarreauFit {
        n,
        params,
        branch: sel.branch,
        loss_convex: sel.loss_convex,
        loss_concave: sel.loss_concave,
        model: sel.model,
        l2_error: l2,
        sup_error: sup,
    })
}

pub fn fit_carreau_family(n_values: &[f64], cfg: &FitFamilyConfig) -> Result<Vec<CarreauFit>> {
    n_values.iter().map(|&n| fit_carreau(n, cfg)).collect()
}
