//! Network fits of measured (or synthetic) viscosity curves with their
//! certificates.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::RheologyDataset;
use crate::error::Result;
use crate::icnn::{select_convex_concave, Branch, IcnnModel, TrainConfig};
use crate::rheology::{carreau_eval, CarreauParams, ViscosityModel};
use crate::verifier::{verify, AssumptionCertificate, VerifierConfig};

/// Recipe for a noisy Carreau curve sampled at log-spaced shear rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    pub params: CarreauParams,
    pub shear_min: f64,
    pub shear_max: f64,
    pub n_points: usize,
    /// Standard deviation of the multiplicative noise factor.
    pub noise: f64,
}

/// Four shear-thinning curves shaped like dilute polymer solutions measured
/// on a rotational rheometer.
pub fn synthetic_shear_thinning_specs() -> Vec<SyntheticSpec> {
    let spec = |i: usize, k0: f64, lambda: f64, n: f64| SyntheticSpec {
        name: format!("synthetic_carreau_{i}"),
        params: CarreauParams {
            k0,
            k_inf: 0.002,
            lambda,
            n,
        },
        shear_min: 1.0,
        shear_max: 1000.0,
        n_points: 30,
        noise: 0.01,
    };
    vec![
        spec(1, 0.30, 20.0, 1.35),
        spec(2, 0.20, 10.0, 1.40),
        spec(3, 0.12, 5.0, 1.45),
        spec(4, 0.08, 4.0, 1.50),
    ]
}

/// Samples `spec` with independent normal multiplicative noise.
pub fn synthetic_dataset(spec: &SyntheticSpec, seed: u64) -> Result<RheologyDataset> {
    spec.params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise)
        .map_err(|e| crate::Error::InvalidInput(format!("noise: {e}")))?;
    let n = spec.n_points.max(2);
    let (lo, hi) = (spec.shear_min.ln(), spec.shear_max.ln());
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
            let k = carreau_eval(t, &spec.params) * (1.0 + noise.sample(&mut rng));
            (t, k)
        })
        .collect();
    RheologyDataset::from_pairs(spec.name.clone(), pairs)
}

/// Root-mean-square error and coefficient of determination of `model` on
/// the samples of `data`.
pub fn fit_metrics(model: &IcnnModel, data: &RheologyDataset) -> (f64, f64) {
    let n = data.samples.len() as f64;
    let mean = data.samples.iter().map(|s| s.viscosity).sum::<f64>() / n;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for s in &data.samples {
        ss_res += (s.viscosity - model.eval_scalar(s.shear_rate)).powi(2);
        ss_tot += (s.viscosity - mean).powi(2);
    }
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        f64::NAN
    };
    ((ss_res / n).sqrt(), r2)
}

#[derive(Debug, Clone)]
pub struct DatasetFit {
    pub name: String,
    pub model: IcnnModel,
    pub branch: Branch,
    pub loss: f64,
    pub rmse: f64,
    pub r_squared: f64,
    pub certificate: AssumptionCertificate,
}

/// Fits a network to `data` and certifies it on `(0, max shear rate]`.
/// `verifier.t_max` is overridden by the dataset range.
pub fn fit_dataset(
    data: &RheologyDataset,
    architecture: &[usize],
    train: &TrainConfig,
    verifier: &VerifierConfig,
) -> Result<DatasetFit> {
    data.validate()?;
    let (inputs, targets) = data.as_points();
    let sel = select_convex_concave(&inputs, &targets, architecture, train)?;
    let (rmse, r_squared) = fit_metrics(&sel.model, data);
    let vcfg = VerifierConfig {
        t_max: data.max_shear_rate(),
        ..verifier.clone()
    };
    let certificate = verify(&ViscosityModel::icnn(sel.model.clone()), &vcfg)?;
    log::info!(
        "{}: {:?} branch, RMSE {rmse:.3e}, R² {r_squared:.5}, r = {:.3}, satisfied = {}",
        data.name,
        sel.branch,
        certificate.constants.r,
        certificate.satisfied
    );
    Ok(DatasetFit {
        name: data.name.clone(),
        loss: sel.selected_loss(),
        branch: sel.branch,
        model: sel.model,
        rmse,
        r_squared,
        certificate,
    })
}

/// Loads each CSV and runs [`fit_dataset`] on it.
pub fn fit_real_datasets(
    paths: &[impl AsRef<Path>],
    architecture: &[usize],
    train: &TrainConfig,
    verifier: &VerifierConfig,
) -> Result<Vec<DatasetFit>> {
    paths
        .iter()
        .map(|p| {
            fit_dataset(
                &RheologyDataset::load_csv(p)?,
                architecture,
                train,
                verifier,
            )
        })
        .collect()
}
