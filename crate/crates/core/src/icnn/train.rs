//! Full-batch Adam on the mean-square error with the exponentiation
//! projection applied after every optimizer step.

use ndarray::{Array1, Array2, Axis, Zip};
use serde::{Deserialize, Serialize};

use super::{project_weights, Activation, Branch, IcnnModel, InputAffine, OutputAffine};
use crate::dataset::RheologyDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub epsilon_proj: f64,
    pub activation: Activation,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20_000,
            learning_rate: 1e-3,
            seed: 0,
            epsilon_proj: super::DEFAULT_EPSILON_PROJ,
            activation: Activation::Softplus,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn with_epochs(epochs: usize, seed: u64) -> Self {
        Self {
            epochs,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || !(self.learning_rate > 0.0) || !(self.epsilon_proj > 0.0) {
            return Err(Error::InvalidInput(format!(
                "training needs epochs >= 1, learning_rate > 0 and epsilon_proj > 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: IcnnModel,
    /// Mean-square error on the training set, in the units of the targets.
    pub final_loss: f64,
}

/// Result of fitting both a convex and a concave network to the same data.
#[derive(Debug, Clone)]
pub struct Selection {
    pub model: IcnnModel,
    pub branch: Branch,
    pub loss_convex: f64,
    pub loss_concave: f64,
}

impl Selection {
    pub fn selected_loss(&self) -> f64 {
        match self.branch {
            Branch::Convex => self.loss_convex,
            Branch::Concave => self.loss_concave,
        }
    }
}

struct Moments {
    m: Array2<f64>,
    v: Array2<f64>,
    mb: Array1<f64>,
    vb: Array1<f64>,
}

/// Trains a convex network on a rheology dataset.
pub fn train(
    dataset: &RheologyDataset,
    architecture: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let (inputs, targets) = dataset.as_points();
    train_points(&inputs, &targets, architecture, config)
}

/// Trains a convex network (`Branch::Convex`) on arbitrary points.
pub fn train_points(
    inputs: &[Vec<f64>],
    targets: &[f64],
    architecture: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut model = IcnnModel::init(architecture, config.activation, config.seed)?;
    let d = model.input_dim();
    if inputs.len() != targets.len() || inputs.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 samples with matching targets".into(),
        ));
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if !inputs
        .iter()
        .flatten()
        .chain(targets)
        .all(|v| v.is_finite())
    {
        return Err(Error::InvalidInput("training data must be finite".into()));
    }

    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for x in inputs {
        for k in 0..d {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    model.input_affine = InputAffine::from_range(&lo, &hi);
    let ymin = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let yscale = if ymax > ymin { ymax - ymin } else { 1.0 };
    model.output_affine = OutputAffine {
        scale: yscale,
        shift: ymin,
    };

    let n = inputs.len();
    let ia = &model.input_affine;
    let x = Array2::from_shape_fn((n, d), |(i, k)| ia.scale[k] * inputs[i][k] + ia.shift[k]);
    let y = Array1::from_shape_fn(n, |i| (targets[i] - ymin) / yscale);

    let mut moments: Vec<Moments> = model
        .layers
        .iter()
        .map(|l| Moments {
            m: Array2::zeros(l.weights.raw_dim()),
            v: Array2::zeros(l.weights.raw_dim()),
            mb: Array1::zeros(l.bias.len()),
            vb: Array1::zeros(l.bias.len()),
        })
        .collect();

    let act = config.activation;
    let last = model.layers.len() - 1;
    for epoch in 0..config.epochs {
        // forward pass, keeping layer inputs and activation slopes
        let mut layer_inputs: Vec<Array2<f64>> = Vec::with_capacity(model.layers.len());
        let mut slopes: Vec<Array2<f64>> = Vec::with_capacity(last);
        let mut h = x.clone();
        for (l, layer) in model.layers.iter().enumerate() {
            let mut z = h.dot(&layer.weights.t());
            z += &layer.bias;
            layer_inputs.push(h);
            if l < last {
                let mut slope = Array2::zeros(z.raw_dim());
                Zip::from(&mut z).and(&mut slope).for_each(|zv, s| {
                    let (a, da) = act.value_and_slope(*zv);
                    *zv = a;
                    *s = da;
                });
                slopes.push(slope);
            }
            h = z;
        }
        let residual = &h.column(0) - &y;
        let loss = residual.dot(&residual) / n as f64;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                loss: loss * yscale * yscale,
            });
        }

        // backward pass
        let mut delta = (&residual * (2.0 / n as f64)).insert_axis(Axis(1));
        let step = (epoch + 1) as i32;
        let c1 = 1.0 - config.beta1.powi(step);
        let c2 = 1.0 - config.beta2.powi(step);
        for l in (0..=last).rev() {
            if l < last {
                delta *= &slopes[l];
            }
            let grad_w = delta.t().dot(&layer_inputs[l]);
            let grad_b = delta.sum_axis(Axis(0));
            if l > 0 {
                delta = delta.dot(&model.layers[l].weights);
            }
            let layer = &mut model.layers[l];
            let mo = &mut moments[l];
            adam(
                &mut layer.weights,
                &grad_w,
                &mut mo.m,
                &mut mo.v,
                config,
                c1,
                c2,
            );
            adam(
                &mut layer.bias,
                &grad_b,
                &mut mo.mb,
                &mut mo.vb,
                config,
                c1,
                c2,
            );
        }
        project_weights(&mut model, config.epsilon_proj);
    }

    let final_loss = inputs
        .iter()
        .zip(targets)
        .map(|(xi, &ti)| {
            let r = model.forward(xi).expect("dimension checked") - ti;
            r * r
        })
        .sum::<f64>()
        / n as f64;
    if !final_loss.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: config.epochs,
            loss: final_loss,
        });
    }
    Ok(TrainOutcome { model, final_loss })
}

#[inline]
fn adam<D: ndarray::Dimension>(
    param: &mut ndarray::Array<f64, D>,
    grad: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    cfg: &TrainConfig,
    c1: f64,
    c2: f64,
) {
    let (b1, b2, lr, eps) = (cfg.beta1, cfg.beta2, cfg.learning_rate, cfg.adam_eps);
    Zip::from(param)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|p, &g, m, v| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        });
}

/// Seed of the concave run, derived from the configured seed.
pub(crate) fn concave_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

/// Fits a convex network to `y` and another to `-y`, keeping whichever has
/// the smaller training loss. Ties go to the convex branch.
pub fn select_convex_concave(
    inputs: &[Vec<f64>],
    targets: &[f64],
    architecture: &[usize],
    config: &TrainConfig,
) -> Result<Selection> {
    let convex = train_points(inputs, targets, architecture, config)?;
    let negated: Vec<f64> = targets.iter().map(|y| -y).collect();
    let concave_cfg = TrainConfig {
        seed: concave_seed(config.seed),
        ..config.clone()
    };
    let concave = train_points(inputs, &negated, architecture, &concave_cfg)?;
    let (loss_convex, loss_concave) = (convex.final_loss, concave.final_loss);
    if loss_convex <= loss_concave {
        Ok(Selection {
            model: convex.model,
            branch: Branch::Convex,
            loss_convex,
            loss_concave,
        })
    } else {
        let mut model = concave.model;
        model.branch = Branch::Concave;
        Ok(Selection {
            model,
            branch: Branch::Concave,
            loss_convex,
            loss_concave,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icnn::check_convexity_structural;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])
            .collect()
    }

    #[test]
    fn linear_data_is_fitted() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![0.0, 1.0, 2.0];
        let out =
            train_points(&x, &y, &[1, 16, 8, 1], &TrainConfig::with_epochs(20_000, 1)).unwrap();
        assert!(out.final_loss <= 1e-4, "loss {}", out.final_loss);
        assert!(check_convexity_structural(&out.model));
    }

    #[test]
    fn training_is_deterministic() {
        let x = grid(20, 0.0, 3.0);
        let y: Vec<f64> = x.iter().map(|v| v[0] * v[0]).collect();
        let cfg = TrainConfig::with_epochs(200, 42);
        let a = train_points(&x, &y, &[1, 10, 5, 1], &cfg).unwrap();
        let b = train_points(&x, &y, &[1, 10, 5, 1], &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.final_loss.to_bits(), b.final_loss.to_bits());
    }

    #[test]
    fn divergence_is_reported() {
        let x = grid(10, 0.0, 1.0);
        let y: Vec<f64> = x.iter().map(|v| v[0]).collect();
        let cfg = TrainConfig {
            learning_rate: f64::INFINITY,
            ..TrainConfig::with_epochs(5, 0)
        };
        match train_points(&x, &y, &[1, 4, 1], &cfg) {
            Err(Error::TrainingDiverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn bad_config_and_data_rejected() {
        let x = grid(5, 0.0, 1.0);
        let y = vec![0.0; 5];
        assert!(train_points(&x, &y, &[1, 4, 1], &TrainConfig::with_epochs(0, 0)).is_err());
        assert!(train_points(&x, &y[..3], &[1, 4, 1], &TrainConfig::with_epochs(1, 0)).is_err());
        assert!(train_points(&x, &y, &[2, 4, 1], &TrainConfig::with_epochs(1, 0)).is_err());
    }

    #[test]
    fn selection_picks_curvature() {
        let x = grid(40, -2.0, 2.0);
        let convex: Vec<f64> = x.iter().map(|v| v[0] * v[0]).collect();
        let cfg = TrainConfig::with_epochs(20_000, 7);
        let sel = select_convex_concave(&x, &convex, &[1, 24, 12, 1], &cfg).unwrap();
        assert_eq!(sel.branch, Branch::Convex);
        assert!(sel.loss_convex < sel.loss_concave);

        let concave: Vec<f64> = convex.iter().map(|y| -y).collect();
        let sel = select_convex_concave(&x, &concave, &[1, 24, 12, 1], &cfg).unwrap();
        assert_eq!(sel.branch, Branch::Concave);
        assert!(sel.loss_concave < sel.loss_convex);
        // the returned callable follows the original data
        let v = sel.model.forward(&[1.5]).unwrap();
        assert!((v + 2.25).abs() < 0.05, "{v}");
    }
}
