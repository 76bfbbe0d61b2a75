//! Input-convex feedforward networks.
//!
//! A plain feedforward chain is convex in its input when every weight matrix
//! after the first is entrywise non-negative and every activation is convex
//! and non-decreasing. The output layer is affine. Positive-scale affine maps
//! on the input and output keep the composition convex, so a model with
//! `Branch::Convex` is convex in its input and one with `Branch::Concave`
//! (negated output) is concave.

mod io;
mod train;

pub use io::{load_model, save_model, MODEL_SCHEMA_VERSION};
pub use train::{select_convex_concave, train, train_points, Selection, TrainConfig, TrainOutcome};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default constant of the exponentiation projection.
pub const DEFAULT_EPSILON_PROJ: f64 = 30.0;

/// Training inputs are mapped onto `[0, INPUT_SPAN]` per coordinate.
pub const INPUT_SPAN: f64 = 50.0;

/// Bound on the initial first-layer weights.
const FIRST_LAYER_SLOPE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Softplus,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Softplus => z.max(0.0) + (-z.abs()).exp().ln_1p(),
            Activation::Relu => z.max(0.0),
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Softplus => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Value and slope together, sharing one exponential.
    #[inline]
    pub fn value_and_slope(self, z: f64) -> (f64, f64) {
        match self {
            Activation::Softplus => {
                let e = (-z.abs()).exp();
                let sp = z.max(0.0) + e.ln_1p();
                let sig = if z >= 0.0 {
                    1.0 / (1.0 + e)
                } else {
                    e / (1.0 + e)
                };
                (sp, sig)
            }
            Activation::Relu => (self.apply(z), self.derivative(z)),
        }
    }

    /// Both activations offered here are convex and non-decreasing.
    pub fn is_convex_nondecreasing(self) -> bool {
        matches!(self, Activation::Softplus | Activation::Relu)
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softplus" => Ok(Activation::Softplus),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidInput(format!("unknown activation '{other}'"))),
        }
    }
}

/// Which data the stored network was fitted to: `y` (convex) or `-y` (concave).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Convex,
    Concave,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Convex => 1.0,
            Branch::Concave => -1.0,
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(Branch::Convex),
            -1 => Some(Branch::Concave),
            _ => None,
        }
    }
}

/// Per-coordinate map `x -> scale * x + shift` with `scale > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputAffine {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl InputAffine {
    pub fn identity(dim: usize) -> Self {
        Self {
            scale: vec![1.0; dim],
            shift: vec![0.0; dim],
        }
    }

    /// Maps the per-coordinate data range onto `[0, INPUT_SPAN]`.
    pub fn from_range(min: &[f64], max: &[f64]) -> Self {
        let mut scale = Vec::with_capacity(min.len());
        let mut shift = Vec::with_capacity(min.len());
        for (&lo, &hi) in min.iter().zip(max) {
            let s = if hi > lo { INPUT_SPAN / (hi - lo) } else { 1.0 };
            scale.push(s);
            shift.push(-lo * s);
        }
        Self { scale, shift }
    }
}

/// Map `y -> scale * y + shift` with `scale > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputAffine {
    pub scale: f64,
    pub shift: f64,
}

impl OutputAffine {
    pub const IDENTITY: OutputAffine = OutputAffine {
        scale: 1.0,
        shift: 0.0,
    };
}

/// One affine layer `z = W h + b`, `W` stored as `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcnnModel {
    pub architecture: Vec<usize>,
    pub layers: Vec<DenseLayer>,
    pub activation: Activation,
    pub branch: Branch,
    pub input_affine: InputAffine,
    pub output_affine: OutputAffine,
}

impl IcnnModel {
    /// Random initialization. First-layer weights are uniform in
    /// `[-0.5, 0.5]` and each bias places the unit's kink `w·x + b = 0` at a
    /// uniform random point of `[0, INPUT_SPAN]^d`, so the kinks cover the
    /// normalized input box. Later weights are drawn uniform in
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` with negative draws set to zero,
    /// so the model starts inside the convex set with about half of those
    /// weights inactive; their biases are uniform in the same interval. Draws come from
    /// ChaCha8 in layer order, weights row-major then biases.
    pub fn init(architecture: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        validate_architecture(architecture)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = architecture
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                if l == 0 {
                    let s = FIRST_LAYER_SLOPE;
                    let weights =
                        Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-s..s));
                    let bias = Array1::from_shape_fn(fan_out, |i| {
                        -(0..fan_in)
                            .map(|k| weights[[i, k]] * rng.random_range(0.0..INPUT_SPAN))
                            .sum::<f64>()
                    });
                    return DenseLayer { weights, bias };
                }
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
                    rng.random_range(-bound..bound).max(0.0)
                });
                let bias = Array1::from_shape_fn(fan_out, |_| rng.random_range(-bound..bound));
                DenseLayer { weights, bias }
            })
            .collect();
        Ok(Self {
            architecture: architecture.to_vec(),
            layers,
            activation,
            branch: Branch::Convex,
            input_affine: InputAffine::identity(architecture[0]),
            output_affine: OutputAffine::IDENTITY,
        })
    }

    /// A network that returns `value` everywhere (all weights zero).
    pub fn constant(architecture: &[usize], activation: Activation, value: f64) -> Result<Self> {
        validate_architecture(architecture)?;
        let layers = architecture
            .windows(2)
            .map(|w| DenseLayer {
                weights: Array2::zeros((w[1], w[0])),
                bias: Array1::zeros(w[1]),
            })
            .collect::<Vec<_>>();
        let mut m = Self {
            architecture: architecture.to_vec(),
            layers,
            activation,
            branch: Branch::Convex,
            input_affine: InputAffine::identity(architecture[0]),
            output_affine: OutputAffine::IDENTITY,
        };
        m.layers.last_mut().unwrap().bias[0] = value;
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.architecture[0]
    }

    /// Checks shapes and the positivity of the affine scales.
    pub fn validate(&self) -> Result<()> {
        validate_architecture(&self.architecture)?;
        if self.layers.len() + 1 != self.architecture.len() {
            return Err(Error::InvalidInput(
                "layer count does not match architecture".into(),
            ));
        }
        for (l, (layer, w)) in self
            .layers
            .iter()
            .zip(self.architecture.windows(2))
            .enumerate()
        {
            if layer.weights.dim() != (w[1], w[0]) || layer.bias.len() != w[1] {
                return Err(Error::InvalidInput(format!(
                    "layer {} has the wrong shape",
                    l + 1
                )));
            }
        }
        let d = self.input_dim();
        let ia = &self.input_affine;
        if ia.scale.len() != d || ia.shift.len() != d {
            return Err(Error::InvalidInput(
                "input_affine dimension mismatch".into(),
            ));
        }
        if !ia.scale.iter().all(|&s| s > 0.0 && s.is_finite()) || !(self.output_affine.scale > 0.0)
        {
            return Err(Error::InvalidInput("affine scales must be positive".into()));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn normalized_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.input_affine.scale.iter().zip(&self.input_affine.shift))
            .map(|(&xi, (&s, &c))| s * xi + c)
            .collect()
    }

    /// Raw network output, before the output affine map and the sign.
    fn network(&self, input: Vec<f64>) -> f64 {
        let mut h = input;
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.bias.to_vec();
            for (zi, row) in z.iter_mut().zip(layer.weights.rows()) {
                *zi += row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>();
            }
            if l < last {
                for zi in z.iter_mut() {
                    *zi = self.activation.apply(*zi);
                }
            }
            h = z;
        }
        h[0]
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let raw = self.network(self.normalized_input(x));
        Ok(self.branch.sign() * (self.output_affine.scale * raw + self.output_affine.shift))
    }

    /// Gradient of [`forward`](Self::forward) with respect to the input, by backpropagation.
    pub fn grad_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = self.normalized_input(x);
        let mut inputs = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.bias.to_vec();
            for (zi, row) in z.iter_mut().zip(layer.weights.rows()) {
                *zi += row.iter().zip(&h).map(|(w, x)| w * x).sum::<f64>();
            }
            inputs.push(h);
            h = if l < last {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                z.clone()
            };
            pre.push(z);
        }
        let mut delta = vec![self.branch.sign() * self.output_affine.scale];
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if l < last {
                for (d, &z) in delta.iter_mut().zip(&pre[l]) {
                    *d *= self.activation.derivative(z);
                }
            }
            let mut back = vec![0.0; inputs[l].len()];
            for (d, row) in delta.iter().zip(layer.weights.rows()) {
                for (b, w) in back.iter_mut().zip(row) {
                    *b += d * w;
                }
            }
            delta = back;
        }
        Ok(delta
            .iter()
            .zip(&self.input_affine.scale)
            .map(|(d, s)| d * s)
            .collect())
    }

    /// Scalar-input evaluation. Panics if the input dimension is not 1.
    pub fn eval_scalar(&self, t: f64) -> f64 {
        self.eval_scalar_with_deriv(t).0
    }

    /// Value and input derivative for a scalar-input network, by forward-mode
    /// propagation of the tangent.
    pub fn eval_scalar_with_deriv(&self, t: f64) -> (f64, f64) {
        assert_eq!(
            self.input_dim(),
            1,
            "scalar evaluation needs a 1-input network"
        );
        let s = self.input_affine.scale[0];
        let mut h = vec![s * t + self.input_affine.shift[0]];
        let mut dh = vec![s];
        let mut z = Vec::new();
        let mut dz = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let width = h.len();
            z.clear();
            dz.clear();
            let weights = layer
                .weights
                .as_slice()
                .expect("layer weights are stored contiguously");
            for (row, &b) in weights.chunks_exact(width).zip(&layer.bias) {
                let (acc, dacc) = dot2(row, &h, &dh);
                let acc = acc + b;
                if l < last {
                    let (a, da) = self.activation.value_and_slope(acc);
                    z.push(a);
                    dz.push(da * dacc);
                } else {
                    z.push(acc);
                    dz.push(dacc);
                }
            }
            std::mem::swap(&mut h, &mut z);
            std::mem::swap(&mut dh, &mut dz);
        }
        let k = self.branch.sign() * self.output_affine.scale;
        (
            k * h[0] + self.branch.sign() * self.output_affine.shift,
            k * dh[0],
        )
    }
}

/// `(w·x, w·y)` with eight partial sums per product to shorten the
/// floating-point dependency chain.
#[inline]
fn dot2(w: &[f64], x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = w.len().min(x.len()).min(y.len());
    let (w, x, y) = (&w[..n], &x[..n], &y[..n]);
    let mut a = [0.0; 8];
    let mut b = [0.0; 8];
    let split = n - n % 8;
    for ((wc, xc), yc) in w[..split]
        .chunks_exact(8)
        .zip(x[..split].chunks_exact(8))
        .zip(y[..split].chunks_exact(8))
    {
        for k in 0..8 {
            a[k] += wc[k] * xc[k];
            b[k] += wc[k] * yc[k];
        }
    }
    let mut sa: f64 = a.iter().sum();
    let mut sb: f64 = b.iter().sum();
    for i in split..n {
        sa += w[i] * x[i];
        sb += w[i] * y[i];
    }
    (sa, sb)
}

fn validate_architecture(architecture: &[usize]) -> Result<()> {
    if architecture.len() < 2 || architecture.contains(&0) || *architecture.last().unwrap() != 1 {
        return Err(Error::InvalidInput(format!(
            "architecture must have >= 2 positive widths ending in 1, got {architecture:?}"
        )));
    }
    Ok(())
}

/// Exponentiation projection: in every layer after the first, a negative
/// weight `w` becomes `exp(w - epsilon)`. First-layer weights and all biases
/// are left alone.
pub fn project_weights(model: &mut IcnnModel, epsilon: f64) {
    for layer in model.layers.iter_mut().skip(1) {
        layer
            .weights
            .mapv_inplace(|w| if w < 0.0 { (w - epsilon).exp() } else { w });
    }
}

/// True iff all weights after the first layer are non-negative and the
/// activation is convex and non-decreasing.
pub fn check_convexity_structural(model: &IcnnModel) -> bool {
    model.activation.is_convex_nondecreasing()
        && model
            .layers
            .iter()
            .skip(1)
            .all(|layer| layer.weights.iter().all(|&w| w >= 0.0))
}
