//! Numerical certification of the growth and monotonicity bounds required of
//! a viscosity law by the nonlinear Stokes theory.
//!
//! For constants `(C, α, r, M)` and shear rates `t, s > 0` the bounds read
//!
//! ```text
//! f1(t)    = C·B(t)           − k(t)               ≥ 0
//! f2(t, s) = C·|t−s|·B(t+s)   − |k(t)t − k(s)s|    ≥ 0   for 0 < s ≤ 2t
//! f3(t, s) = k(t)t − k(s)s    − M·(t−s)·B(t+s)     ≥ 0   for s ≤ t
//! ```
//!
//! with `B(x) = [x^α (1+x)^(1−α)]^(r−2)`. The constants are searched by
//! differential evolution on a penalized objective over random samples.

mod de;

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::rheology::ViscosityModel;

pub use de::{differential_evolution, DeConfig, DeResult};

/// `(C, α, r, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: f64,
    pub r: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl Constants {
    pub const fn new(c: f64, alpha: f64, r: f64, m: f64) -> Self {
        Self { c, alpha, r, m }
    }

    fn to_vec(self) -> Vec<f64> {
        vec![self.c, self.alpha, self.r, self.m]
    }

    fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

/// Search box for the constants. Lower bounds of `C`, `r` and `M` are open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub c_max: f64,
    pub r_max: f64,
    pub m_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            c_max: 100.0,
            r_max: 4.0,
            m_max: 100.0,
        }
    }
}

const OPEN_EPS: f64 = 1e-12;

impl Bounds {
    fn boxes(&self) -> [(f64, f64); 4] {
        [
            (OPEN_EPS, self.c_max),
            (0.0, 1.0),
            (1.0 + OPEN_EPS, self.r_max),
            (OPEN_EPS, self.m_max),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierConfig {
    pub n_samples: usize,
    pub t_max: f64,
    pub de_population: usize,
    pub de_f: f64,
    pub de_cr: f64,
    pub de_generations: usize,
    /// Relative population spread at which the search stops early (0 disables).
    pub de_tol: f64,
    pub seed: u64,
    pub feas_tol: f64,
    pub penalty_weight: f64,
    pub initial_guess: Constants,
    pub bounds: Bounds,
    /// Geometrically spaced shear rates in `[1e-6, 1e-2]·t_max` at which the
    /// constraints are enforced alongside the random samples. They do not
    /// enter the objective.
    pub anchor_points: usize,
    /// Extra deterministic points, uniform and geometric, on which the final
    /// constants are made feasible in addition to the random samples.
    pub refine_points: usize,
    /// Relative slack applied to `C` (enlarged) and `M` (reduced) after the
    /// feasibility repair.
    pub safety_margin: f64,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            n_samples: 100,
            t_max: 70.0,
            de_population: 15,
            de_f: 0.8,
            de_cr: 0.9,
            de_generations: 1000,
            de_tol: 0.01,
            seed: 0,
            feas_tol: 1e-8,
            penalty_weight: 1e6,
            initial_guess: Constants::new(10.0, 0.5, 1.5, 10.0),
            bounds: Bounds::default(),
            anchor_points: 20,
            refine_points: 400,
            safety_margin: 1e-3,
        }
    }
}

impl VerifierConfig {
    pub fn with_t_max(t_max: f64) -> Self {
        Self {
            t_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.n_samples < 2 {
            return bad("n_samples must be at least 2");
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad("t_max must be positive and finite");
        }
        if self.de_population == 0 || self.de_generations == 0 {
            return bad("population and generations must be positive");
        }
        if !(self.de_f > 0.0 && self.de_f <= 2.0) {
            return bad("de_f must lie in (0, 2]");
        }
        if !(0.0..=1.0).contains(&self.de_cr) {
            return bad("de_cr must lie in [0, 1]");
        }
        if !(self.de_tol >= 0.0) || !(self.feas_tol >= 0.0) || !(self.penalty_weight > 0.0) {
            return bad("tolerances must be non-negative and the penalty positive");
        }
        if !(0.0..1.0).contains(&self.safety_margin) {
            return bad("safety_margin must lie in [0, 1)");
        }
        let b = &self.bounds;
        if !(b.c_max > 0.0 && b.m_max > 0.0 && b.r_max > 1.0) {
            return bad("bounds must satisfy c_max > 0, m_max > 0, r_max > 1");
        }
        Ok(())
    }
}

/// Minimum of each residual family over its admissible samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstResiduals {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl WorstResiduals {
    pub fn min(&self) -> f64 {
        self.f1.min(self.f2).min(self.f3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCertificate {
    #[serde(flatten)]
    pub constants: Constants,
    pub objective: f64,
    pub worst_residuals: WorstResiduals,
    pub satisfied: bool,
    pub config: VerifierConfig,
}

impl AssumptionCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(io_err(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text, path)
    }
}

/// Residual arrays on a sample grid. `f2[[j, i]]` and `f3[[j, i]]` pair
/// `t[j]` with `s[i]`; entries outside their mask are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub f1: Array1<f64>,
    pub f2: Array2<f64>,
    pub f3: Array2<f64>,
    pub f2_mask: Array2<bool>,
    pub f3_mask: Array2<bool>,
    pub objective: f64,
}

impl Residuals {
    pub fn worst(&self) -> WorstResiduals {
        let masked_min = |f: &Array2<f64>, m: &Array2<bool>| {
            f.iter()
                .zip(m.iter())
                .filter(|(_, &m)| m)
                .map(|(&v, _)| v)
                .fold(f64::INFINITY, f64::min)
        };
        WorstResiduals {
            f1: self.f1.iter().copied().fold(f64::INFINITY, f64::min),
            f2: masked_min(&self.f2, &self.f2_mask),
            f3: masked_min(&self.f3, &self.f3_mask),
        }
    }
}

/// Draws `n_samples` values each for `t` and `s`, uniformly in `(0, t_max]`.
pub fn sample_grid(config: &VerifierConfig) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| config.t_max - rng.random_range(0.0..config.t_max))
            .collect()
    };
    let t = draw(config.n_samples);
    let s = draw(config.n_samples);
    (t, s)
}

#[inline]
fn log_pair(x: f64) -> (f64, f64) {
    (x.ln(), x.ln_1p())
}

#[inline]
fn bracket(ln_x: f64, ln_1px: f64, c: &Constants) -> f64 {
    ((c.r - 2.0) * (c.alpha * ln_x + (1.0 - c.alpha) * ln_1px)).exp()
}

/// Sample grid with everything that does not depend on the constants
/// precomputed, so each evaluation costs one exponential per sample or pair.
struct Grid {
    singles: Vec<Single>,
    pairs: Vec<Pair>,
}

struct Single {
    objective: bool,
    k: f64,
    ln_t: f64,
    ln_1pt: f64,
}

struct Pair {
    objective: bool,
    diff: f64,
    flux_diff: f64,
    ln_x: f64,
    ln_1px: f64,
    in_f2: bool,
    in_f3: bool,
}

fn eval_on(model: &ViscosityModel, x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .map(|&t| {
            let k = model.eval(t);
            if k.is_finite() {
                Ok(k)
            } else {
                Err(Error::ModelRange { t })
            }
        })
        .collect()
}

impl Grid {
    fn new(model: &ViscosityModel, t: &[f64], s: &[f64]) -> Result<Self> {
        Self::with_extra(model, t, s, &[])
    }

    /// Grid on `t ∪ extra` × `s ∪ extra` whose objective only covers `t × s`.
    fn with_extra(model: &ViscosityModel, t: &[f64], s: &[f64], extra: &[f64]) -> Result<Self> {
        let (nt, ns) = (t.len(), s.len());
        let t: Vec<f64> = t.iter().chain(extra).copied().collect();
        let s: Vec<f64> = s.iter().chain(extra).copied().collect();
        let kt = eval_on(model, &t)?;
        let ks = eval_on(model, &s)?;
        let singles = t
            .iter()
            .zip(&kt)
            .enumerate()
            .map(|(j, (&t, &k))| {
                let (ln_t, ln_1pt) = log_pair(t);
                Single {
                    objective: j < nt,
                    k,
                    ln_t,
                    ln_1pt,
                }
            })
            .collect();
        let mut pairs = Vec::new();
        for (j, &tj) in t.iter().enumerate() {
            for (i, &si) in s.iter().enumerate() {
                let in_f2 = si <= 2.0 * tj;
                let in_f3 = tj >= si;
                if !(in_f2 || in_f3) {
                    continue;
                }
                let (ln_x, ln_1px) = log_pair(tj + si);
                pairs.push(Pair {
                    objective: j < nt && i < ns,
                    diff: tj - si,
                    flux_diff: kt[j] * tj - ks[i] * si,
                    ln_x,
                    ln_1px,
                    in_f2,
                    in_f3,
                });
            }
        }
        Ok(Self { singles, pairs })
    }

    /// Returns `(F, Σ max(0, −f)², worst residuals)`.
    fn evaluate(&self, c: &Constants) -> (f64, f64, WorstResiduals) {
        let mut f = 0.0;
        let mut viol = 0.0;
        let mut worst = WorstResiduals {
            f1: f64::INFINITY,
            f2: f64::INFINITY,
            f3: f64::INFINITY,
        };
        let mut add = |v: f64, objective: bool, w: &mut f64| {
            if objective {
                f += v;
            }
            if v < 0.0 {
                viol += v * v;
            }
            *w = w.min(v);
        };
        for p in &self.singles {
            let v = c.c * bracket(p.ln_t, p.ln_1pt, c) - p.k;
            add(v, p.objective, &mut worst.f1);
        }
        for p in &self.pairs {
            let b = bracket(p.ln_x, p.ln_1px, c);
            if p.in_f2 {
                add(
                    c.c * p.diff.abs() * b - p.flux_diff.abs(),
                    p.objective,
                    &mut worst.f2,
                );
            }
            if p.in_f3 {
                add(p.flux_diff - c.m * p.diff * b, p.objective, &mut worst.f3);
            }
        }
        (f, viol, worst)
    }

    /// Smallest `C` and largest `M` that make every residual non-negative for
    /// the given `(α, r)`. `M` is `+∞` when no pair constrains it.
    fn extreme_constants(&self, alpha: f64, r: f64) -> (f64, f64) {
        let probe = Constants::new(1.0, alpha, r, 1.0);
        let mut c_req = 0.0f64;
        let mut m_req = f64::INFINITY;
        for p in &self.singles {
            c_req = c_req.max(p.k / bracket(p.ln_t, p.ln_1pt, &probe));
        }
        for p in &self.pairs {
            let b = bracket(p.ln_x, p.ln_1px, &probe);
            if p.in_f2 && p.diff != 0.0 {
                c_req = c_req.max(p.flux_diff.abs() / (p.diff.abs() * b));
            }
            if p.in_f3 && p.diff > 0.0 {
                m_req = m_req.min(p.flux_diff / (p.diff * b));
            }
        }
        (c_req, m_req)
    }
}

/// Evaluates the residual arrays and `F` for the given constants.
pub fn residuals(model: &ViscosityModel, t: &[f64], s: &[f64], c: &Constants) -> Result<Residuals> {
    let kt = eval_on(model, t)?;
    let ks = eval_on(model, s)?;
    let (nt, ns) = (t.len(), s.len());
    let b = |x: f64| bracket(x.ln(), x.ln_1p(), c);
    let f1 = Array1::from_shape_fn(nt, |j| c.c * b(t[j]) - kt[j]);
    let f2_mask = Array2::from_shape_fn((nt, ns), |(j, i)| s[i] <= 2.0 * t[j]);
    let f3_mask = Array2::from_shape_fn((nt, ns), |(j, i)| t[j] >= s[i]);
    let mut f2 = Array2::zeros((nt, ns));
    let mut f3 = Array2::zeros((nt, ns));
    for j in 0..nt {
        for i in 0..ns {
            let bij = b(t[j] + s[i]);
            let flux = kt[j] * t[j] - ks[i] * s[i];
            if f2_mask[[j, i]] {
                f2[[j, i]] = c.c * (t[j] - s[i]).abs() * bij - flux.abs();
            }
            if f3_mask[[j, i]] {
                f3[[j, i]] = flux - c.m * (t[j] - s[i]) * bij;
            }
        }
    }
    let objective = f1.sum() + f2.sum() + f3.sum();
    Ok(Residuals {
        f1,
        f2,
        f3,
        f2_mask,
        f3_mask,
        objective,
    })
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Deterministic refinement points in `(0, t_max]`: half uniform, half
/// geometric down to `1e-6·t_max`.
fn refinement_points(t_max: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let nu = n.div_ceil(2);
    let mut pts: Vec<f64> = (1..=nu).map(|i| t_max * i as f64 / nu as f64).collect();
    pts.extend(geometric(1e-6 * t_max, t_max, n - nu));
    pts
}

/// Optimizes `(C, α, r, M)` for `model` and reports feasibility of the result
/// on the random sample grid.
///
/// The objective `F` sums the residuals over the random samples. The
/// penalty also covers the anchor points, which keep the search from
/// trading feasibility near zero shear rate for a smaller `F`.
///
/// After the evolutionary search, `C` is raised and `M` lowered to the
/// closest values that satisfy every constraint on the samples together with
/// `refine_points` deterministic points, and then moved further by the
/// relative `safety_margin`. Both moves can only increase the residuals.
pub fn verify(model: &ViscosityModel, config: &VerifierConfig) -> Result<AssumptionCertificate> {
    config.validate()?;
    let (t, s) = sample_grid(config);
    let anchors = geometric(
        1e-6 * config.t_max,
        1e-2 * config.t_max,
        config.anchor_points,
    );
    let grid = Grid::with_extra(model, &t, &s, &anchors)?;
    let mu = config.penalty_weight;
    let de_cfg = DeConfig {
        popsize: config.de_population,
        mutation: config.de_f,
        crossover: config.de_cr,
        max_generations: config.de_generations,
        tol: config.de_tol,
        seed: config.seed,
    };
    let found = differential_evolution(
        |x| {
            let (f, viol, _) = grid.evaluate(&Constants::from_slice(x));
            f + mu * viol
        },
        &config.bounds.boxes(),
        Some(&config.initial_guess.to_vec()),
        &de_cfg,
    );
    log::debug!(
        "differential evolution: {} generations, objective {:.6e}",
        found.generations,
        found.fun
    );
    let mut best = Constants::from_slice(&found.x);

    let mut pts = t.clone();
    pts.extend(&s);
    pts.extend(&anchors);
    pts.extend(refinement_points(config.t_max, config.refine_points));
    // Near-coincident points give difference quotients dominated by
    // rounding, so keep one point per cluster.
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|b, a| *b - *a <= 1e-9 * *a);
    let check = Grid::new(model, &pts, &pts)?;
    let (c_req, m_req) = check.extreme_constants(best.alpha, best.r);
    let (c_min, c_max) = config.bounds.boxes()[0];
    let (m_min, m_max) = config.bounds.boxes()[3];
    if c_req.is_finite() {
        best.c = (best.c.max(c_req) * (1.0 + config.safety_margin)).clamp(c_min, c_max);
    }
    if m_req > 0.0 {
        best.m = (best.m.min(m_req) * (1.0 - config.safety_margin)).clamp(m_min, m_max);
    }

    let (objective, _, worst) = Grid::new(model, &t, &s)?.evaluate(&best);
    let satisfied = worst.min() >= -config.feas_tol;
    Ok(AssumptionCertificate {
        constants: best,
        objective,
        worst_residuals: worst,
        satisfied,
        config: config.clone(),
    })
}
