//! Differential evolution with the `best/1/bin` strategy.
//!
//! Trials for a whole generation are built from the current population and
//! then compared one-to-one with their parents (deferred updating), so the
//! result does not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Population size as a multiple of the problem dimension.
    pub popsize: usize,
    /// Differential weight.
    pub mutation: f64,
    /// Crossover probability.
    pub crossover: f64,
    pub max_generations: usize,
    /// Relative spread of population energies at which the search stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            popsize: 15,
            mutation: 0.8,
            crossover: 0.9,
            max_generations: 1000,
            tol: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub x: Vec<f64>,
    pub fun: f64,
    pub generations: usize,
    pub evaluations: usize,
}

/// Minimizes `f` over the box `bounds`. `x0`, when given, replaces the first
/// member of the initial population.
pub fn differential_evolution<F>(
    f: F,
    bounds: &[(f64, f64)],
    x0: Option<&[f64]>,
    cfg: &DeConfig,
) -> DeResult
where
    F: Fn(&[f64]) -> f64,
{
    let dim = bounds.len();
    let np = (cfg.popsize * dim).max(5);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sample = |rng: &mut ChaCha8Rng, k: usize| {
        let (lo, hi) = bounds[k];
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    };

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| (0..dim).map(|k| sample(&mut rng, k)).collect())
        .collect();
    if let Some(x0) = x0 {
        pop[0] = x0
            .iter()
            .zip(bounds)
            .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
            .collect();
    }
    let energy = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut fit: Vec<f64> = pop.iter().map(|x| energy(x)).collect();
    let mut evaluations = np;
    let mut generations = 0;

    for _ in 0..cfg.max_generations {
        if converged(&fit, cfg.tol) {
            break;
        }
        generations += 1;
        let best = argmin(&fit);
        let mut trials = Vec::with_capacity(np);
        for i in 0..np {
            let (r1, r2) = distinct_pair(&mut rng, np, i);
            let fill = rng.random_range(0..dim);
            let mut trial = pop[i].clone();
            for k in 0..dim {
                if k == fill || rng.random::<f64>() < cfg.crossover {
                    trial[k] = pop[best][k] + cfg.mutation * (pop[r1][k] - pop[r2][k]);
                }
            }
            for k in 0..dim {
                let (lo, hi) = bounds[k];
                if !(lo..=hi).contains(&trial[k]) {
                    trial[k] = sample(&mut rng, k);
                }
            }
            trials.push(trial);
        }
        for (i, trial) in trials.into_iter().enumerate() {
            let e = energy(&trial);
            evaluations += 1;
            if e <= fit[i] {
                pop[i] = trial;
                fit[i] = e;
            }
        }
    }
    let best = argmin(&fit);
    DeResult {
        x: pop[best].clone(),
        fun: fit[best],
        generations,
        evaluations,
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &e) in v.iter().enumerate() {
        if e < v[best] {
            best = i;
        }
    }
    best
}

fn distinct_pair(rng: &mut ChaCha8Rng, np: usize, exclude: usize) -> (usize, usize) {
    let pick = |rng: &mut ChaCha8Rng, avoid: &[usize]| loop {
        let c = rng.random_range(0..np);
        if !avoid.contains(&c) {
            return c;
        }
    };
    let a = pick(rng, &[exclude]);
    let b = pick(rng, &[exclude, a]);
    (a, b)
}

fn converged(fit: &[f64], tol: f64) -> bool {
    if fit.iter().any(|e| !e.is_finite()) {
        return false;
    }
    let n = fit.len() as f64;
    let mean = fit.iter().sum::<f64>() / n;
    let var = fit.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    var.sqrt() <= tol * mean.abs()
}
