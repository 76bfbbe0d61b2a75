//! Closed-form velocity and pressure fields used as exact solutions.

use super::space::FeSpace;

/// Exact fields; `velocity_grad[i][j] = ∂u_i/∂x_j`.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub velocity: fn([f64; 2]) -> [f64; 2],
    pub velocity_grad: fn([f64; 2]) -> [[f64; 2]; 2],
    pub pressure: fn([f64; 2]) -> f64,
}

fn swirl(x: [f64; 2]) -> [f64; 2] {
    let (a, b) = (x[0] * x[0] + x[1] * x[1], x[0] * x[0] - x[1] * x[1]);
    [
        5.0 * x[1] * a.sin() + 4.0 * x[1] * b.sin(),
        -5.0 * x[0] * a.sin() + 4.0 * x[0] * b.sin(),
    ]
}

fn swirl_grad(x: [f64; 2]) -> [[f64; 2]; 2] {
    let (px, py) = (x[0], x[1]);
    let (a, b) = (px * px + py * py, px * px - py * py);
    let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
    [
        [
            10.0 * px * py * ca + 8.0 * px * py * cb,
            5.0 * sa + 10.0 * py * py * ca + 4.0 * sb - 8.0 * py * py * cb,
        ],
        [
            -5.0 * sa - 10.0 * px * px * ca + 4.0 * sb + 8.0 * px * px * cb,
            -10.0 * px * py * ca - 8.0 * px * py * cb,
        ],
    ]
}

fn sine_pressure(x: [f64; 2]) -> f64 {
    (x[0] + x[1]).sin()
}

fn zero_velocity(_: [f64; 2]) -> [f64; 2] {
    [0.0, 0.0]
}

fn zero_grad(_: [f64; 2]) -> [[f64; 2]; 2] {
    [[0.0; 2]; 2]
}

fn zero_pressure(_: [f64; 2]) -> f64 {
    0.0
}

impl ManufacturedCase {
    /// Divergence-free swirl
    /// `u = (5y sin(x²+y²) + 4y sin(x²−y²), −5x sin(x²+y²) + 4x sin(x²−y²))`
    /// with pressure `p = sin(x + y)`, which has zero mean on the square.
    pub fn reference() -> Self {
        Self {
            velocity: swirl,
            velocity_grad: swirl_grad,
            pressure: sine_pressure,
        }
    }

    pub fn zero() -> Self {
        Self {
            velocity: zero_velocity,
            velocity_grad: zero_grad,
            pressure: zero_pressure,
        }
    }

    /// Nodal interpolant of the exact fields, with a zero multiplier.
    pub fn interpolate(&self, space: &FeSpace) -> Vec<f64> {
        let mut x = vec![0.0; space.n_unknowns()];
        for (d, &pt) in space.velocity.coords.iter().enumerate() {
            let u = (self.velocity)(pt);
            x[space.ux(d)] = u[0];
            x[space.uy(d)] = u[1];
        }
        for (d, &pt) in space.pressure.coords.iter().enumerate() {
            x[space.p(d)] = (self.pressure)(pt);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_matches_finite_differences_and_is_divergence_free() {
        let case = ManufacturedCase::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..1000 {
            let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let g = (case.velocity_grad)(x);
            let mut fd = [[0.0; 2]; 2];
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (up, um) = ((case.velocity)(xp), (case.velocity)(xm));
                for i in 0..2 {
                    fd[i][j] = (up[i] - um[i]) / (2.0 * h);
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    assert!((fd[i][j] - g[i][j]).abs() < 1e-8);
                }
            }
            assert!((fd[0][0] + fd[1][1]).abs() < 1e-8);
            assert!((g[0][0] + g[1][1]).abs() < 1e-13);
        }
    }
}
