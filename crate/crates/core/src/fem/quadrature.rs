//! Gauss–Legendre rules and collapsed (Duffy) rules on the reference triangle
//! with vertices (0,0), (1,0), (0,1).

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    /// Reference coordinates `(ξ, η)`.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule exact for polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> TriangleRule {
    if (4..=5).contains(&degree) {
        return radon_seven_point();
    }
    // ξ = u, η = v(1 − u); a degree-d monomial becomes degree d+1 in u.
    let n = (degree + 2).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            points.push([x[a], x[b] * (1.0 - x[a])]);
            weights.push(w[a] * w[b] * (1.0 - x[a]));
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

/// Radon's symmetric 7-point rule, exact to degree 5.
fn radon_seven_point() -> TriangleRule {
    let r = 15f64.sqrt();
    let mut points = vec![[1.0 / 3.0, 1.0 / 3.0]];
    let mut weights = vec![9.0 / 80.0];
    for (a, w) in [
        ((6.0 - r) / 21.0, (155.0 - r) / 2400.0),
        ((6.0 + r) / 21.0, (155.0 + r) / 2400.0),
    ] {
        let b = 1.0 - 2.0 * a;
        points.extend([[a, a], [a, b], [b, a]]);
        weights.extend([w; 3]);
    }
    TriangleRule {
        points,
        weights,
        degree: 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..(2 * n) as i32 {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
                assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn triangle_rules_are_exact_on_monomials() {
        // ∫ ξ^a η^b over the reference triangle = a! b! / (a + b + 2)!
        for degree in 0..=13 {
            let rule = triangle_rule(degree);
            assert!(rule
                .points
                .iter()
                .all(|p| p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-15, "degree {degree}: {a},{b}");
                }
            }
        }
    }
}
