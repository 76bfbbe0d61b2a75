//! Lagrange bases of arbitrary degree on the reference triangle, written in
//! barycentric coordinates `λ0 = 1 − ξ − η`, `λ1 = ξ`, `λ2 = η`.

use super::quadrature::TriangleRule;

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    pub degree: usize,
    /// Barycentric multi-index of each node; vertices come first.
    pub nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange bases start at degree 1");
        let p = degree;
        let mut nodes = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
        for a in (0..=p).rev() {
            for b in (0..=p - a).rev() {
                let c = p - a - b;
                if a != p && b != p && c != p {
                    nodes.push([a, b, c]);
                }
            }
        }
        Self { degree, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reference coordinates of node `i`.
    pub fn node_point(&self, i: usize) -> [f64; 2] {
        let p = self.degree as f64;
        [self.nodes[i][1] as f64 / p, self.nodes[i][2] as f64 / p]
    }

    /// Values and reference gradients of all basis functions at `(ξ, η)`.
    pub fn eval(&self, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let lam = [1.0 - xi - eta, xi, eta];
        let p = self.degree as f64;
        let mut values = Vec::with_capacity(self.len());
        let mut grads = Vec::with_capacity(self.len());
        for alpha in &self.nodes {
            let mut g = [0.0; 3];
            let mut dg = [0.0; 3];
            for m in 0..3 {
                // product of (pλ − l)/(l + 1) for l < α_m, and its derivative in λ
                let mut val = 1.0;
                let mut der = 0.0;
                for l in 0..alpha[m] {
                    let lf = l as f64;
                    let f = (p * lam[m] - lf) / (lf + 1.0);
                    der = der * f + val * p / (lf + 1.0);
                    val *= f;
                }
                g[m] = val;
                dg[m] = der;
            }
            values.push(g[0] * g[1] * g[2]);
            let d = [
                dg[0] * g[1] * g[2],
                g[0] * dg[1] * g[2],
                g[0] * g[1] * dg[2],
            ];
            grads.push([d[1] - d[0], d[2] - d[0]]);
        }
        (values, grads)
    }
}

/// Basis values and reference gradients at every point of a rule, stored
/// point-major.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub n_basis: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn new(basis: &LagrangeBasis, rule: &TriangleRule) -> Self {
        let mut values = Vec::with_capacity(basis.len() * rule.len());
        let mut grads = Vec::with_capacity(basis.len() * rule.len());
        for pt in &rule.points {
            let (v, g) = basis.eval(pt[0], pt[1]);
            values.extend(v);
            grads.extend(g);
        }
        Self {
            n_basis: basis.len(),
            values,
            grads,
        }
    }

    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.n_basis..(q + 1) * self.n_basis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        for p in 1..=5 {
            assert_eq!(LagrangeBasis::new(p).len(), (p + 1) * (p + 2) / 2);
        }
    }

    #[test]
    fn kronecker_property() {
        for p in 1..=5 {
            let b = LagrangeBasis::new(p);
            for j in 0..b.len() {
                let x = b.node_point(j);
                let (v, _) = b.eval(x[0], x[1]);
                for (i, vi) in v.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((vi - want).abs() < 1e-12, "p={p} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_gradient_fd() {
        let pts = [[0.2, 0.3], [0.05, 0.9], [0.6, 0.1]];
        for p in 1..=5 {
            let b = LagrangeBasis::new(p);
            for x in pts {
                let (v, g) = b.eval(x[0], x[1]);
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let gs = g.iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
                assert!(gs[0].abs() < 1e-10 && gs[1].abs() < 1e-10);
                let h = 1e-6;
                let (vx1, _) = b.eval(x[0] + h, x[1]);
                let (vx0, _) = b.eval(x[0] - h, x[1]);
                let (vy1, _) = b.eval(x[0], x[1] + h);
                let (vy0, _) = b.eval(x[0], x[1] - h);
                for i in 0..b.len() {
                    let fx = (vx1[i] - vx0[i]) / (2.0 * h);
                    let fy = (vy1[i] - vy0[i]) / (2.0 * h);
                    assert!((fx - g[i][0]).abs() < 1e-6 && (fy - g[i][1]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn reproduces_polynomials_of_its_degree() {
        // interpolating ξ^a η^b with a + b = p is exact
        for p in 1..=4 {
            let b = LagrangeBasis::new(p);
            let f = |x: [f64; 2]| x[0].powi(p as i32 - 1) * x[1] + 0.5;
            let coeffs: Vec<f64> = (0..b.len()).map(|i| f(b.node_point(i))).collect();
            let x = [0.31, 0.17];
            let (v, _) = b.eval(x[0], x[1]);
            let interp: f64 = v.iter().zip(&coeffs).map(|(a, c)| a * c).sum();
            assert!((interp - f(x)).abs() < 1e-13);
        }
    }
}
