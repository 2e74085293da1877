//! Gauss–Legendre rules on [-1, 1] and the spectral integration matrix used by the
//! Duhamel integrator.

use std::f64::consts::PI;

/// Legendre P_k(x) for k = 0..=n.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// Nodes (ascending) and weights of the n-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = p_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = p_and_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // descending from +1 on the first half
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_a^b f ≈ Σ w f on the mapped rule.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        (
            self.nodes.iter().map(|x| c + h * x).collect(),
            self.weights.iter().map(|w| h * w).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// S[i][j] = ∫_{-1}^{x_i} ℓ_j(s) ds for the Lagrange basis ℓ_j on the nodes.
    ///
    /// Built from the discrete Legendre expansion ℓ_j = w_j Σ_k (k + ½) P_k(x_j) P_k,
    /// which is exact for k < n.
    pub fn integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let at_nodes: Vec<Vec<f64>> = self.nodes.iter().map(|&x| legendre_values(n, x)).collect();
        // antiderivatives ∫_{-1}^{x} P_k
        let anti: Vec<Vec<f64>> = at_nodes
            .iter()
            .zip(&self.nodes)
            .map(|(p, &x)| {
                (0..n)
                    .map(|k| if k == 0 { x + 1.0 } else { (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64 })
                    .collect()
            })
            .collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.weights[j]
                            * (0..n)
                                .map(|k| (k as f64 + 0.5) * at_nodes[j][k] * anti[i][k])
                                .sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    }
}

fn p_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let pm1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}
