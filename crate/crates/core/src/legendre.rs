//! Fully normalized associated Legendre functions.
//!
//! P̄_n^j(μ) is scaled so that Y_n^j(μ, φ) = P̄_n^j(μ) e^{ijφ} has unit L² norm on
//! the sphere of area 4π, with the Condon–Shortley phase. Negative orders follow
//! P̄_n^{-j} = (-1)^j P̄_n^j. The recursion is the standard normalized three-term
//! one; it is accurate to roughly 1e-13 up to degree ~1000, beyond which the
//! sectoral seed underflows near the poles.

use std::f64::consts::PI;

/// Table of P̄_n^j(μ) for 0 ≤ j ≤ n ≤ lmax at a fixed μ.
#[derive(Debug, Clone)]
pub struct LegendreColumn {
    lmax: usize,
    values: Vec<f64>,
}

#[inline]
fn tri(n: usize, j: usize) -> usize {
    n * (n + 1) / 2 + j
}

impl LegendreColumn {
    pub fn new(lmax: usize, mu: f64) -> Self {
        let mut values = vec![0.0; tri(lmax + 1, 0)];
        let s = (1.0 - mu * mu).max(0.0).sqrt();
        let mut pjj = (1.0 / (4.0 * PI)).sqrt();
        for j in 0..=lmax {
            if j > 0 {
                let jf = j as f64;
                pjj *= -((2.0 * jf + 1.0) / (2.0 * jf)).sqrt() * s;
            }
            values[tri(j, j)] = pjj;
            if j < lmax {
                values[tri(j + 1, j)] = (2.0 * j as f64 + 3.0).sqrt() * mu * pjj;
            }
            for n in j + 2..=lmax {
                let (nf, jf) = (n as f64, j as f64);
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - jf * jf)).sqrt();
                let b = (((nf - 1.0) * (nf - 1.0) - jf * jf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
                values[tri(n, j)] = a * (mu * values[tri(n - 1, j)] - b * values[tri(n - 2, j)]);
            }
        }
        LegendreColumn { lmax, values }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// P̄_n^j for any order |j| ≤ n.
    #[inline]
    pub fn get(&self, n: usize, j: i64) -> f64 {
        let ja = j.unsigned_abs() as usize;
        debug_assert!(ja <= n && n <= self.lmax);
        let v = self.values[tri(n, ja)];
        if j < 0 && ja % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Columns at every node of a quadrature rule.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub columns: Vec<LegendreColumn>,
}

impl LegendreTable {
    pub fn new(lmax: usize, nodes: &[f64]) -> Self {
        LegendreTable { columns: nodes.iter().map(|&mu| LegendreColumn::new(lmax, mu)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn low_degree_closed_forms() {
        let mu = 0.3f64;
        let c = LegendreColumn::new(3, mu);
        let s = (1.0 - mu * mu).sqrt();
        assert!((c.get(0, 0) - (1.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!((c.get(1, 0) - (3.0 / (4.0 * PI)).sqrt() * mu).abs() < 1e-15);
        // Y_1^1 = -sqrt(3/8π) sinθ e^{iφ}
        assert!((c.get(1, 1) + (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-15);
        assert!((c.get(1, -1) - (3.0 / (8.0 * PI)).sqrt() * s).abs() < 1e-15);
        // Y_2^0 = sqrt(5/16π)(3μ²-1)
        assert!((c.get(2, 0) - (5.0 / (16.0 * PI)).sqrt() * (3.0 * mu * mu - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_per_order() {
        let l = 40;
        let g = GaussLegendre::new(l + 1);
        let t = LegendreTable::new(l, &g.nodes);
        for j in [0i64, 1, 7, 20] {
            for n in j as usize..=l {
                for n2 in j as usize..=l {
                    let ip: f64 = (0..g.len())
                        .map(|k| g.weights[k] * t.columns[k].get(n, j) * t.columns[k].get(n2, j))
                        .sum::<f64>()
                        * 2.0
                        * PI;
                    let e = if n == n2 { 1.0 } else { 0.0 };
                    assert!((ip - e).abs() < 1e-12, "j={j} n={n} n2={n2} ip={ip}");
                }
            }
        }
    }
}
