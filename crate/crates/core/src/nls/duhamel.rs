//! Duhamel integrals I(f)(t) = ∫₀ᵗ e^{i(t−s)Δ} f(s) ds by composite Gauss–Legendre
//! quadrature in the interaction picture.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::quadrature::GaussLegendre;

/// Composite Gauss–Legendre rule on [0, t] with equal panels.
#[derive(Debug, Clone)]
pub struct TimeRule {
    pub t_end: f64,
    pub panels: usize,
    rule: GaussLegendre,
    /// ∫_{-1}^{x_i} ℓ_j on the reference panel.
    integration: Vec<Vec<f64>>,
}

impl TimeRule {
    pub fn new(t_end: f64, panels: usize, nodes: usize) -> Result<Self> {
        if nodes < 2 || panels == 0 {
            return Err(Error::InvalidParameter(format!("time rule needs ≥ 2 nodes and ≥ 1 panel ({nodes}, {panels})")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("end time {t_end} must be finite and non-negative")));
        }
        let rule = GaussLegendre::new(nodes);
        let integration = rule.integration_matrix();
        Ok(TimeRule { t_end, panels, rule, integration })
    }

    /// Panels short enough that an integrand with temporal frequencies up to `band`
    /// turns through at most 9 radians per panel.
    pub fn for_band(t_end: f64, band: f64, nodes: usize) -> Result<Self> {
        let panels = ((t_end * band / 9.0).ceil() as usize).max(1);
        TimeRule::new(t_end, panels, nodes)
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.rule.len()
    }

    pub fn panel_width(&self) -> f64 {
        self.t_end / self.panels as f64
    }

    pub fn panel_start(&self, p: usize) -> f64 {
        p as f64 * self.panel_width()
    }

    /// Nodes of panel p, ascending.
    pub fn panel_nodes(&self, p: usize) -> Vec<f64> {
        let (a, h) = (self.panel_start(p), self.panel_width());
        self.rule.nodes.iter().map(|x| a + 0.5 * h * (x + 1.0)).collect()
    }

    /// All nodes, panel by panel.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.panels).flat_map(|p| self.panel_nodes(p)).collect()
    }

    pub fn len(&self) -> usize {
        self.panels * self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// ∫₀ᵗ g on the rule for samples g at [`TimeRule::nodes`].
    pub fn integrate(&self, g: &[SpectralField]) -> SpectralField {
        let h = 0.5 * self.panel_width();
        let mut acc = g[0].clone();
        acc.scale(Complex64::default());
        for (k, gk) in g.iter().enumerate() {
            acc.axpy(Complex64::new(h * self.rule.weights[k % self.rule.len()], 0.0), gk);
        }
        acc
    }

    /// Running integrals G(t_k) = ∫₀^{t_k} g at every node, plus G at each panel end.
    pub fn cumulative(&self, g: &[SpectralField]) -> (Vec<SpectralField>, Vec<SpectralField>) {
        let q = self.rule.len();
        let h = 0.5 * self.panel_width();
        let mut start = g[0].clone();
        start.scale(Complex64::default());
        let mut at_nodes = Vec::with_capacity(g.len());
        let mut ends = Vec::with_capacity(self.panels);
        for p in 0..self.panels {
            let gp = &g[p * q..(p + 1) * q];
            for row in &self.integration {
                let mut v = start.clone();
                for (s, gj) in row.iter().zip(gp) {
                    v.axpy(Complex64::new(h * s, 0.0), gj);
                }
                at_nodes.push(v);
            }
            for (w, gj) in self.rule.weights.iter().zip(gp) {
                start.axpy(Complex64::new(h * w, 0.0), gj);
            }
            ends.push(start.clone());
        }
        (at_nodes, ends)
    }
}

/// I(f)(t) with the rule's nodes; the integrand e^{−isΔ}f(s) is integrated and the
/// result propagated by e^{itΔ}, so oscillation of f along the free flow costs nothing.
pub fn duhamel<F>(mut f: F, rule: &TimeRule) -> SpectralField
where
    F: FnMut(f64) -> SpectralField,
{
    let g: Vec<SpectralField> = rule.nodes().into_iter().map(|s| f(s).free_propagate(-s)).collect();
    rule.integrate(&g).free_propagate(rule.t_end)
}
