//! Picard iteration of u(t) = e^{itΔ}u₀ − iσ·I(P(|u|⁴u))(t).
//!
//! The iterate is stored in the interaction picture u(t) = e^{itΔ}(u₀ + w(t)) at the
//! quadrature nodes, so the nonlinear remainder e^{iTΔ}w(T) is available without
//! subtracting two nearly equal fields.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;

use super::duhamel::TimeRule;
use super::{sup_h1_distance, QuinticModel, SolverConfig, Trajectory};

/// Consecutive increment ratios ≥ 1 tolerated before giving up.
const STALL_LIMIT: usize = 3;

#[derive(Debug, Clone)]
pub struct PicardSolution {
    /// u₀ and u at the end of every time panel.
    pub trajectory: Trajectory,
    /// u(T).
    pub final_state: SpectralField,
    /// u(T) − e^{iTΔ}u₀.
    pub remainder: SpectralField,
    /// sup-in-t H¹ increments per iteration.
    pub increments: Vec<f64>,
    /// increments[k+1] / increments[k].
    pub ratios: Vec<f64>,
    /// sup-in-t H¹ distance between the returned iterate and its image.
    pub residual: f64,
    pub nodes: usize,
}

struct DuhamelMap<'a> {
    u0: &'a SpectralField,
    sigma: f64,
    rule: &'a TimeRule,
    times: Vec<f64>,
    model: QuinticModel,
}

impl DuhamelMap<'_> {
    /// w ↦ −iσ∫₀ᵗ e^{−isΔ}P(|u|⁴u)(s) ds at every node and panel end.
    fn apply(&mut self, w: &[SpectralField]) -> Result<(Vec<SpectralField>, Vec<SpectralField>)> {
        let factor = Complex64::new(0.0, -self.sigma);
        let mut g = Vec::with_capacity(w.len());
        for (wk, &t) in w.iter().zip(&self.times) {
            let mut v = self.u0.clone();
            v.axpy(Complex64::new(1.0, 0.0), wk);
            let mut nl = self.model.nonlinearity(&v.free_propagate(t))?.free_propagate(-t);
            nl.scale(factor);
            g.push(nl);
        }
        Ok(self.rule.cumulative(&g))
    }
}

fn distance(a: &(Vec<SpectralField>, Vec<SpectralField>), b: &(Vec<SpectralField>, Vec<SpectralField>)) -> f64 {
    // H¹ is invariant under e^{itΔ}, so interaction-picture distances are the physical ones
    sup_h1_distance(&a.0, &b.0).max(sup_h1_distance(&a.1, &b.1))
}

/// Solve on [0, cfg.horizon] with cfg.nodes Gauss nodes per panel and panels short
/// enough for the band 3λ_max of the interaction-picture integrand.
pub fn picard_solve(u0: &SpectralField, cfg: &SolverConfig) -> Result<PicardSolution> {
    cfg.validate()?;
    if u0.m_max() > cfg.m_max || u0.n_max() > cfg.n_max {
        return Err(Error::InvalidParameter(format!(
            "initial data caps ({}, {}) exceed the truncation ({}, {})",
            u0.m_max(),
            u0.n_max(),
            cfg.m_max,
            cfg.n_max
        )));
    }
    let u0 = u0.resized(cfg.m_max, cfg.n_max)?;
    let h1 = u0.sobolev_norm(1.0).value;
    if h1 > cfg.smallness {
        return Err(Error::InvalidParameter(format!(
            "‖u0‖_H1 = {h1:.3e} exceeds the small-data threshold {:.3e}",
            cfg.smallness
        )));
    }
    let rule = TimeRule::for_band(cfg.horizon, 3.0 * cfg.lambda_max(), cfg.nodes)?;
    let mut map = DuhamelMap {
        u0: &u0,
        sigma: cfg.sign.sigma(),
        rule: &rule,
        times: rule.nodes(),
        model: QuinticModel::new(cfg.m_max, cfg.n_max)?,
    };
    let zero = SpectralField::zeros(cfg.m_max, cfg.n_max)?;
    let mut current = (vec![zero.clone(); rule.len()], vec![zero; rule.panels]);
    let mut increments: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    let mut stalled = 0;
    let mut converged = false;
    for _ in 0..cfg.picard_max_iter {
        let next = map.apply(&current.0)?;
        let inc = distance(&next, &current);
        if let Some(&prev) = increments.last() {
            let r = if prev > 0.0 { inc / prev } else { 0.0 };
            ratios.push(r);
            stalled = if r >= 1.0 { stalled + 1 } else { 0 };
        }
        increments.push(inc);
        current = next;
        if inc < cfg.picard_tol {
            converged = true;
            break;
        }
        if stalled >= STALL_LIMIT {
            return Err(Error::NonContraction { ratios });
        }
    }
    if !converged {
        return Err(Error::NonContraction { ratios });
    }
    let check = map.apply(&current.0)?;
    let residual = distance(&check, &current);

    let mut trajectory = Trajectory::default();
    let inv = map.model.invariants(&u0, cfg.sign)?;
    trajectory.push(0.0, u0.clone(), inv);
    for (p, wp) in current.1.iter().enumerate() {
        let t = rule.panel_start(p + 1);
        let mut v = u0.clone();
        v.axpy(Complex64::new(1.0, 0.0), wp);
        let u = v.free_propagate(t);
        let inv = map.model.invariants(&u, cfg.sign)?;
        trajectory.push(t, u, inv);
    }
    let remainder = current.1.last().expect("at least one panel").free_propagate(cfg.horizon);
    let final_state = trajectory.last().expect("non-empty trajectory").clone();
    Ok(PicardSolution { trajectory, final_state, remainder, increments, ratios, residual, nodes: rule.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nls::{gaussian_data, Sign};
    use crate::rng;
    use std::f64::consts::PI;

    fn small_cfg() -> SolverConfig {
        SolverConfig { m_max: 2, n_max: 2, horizon: 0.5, picard_tol: 1e-13, ..Default::default() }
    }

    #[test]
    fn zero_data_stays_zero() {
        let u0 = SpectralField::zeros(2, 2).unwrap();
        let sol = picard_solve(&u0, &small_cfg()).unwrap();
        assert_eq!(sol.final_state.norm(), 0.0);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn constant_mode_rotates_in_phase() {
        let mut u0 = SpectralField::zeros(2, 2).unwrap();
        let a = Complex64::new(0.05, 0.02);
        u0.set(0, 0, 0, a).unwrap();
        for sign in [Sign::Defocusing, Sign::Focusing] {
            let cfg = SolverConfig { sign, ..small_cfg() };
            let sol = picard_solve(&u0, &cfg).unwrap();
            let rate = sign.sigma() * a.norm_sqr().powi(2) / (8.0 * PI * PI).powi(2);
            let expect = a * Complex64::from_polar(1.0, -rate * cfg.horizon);
            assert!((sol.final_state.get(0, 0, 0) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn large_data_fails_to_contract() {
        let mut r = rng::stream(5, 1);
        let u0 = gaussian_data(&mut r, 2, 2, 40.0).unwrap();
        let cfg = SolverConfig { smallness: 100.0, horizon: 1.0, picard_max_iter: 30, ..small_cfg() };
        assert!(matches!(picard_solve(&u0, &cfg), Err(Error::NonContraction { .. })));
    }

    #[test]
    fn rejects_data_above_threshold() {
        let mut r = rng::stream(5, 2);
        let u0 = gaussian_data(&mut r, 2, 2, 0.5).unwrap();
        assert!(matches!(picard_solve(&u0, &small_cfg()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn gauge_invariance() {
        let mut r = rng::stream(5, 3);
        let u0 = gaussian_data(&mut r, 2, 2, 0.08).unwrap();
        let rot = Complex64::from_polar(1.0, 0.9);
        let mut v0 = u0.clone();
        v0.scale(rot);
        let a = picard_solve(&u0, &small_cfg()).unwrap().final_state;
        let b = picard_solve(&v0, &small_cfg()).unwrap().final_state;
        let err = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (rot * x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}
