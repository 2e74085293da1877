//! The fifth differential of the flow map F: u₀ ↦ u(T) at 0, in the direction
//! (h₁, h₂, h₂, h₂, h₂).
//!
//! Closed form: D = −12iσ·I(6H₁|H₂|⁴ + 4H̄₁H₂³H̄₂)(T) with H_i = e^{itΔ}h_i.
//! Flow side: F(εg) = εe^{iTΔ}g + ε⁵F₅(g) + O(ε⁹), and F₅(h₂ + s·h₁) is a real quintic
//! polynomial in s whose linear coefficient is D/24. It is recovered from the odd part at
//! s = 1, 2, 3, and the O(ε⁴) error is removed by Richardson extrapolation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::report::{EstimateId, EstimateReport};

use super::duhamel::{duhamel, TimeRule};
use super::picard::picard_solve;
use super::{QuinticModel, SolverConfig};

const SHIFTS: [f64; 3] = [1.0, 2.0, 3.0];

fn fit(h: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    if h.m_max() > cfg.m_max || h.n_max() > cfg.n_max {
        return Err(Error::InvalidParameter("direction exceeds the solver truncation".into()));
    }
    h.resized(cfg.m_max, cfg.n_max)
}

/// −12iσ·I(6H₁|H₂|⁴ + 4H̄₁H₂³H̄₂)(T).
pub fn fifth_differential_formula(h1: &SpectralField, h2: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    cfg.validate()?;
    let (h1, h2) = (fit(h1, cfg)?, fit(h2, cfg)?);
    let mut model = QuinticModel::new(cfg.m_max, cfg.n_max)?;
    let rule = TimeRule::for_band(cfg.horizon, 3.0 * cfg.lambda_max(), cfg.nodes)?;
    let mut failure = None;
    let mut d = duhamel(
        |s| {
            let (a, b) = (h1.free_propagate(s), h2.free_propagate(s));
            model
                .pointwise(&[&a, &b], |v| {
                    let (x, y) = (v[0], v[1]);
                    let y2 = y.norm_sqr();
                    x * (6.0 * y2 * y2) + x.conj() * y * y * y * y.conj() * 4.0
                })
                .unwrap_or_else(|e| {
                    failure = Some(e);
                    SpectralField::zeros(cfg.m_max, cfg.n_max).expect("caps validated")
                })
        },
        &rule,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    d.scale(Complex64::new(0.0, -12.0 * cfg.sign.sigma()));
    Ok(d)
}

/// 24·c₁(ε) from Picard remainders at ε(h₂ ± s·h₁), s = 1, 2, 3.
pub fn flow_quotient(h1: &SpectralField, h2: &SpectralField, eps: f64, cfg: &SolverConfig) -> Result<SpectralField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
    }
    let (h1, h2) = (fit(h1, cfg)?, fit(h2, cfg)?);
    let scale = h1.sobolev_norm(1.0).value.max(h2.sobolev_norm(1.0).value);
    let mut odd = Vec::with_capacity(SHIFTS.len());
    for &s in &SHIFTS {
        let mut parts = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            let mut g = h2.clone();
            g.axpy(Complex64::new(sign * s, 0.0), &h1);
            g.scale(Complex64::new(eps, 0.0));
            let size = (eps * (1.0 + s) * scale).powi(5);
            let local = SolverConfig { picard_tol: (1e-13 * size).max(f64::MIN_POSITIVE), ..cfg.clone() };
            let mut r = picard_solve(&g, &local)?.remainder;
            r.scale(Complex64::new(eps.powi(-5), 0.0));
            parts.push(r);
        }
        let mut o = parts[0].clone();
        o.axpy(Complex64::new(-1.0, 0.0), &parts[1]);
        // (Q(s) − Q(−s))/2s = c₁ + c₃s² + c₅s⁴
        o.scale(Complex64::new(0.5 / s, 0.0));
        odd.push(o);
    }
    // Lagrange interpolation at x = s², evaluated at x = 0
    let xs: Vec<f64> = SHIFTS.iter().map(|s| s * s).collect();
    let mut c1 = SpectralField::zeros(cfg.m_max, cfg.n_max)?;
    for (k, ok) in odd.iter().enumerate() {
        let weight: f64 = (0..xs.len()).filter(|&l| l != k).map(|l| -xs[l] / (xs[k] - xs[l])).product();
        c1.axpy(Complex64::new(24.0 * weight, 0.0), ok);
    }
    Ok(c1)
}

#[derive(Debug, Clone)]
pub struct FifthCheck {
    pub report: EstimateReport,
    pub formula: SpectralField,
    /// Richardson-extrapolated flow quotient.
    pub flow: SpectralField,
    /// Unextrapolated quotients per ε.
    pub per_eps: Vec<(f64, SpectralField)>,
}

fn h1_distance(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut d = a.clone();
    d.axpy(Complex64::new(-1.0, 0.0), b);
    d.sobolev_norm(1.0).value
}

/// Relative H¹ error between the closed form and the extrapolated flow quotient. The
/// last two entries of `eps` are used for the extrapolation.
pub fn fifth_differential_check(h1: &SpectralField, h2: &SpectralField, cfg: &SolverConfig, eps: &[f64]) -> Result<FifthCheck> {
    if eps.is_empty() {
        return Err(Error::InvalidParameter("eps list is empty".into()));
    }
    let formula = fifth_differential_formula(h1, h2, cfg)?;
    let per_eps: Vec<(f64, SpectralField)> =
        eps.iter().map(|&e| Ok((e, flow_quotient(h1, h2, e, cfg)?))).collect::<Result<_>>()?;
    let flow = match per_eps.as_slice() {
        [.., (e1, d1), (e2, d2)] => {
            if (e1 - e2).abs() <= f64::EPSILON * e1.max(*e2) {
                return Err(Error::InvalidParameter("extrapolation needs distinct ε".into()));
            }
            // D(ε) = D + aε⁴: eliminate a
            let (p1, p2) = (e1.powi(4), e2.powi(4));
            let mut d = d2.clone();
            d.scale(Complex64::new(p1 / (p1 - p2), 0.0));
            d.axpy(Complex64::new(-p2 / (p1 - p2), 0.0), d1);
            d
        }
        [(_, d)] => d.clone(),
        [] => unreachable!(),
    };
    let rhs = formula.sobolev_norm(1.0).value;
    if rhs == 0.0 {
        return Err(Error::Empty("the fifth differential vanishes for these directions".into()));
    }
    let eps_min = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let eps_max = eps.iter().copied().fold(0.0, f64::max);
    let report = EstimateReport::new(
        EstimateId::FifthDifferential,
        &[
            ("T", cfg.horizon),
            ("eps_min", eps_min),
            ("eps_max", eps_max),
            ("m_max", cfg.m_max as f64),
            ("n_max", cfg.n_max as f64),
            ("sign", cfg.sign.sigma()),
        ],
        h1_distance(&flow, &formula),
        rhs,
        eps.len() as u64,
        0,
    );
    Ok(FifthCheck { report, formula, flow, per_eps })
}
