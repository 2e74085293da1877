//! ‖P_N e^{itΔ}φ‖_{L⁶(τ₀×M)} against N^{2/3}‖P_Nφ‖.

use crate::error::Result;
use crate::report::{EstimateId, EstimateReport};
use crate::rng;
use crate::spacetime::ProductForm;

use super::trilinear::{block_keys, single_order_keys, Datum, DataFamily};

/// Exact L⁶(τ₀×M) norm of the free evolution of a datum.
pub fn l6_norm(d: &Datum) -> Result<f64> {
    if d.keys.is_empty() {
        return Ok(0.0);
    }
    Ok(ProductForm::power(d.keys.clone(), 3)?.value(std::slice::from_ref(&d.coeffs))?.powf(1.0 / 6.0))
}

/// Max over unit data of the L⁶ norm divided by N^{2/3}. The localized family draws one
/// azimuthal order per trial, so |u| does not depend on φ and the sextic grid stays small.
pub fn l6_block_estimate(block: u64, trials: usize, seed: u64, family: DataFamily) -> Result<EstimateReport> {
    let mut rng = rng::stream(seed, rng::stream_id(&[EstimateId::L6 as i64, block as i64]));
    let mut best = 0.0f64;
    for _ in 0..trials.max(1) {
        let keys = match family {
            DataFamily::FullBlock => block_keys(block)?,
            DataFamily::Localized => single_order_keys(&mut rng, block)?,
        };
        let mut coeffs: Vec<_> = keys.iter().map(|_| rng::complex_gaussian(&mut rng)).collect();
        crate::ascent::normalize(&mut coeffs);
        best = best.max(l6_norm(&Datum { keys, coeffs })?);
    }
    Ok(EstimateReport::new(
        EstimateId::L6,
        &[("N", block as f64)],
        best,
        (block as f64).powf(2.0 / 3.0),
        trials as u64,
        seed,
    ))
}

/// One Hölder instance: (‖u₁u₂u₃‖_{L²}, Π‖u_i‖_{L⁶}).
pub fn holder_chain(data: &[Datum; 3]) -> Result<(f64, f64)> {
    let lhs = super::trilinear::trilinear_of(data)?;
    let rhs = data.iter().map(l6_norm).product::<Result<f64>>()?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::trilinear::draw_data;
    use crate::spacetime::Key;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn constant_mode_closed_form() {
        let d = Datum { keys: vec![Key { m: 0, n: 0, j: 0 }], coeffs: vec![Complex64::new(1.0, 0.0)] };
        let exact = (64.0 * PI.powi(3)).powf(1.0 / 6.0) / (8.0 * PI * PI).sqrt();
        assert!((l6_norm(&d).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn holder_holds_per_trial() {
        let mut high = rng::stream(5, 1);
        let mut low = rng::stream(5, 2);
        for blocks in [[4, 2, 1], [2, 2, 2], [8, 4, 4]] {
            let d = draw_data(blocks, DataFamily::Localized, &mut high, &mut low).unwrap();
            let (l, r) = holder_chain(&d).unwrap();
            assert!(l <= r * (1.0 + 1e-12), "{blocks:?} {l} {r}");
        }
    }

    #[test]
    fn block_estimates_are_finite() {
        for b in [1, 2, 4] {
            let r = l6_block_estimate(b, 3, 1, DataFamily::FullBlock).unwrap();
            assert!(r.ratio.is_finite() && r.ratio > 0.0);
        }
    }
}
