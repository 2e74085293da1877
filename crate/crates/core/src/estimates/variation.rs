//! Discrete 2-variation of a sampled path of states.

use crate::error::{Error, Result};
use crate::field::SpectralField;

/// sup over subsequences t_{k_0} < … < t_{k_r} of Σ‖v(t_{k_i}) − v(t_{k_{i−1}})‖², square-rooted,
/// with v(+∞) := 0 appended. O(K²) distance evaluations.
pub fn discrete_v2_norm(samples: &[(f64, SpectralField)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("2-variation of an empty path".into()));
    }
    if samples.windows(2).any(|w| !(w[0].0 <= w[1].0)) {
        return Err(Error::InvalidParameter("samples must be sorted by time".into()));
    }
    let m_max = samples.iter().map(|s| s.1.m_max()).max().unwrap_or(0);
    let n_max = samples.iter().map(|s| s.1.n_max()).max().unwrap_or(0);
    let mut states: Vec<SpectralField> = samples.iter().map(|s| s.1.resized(m_max, n_max)).collect::<Result<_>>()?;
    states.push(SpectralField::zeros(m_max, n_max)?);
    let dist2 = |a: &SpectralField, b: &SpectralField| -> f64 {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm_sqr()).sum()
    };
    Ok(v2_from_distances(states.len(), |i, j| dist2(&states[i], &states[j])).sqrt())
}

/// The dynamic program on an abstract point sequence: best[i] is the largest sum over
/// chains ending at i, and the last point is always worth ending at.
pub fn v2_from_distances(len: usize, dist2: impl Fn(usize, usize) -> f64) -> f64 {
    let mut best = vec![0.0f64; len];
    for i in 1..len {
        best[i] = (0..i).map(|j| best[j] + dist2(j, i)).fold(0.0, f64::max);
    }
    best.iter().copied().fold(0.0, f64::max)
}

/// Samples of the interaction profile e^{−itΔ}u(t).
pub fn interaction_profile<F>(u: F, times: &[f64]) -> Vec<(f64, SpectralField)>
where
    F: Fn(f64) -> SpectralField,
{
    times.iter().map(|&t| (t, u(t).free_propagate(-t))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_field;
    use crate::rng;

    #[test]
    fn constant_profile_is_one_jump() {
        let mut rng = rng::stream(1, 0);
        let phi = random_field(&mut rng, 2, 2).unwrap();
        let samples: Vec<(f64, SpectralField)> = (0..5).map(|k| (k as f64, phi.clone())).collect();
        assert!((discrete_v2_norm(&samples).unwrap() - phi.norm()).abs() < 1e-14);
    }

    #[test]
    fn two_step_atom() {
        let mut rng = rng::stream(2, 0);
        let a = random_field(&mut rng, 1, 1).unwrap();
        let b = random_field(&mut rng, 1, 1).unwrap();
        let samples = vec![(0.0, a.clone()), (0.5, a.clone()), (1.0, b.clone()), (1.5, b.clone())];
        let mut d = a.clone();
        d.axpy(num_complex::Complex64::new(-1.0, 0.0), &b);
        let chain = d.norm().powi(2) + b.norm().powi(2);
        let v = discrete_v2_norm(&samples).unwrap();
        assert!((v * v - chain.max(a.norm().powi(2))).abs() < 1e-12 * chain);
    }

    #[test]
    fn free_solution_gauge() {
        let mut rng = rng::stream(3, 0);
        let phi = random_field(&mut rng, 3, 3).unwrap().project_dyadic(4).unwrap();
        let times: Vec<f64> = (0..9).map(|k| 0.37 * k as f64).collect();
        let prof = interaction_profile(|t| phi.free_propagate(t), &times);
        assert!((discrete_v2_norm(&prof).unwrap() - phi.norm()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(discrete_v2_norm(&[]).is_err());
        let z = SpectralField::zeros(0, 0).unwrap();
        assert!(discrete_v2_norm(&[(1.0, z.clone()), (0.0, z)]).is_err());
    }
}
