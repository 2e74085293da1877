//! Block-coordinate ascent for forms that are quadratic in each factor.
//!
//! A multilinear L² norm ‖Π u_i‖² is, for fixed other factors, a positive
//! semidefinite quadratic form ⟨x_i, Q_i x_i⟩ in factor i. Each step replaces x_i
//! with the normalized power step Q_i x_i; if rounding makes that step lose value,
//! the step x_i + s·Q_i x_i is retried with s halved.

use num_complex::Complex64;

use crate::error::Result;

pub trait QuadraticInEach {
    fn factors(&self) -> usize;

    /// ‖Π u_i‖² for the given coefficient vectors.
    fn value(&self, x: &[Vec<Complex64>]) -> Result<f64>;

    /// The value together with Q_i x_i.
    fn value_and_gradient(&self, x: &[Vec<Complex64>], i: usize) -> Result<(f64, Vec<Complex64>)>;
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
}

/// Runs `iterations` single-factor updates, cycling over the factors. Factors must
/// be unit vectors on entry; returns the final value.
pub fn coordinate_ascent<F: QuadraticInEach>(
    form: &F,
    x: &mut [Vec<Complex64>],
    iterations: usize,
) -> Result<f64> {
    let mut current = form.value(x)?;
    for it in 0..iterations {
        let i = it % form.factors();
        let (value, grad) = form.value_and_gradient(x, i)?;
        current = value;
        let gnorm = norm(&grad);
        if gnorm == 0.0 {
            continue;
        }
        let old = x[i].clone();
        let mut candidate: Vec<Complex64> = grad.iter().map(|g| g / gnorm).collect();
        let mut step = 1.0;
        for _ in 0..30 {
            x[i] = candidate.clone();
            let v = form.value(x)?;
            if v >= current {
                current = v;
                break;
            }
            x[i] = old.clone();
            candidate = old.iter().zip(&grad).map(|(o, g)| o + g * (step / gnorm)).collect();
            normalize(&mut candidate);
            step *= 0.5;
        }
    }
    Ok(current)
}
