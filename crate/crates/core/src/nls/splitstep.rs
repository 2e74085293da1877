//! Strang splitting: half a step of the exact linear flow, the nonlinear phase rotation
//! on the grid, another half linear step.

use crate::error::{Error, Result};
use crate::field::SpectralField;

use super::{QuinticModel, SolverConfig, Trajectory};

/// Upper bound on dt·λ_max. The linear flow is exact, so this is an accuracy limit on
/// the splitting rather than a stability limit.
pub const DT_LAMBDA_MAX: f64 = std::f64::consts::PI;

/// Integrate to cfg.horizon with ⌈T/dt⌉ equal steps, recording every step.
pub fn split_step(u0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    run(u0, cfg, true)
}

/// The same stepping with the nonlinear substep switched off.
pub fn split_step_linear(u0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    run(u0, cfg, false)
}

fn run(u0: &SpectralField, cfg: &SolverConfig, nonlinear: bool) -> Result<Trajectory> {
    cfg.validate()?;
    if u0.m_max() > cfg.m_max || u0.n_max() > cfg.n_max {
        return Err(Error::Resolution(format!(
            "initial data caps ({}, {}) exceed the truncation ({}, {})",
            u0.m_max(),
            u0.n_max(),
            cfg.m_max,
            cfg.n_max
        )));
    }
    let steps = ((cfg.horizon / cfg.dt - 1e-9).ceil() as usize).max(1);
    let h = cfg.horizon / steps as f64;
    if h * cfg.lambda_max() > DT_LAMBDA_MAX {
        return Err(Error::InvalidParameter(format!(
            "dt·λ_max = {:.3} exceeds {DT_LAMBDA_MAX:.3}",
            h * cfg.lambda_max()
        )));
    }
    let mut model = QuinticModel::new(cfg.m_max, cfg.n_max)?;
    let sigma_h = cfg.sign.sigma() * h;
    let mut u = u0.resized(cfg.m_max, cfg.n_max)?;
    let mut traj = Trajectory::default();
    let inv = model.invariants(&u, cfg.sign)?;
    traj.push(0.0, u.clone(), inv);
    for k in 1..=steps {
        u = u.free_propagate(0.5 * h);
        if nonlinear {
            u = model.phase_rotation(&u, sigma_h)?;
        }
        u = u.free_propagate(0.5 * h);
        let inv = model.invariants(&u, cfg.sign)?;
        traj.push(k as f64 * h, u.clone(), inv);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nls::{gaussian_data, Sign};
    use crate::rng;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn linear_substeps_match_free_flow() {
        let mut r = rng::stream(9, 0);
        let u0 = gaussian_data(&mut r, 3, 3, 1.0).unwrap();
        let cfg = SolverConfig { m_max: 3, n_max: 3, horizon: 0.7, dt: 0.01, ..Default::default() };
        let traj = split_step_linear(&u0, &cfg).unwrap();
        let free = u0.free_propagate(0.7);
        let end = traj.last().unwrap();
        let err = end.coeffs().iter().zip(free.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert_eq!(traj.len(), traj.mass.len());
    }

    #[test]
    fn constant_mode_closed_form() {
        let mut u0 = SpectralField::zeros(1, 1).unwrap();
        let a = Complex64::new(3.0, -1.0);
        u0.set(0, 0, 0, a).unwrap();
        for sign in [Sign::Defocusing, Sign::Focusing] {
            let cfg = SolverConfig { sign, m_max: 1, n_max: 1, horizon: 1.3, dt: 0.05, ..Default::default() };
            let end = split_step(&u0, &cfg).unwrap().last().unwrap().get(0, 0, 0);
            let rate = sign.sigma() * a.norm_sqr().powi(2) / (8.0 * PI * PI).powi(2);
            let expect = a * Complex64::from_polar(1.0, -rate * 1.3);
            assert!((end - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_coarse_steps() {
        let u0 = SpectralField::zeros(8, 8).unwrap();
        let cfg = SolverConfig { dt: 0.5, ..Default::default() };
        assert!(split_step(&u0, &cfg).is_err());
    }
}
