//! The quintic equation i∂ₜu + Δu = σ|u|⁴u on S¹×S² at fixed spectral truncation.
//!
//! All statements below are about the truncated system
//! u̇ = iΔu − iσ·P(|u|⁴u), with P the projection onto the retained modes. Its mass
//! Σ|c|² and energy ½Σλ|c|² + σ/6∫|u|⁶ are exact invariants because the dealiased
//! quintic keeps ⟨P(|u|⁴u), u⟩ = ∫|u|⁶ real.

mod duhamel;
mod fifth;
mod picard;
mod polarization;
mod splitstep;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::good_size;
use crate::field::{GridField, SpaceTransform, SpectralField};
use crate::harmonics::SphereGrid;

pub use duhamel::{duhamel, TimeRule};
pub use fifth::{fifth_differential_check, fifth_differential_formula, flow_quotient, FifthCheck};
pub use picard::{picard_solve, PicardSolution};
pub use polarization::{bilinear_polarization_check, polarization_sweep, PolarizationCheck};
pub use splitstep::{split_step, split_step_linear, DT_LAMBDA_MAX};

/// σ in i∂ₜu + Δu = σ|u|⁴u.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Defocusing,
    Focusing,
}

impl Sign {
    pub fn sigma(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }

    pub fn from_sigma(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Sign::Defocusing),
            -1 => Ok(Sign::Focusing),
            _ => Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {s}"))),
        }
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "+1" | "defocusing" => Ok(Sign::Defocusing),
            "-1" | "focusing" => Ok(Sign::Focusing),
            other => Err(Error::Parse(format!("unknown sign `{other}`"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sigma() as i64)
    }
}

/// Default bound on ‖u₀‖_{H¹} accepted by the Picard solver.
pub const DEFAULT_SMALLNESS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sign: Sign,
    pub horizon: f64,
    pub m_max: usize,
    pub n_max: usize,
    /// Gauss–Legendre nodes per time panel.
    pub nodes: usize,
    pub picard_max_iter: usize,
    /// Stop when the sup-in-t H¹ increment drops below this.
    pub picard_tol: f64,
    pub dt: f64,
    pub smallness: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sign: Sign::Defocusing,
            horizon: 1.0,
            m_max: 8,
            n_max: 8,
            nodes: 16,
            picard_max_iter: 50,
            picard_tol: 1e-9,
            dt: 1e-3,
            smallness: DEFAULT_SMALLNESS,
        }
    }
}

/// Largest cap on |m| and n the solver accepts; the dealiased grid grows as cap³.
pub const SOLVER_CAP: usize = 64;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon T = {} must be positive", self.horizon));
        }
        if !(self.picard_tol > 0.0) || !(self.dt > 0.0) || !(self.smallness > 0.0) {
            return bad("tolerances, dt and smallness must be positive".into());
        }
        if self.nodes < 2 {
            return bad(format!("need at least 2 time nodes, got {}", self.nodes));
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter must be positive".into());
        }
        if self.m_max > SOLVER_CAP || self.n_max > SOLVER_CAP {
            return bad(format!("truncation ({}, {}) exceeds the solver cap {SOLVER_CAP}", self.m_max, self.n_max));
        }
        Ok(())
    }

    pub fn lambda_max(&self) -> f64 {
        (self.m_max * self.m_max + self.n_max * self.n_max + self.n_max) as f64
    }
}

/// Snapshots of a solve with their conserved quantities.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, u: SpectralField, inv: Invariants) {
        self.times.push(t);
        self.snapshots.push(u);
        self.mass.push(inv.mass);
        self.energy.push(inv.energy);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SpectralField> {
        self.snapshots.last()
    }

    /// max |q(t) − q(0)| / |q(0)| over the series (absolute when q(0) = 0).
    pub fn relative_drift(series: &[f64]) -> f64 {
        let Some(&q0) = series.first() else { return 0.0 };
        let scale = if q0 != 0.0 { q0.abs() } else { 1.0 };
        series.iter().map(|q| (q - q0).abs() / scale).fold(0.0, f64::max)
    }

    /// Rows `t,mass,energy,h1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mass,energy,h1\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.times[i],
                self.mass[i],
                self.energy[i],
                self.snapshots[i].sobolev_norm(1.0).value
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub mass: f64,
    pub energy: f64,
}

/// Pseudo-spectral evaluation of quintic expressions for fields with fixed caps.
///
/// The grid has ⌈6m_max+1⌉ θ nodes, 3n_max+1 Gauss nodes and ⌈6n_max+1⌉ φ nodes, so
/// sextic integrands are integrated exactly and quintic products are analyzed back to
/// the caps without aliasing.
pub struct QuinticModel {
    transform: SpaceTransform,
}

impl QuinticModel {
    pub fn new(m_max: usize, n_max: usize) -> Result<Self> {
        let n_theta = good_size(6 * m_max + 1);
        let grid = SphereGrid::new(3 * n_max + 1, good_size(6 * n_max + 1));
        Ok(QuinticModel { transform: SpaceTransform::new(m_max, n_max, n_theta, grid)? })
    }

    pub fn caps(&self) -> (usize, usize) {
        self.transform.caps()
    }

    fn fit(&self, u: &SpectralField) -> Result<SpectralField> {
        let (m, n) = self.caps();
        if u.m_max() > m || u.n_max() > n {
            return Err(Error::Resolution(format!(
                "field caps ({}, {}) exceed the model caps ({m}, {n})",
                u.m_max(),
                u.n_max()
            )));
        }
        if (u.m_max(), u.n_max()) == (m, n) {
            Ok(u.clone())
        } else {
            u.resized(m, n)
        }
    }

    pub fn to_grid(&mut self, u: &SpectralField) -> Result<GridField> {
        self.transform.synthesize(u)
    }

    pub fn from_grid(&mut self, values: &[Complex64]) -> Result<SpectralField> {
        self.transform.analyze_values(values)
    }

    /// P(|u|⁴u), returned at the model caps.
    pub fn nonlinearity(&mut self, u: &SpectralField) -> Result<SpectralField> {
        let mut g = self.to_grid(u)?;
        g.values.iter_mut().for_each(|v| *v *= v.norm_sqr() * v.norm_sqr());
        self.from_grid(&g.values)
    }

    /// P(q(u₁, …)) for a pointwise expression q of the grid values of several fields.
    pub fn pointwise<F>(&mut self, fields: &[&SpectralField], q: F) -> Result<SpectralField>
    where
        F: Fn(&[Complex64]) -> Complex64,
    {
        let grids: Vec<GridField> = fields.iter().map(|f| self.to_grid(f)).collect::<Result<_>>()?;
        let len = grids.first().map_or(0, |g| g.values.len());
        let mut args = vec![Complex64::default(); fields.len()];
        let values: Vec<Complex64> = (0..len)
            .map(|k| {
                for (a, g) in args.iter_mut().zip(&grids) {
                    *a = g.values[k];
                }
                q(&args)
            })
            .collect();
        self.from_grid(&values)
    }

    /// ∫_M |u|⁶, exact for fields within the caps.
    pub fn sextic_integral(&mut self, u: &SpectralField) -> Result<f64> {
        Ok(self.to_grid(u)?.integrate_abs_pow(6.0))
    }

    pub fn invariants(&mut self, u: &SpectralField, sign: Sign) -> Result<Invariants> {
        let u = self.fit(u)?;
        let mass = u.norm().powi(2);
        let gradient: f64 = u
            .entries()
            .map(|(m, n, _, c)| ((m * m) as f64 + (n * n + n) as f64) * c.norm_sqr())
            .sum();
        let energy = 0.5 * gradient + sign.sigma() / 6.0 * self.sextic_integral(&u)?;
        Ok(Invariants { mass, energy })
    }

    /// u ↦ P(e^{−iσ·dt·|u|⁴}u), the exact flow of u̇ = −iσ|u|⁴u over dt followed by
    /// projection onto the caps.
    pub fn phase_rotation(&mut self, u: &SpectralField, sigma_dt: f64) -> Result<SpectralField> {
        let mut g = self.to_grid(u)?;
        g.values
            .iter_mut()
            .for_each(|v| *v *= Complex64::from_polar(1.0, -sigma_dt * v.norm_sqr() * v.norm_sqr()));
        self.from_grid(&g.values)
    }
}

/// P(|u|⁴u) on a fresh dealiased model at the field's caps.
pub fn nonlinearity(u: &SpectralField) -> Result<SpectralField> {
    QuinticModel::new(u.m_max(), u.n_max())?.nonlinearity(u)
}

/// (mass, energy) of u.
pub fn invariants_of(u: &SpectralField, sign: Sign) -> Result<Invariants> {
    QuinticModel::new(u.m_max(), u.n_max())?.invariants(u, sign)
}

/// i.i.d. Gaussian coefficients on every slot, scaled to ‖u₀‖_{H¹} = amp.
pub fn gaussian_data<R: rand::Rng>(rng: &mut R, m_max: usize, n_max: usize, amp: f64) -> Result<SpectralField> {
    let mut u = crate::field::random_field(rng, m_max, n_max)?;
    let h1 = u.sobolev_norm(1.0).value;
    u.scale(Complex64::new(amp / h1, 0.0));
    Ok(u)
}

/// sup over a list of fields of the H¹ norm of their pairwise differences.
pub(crate) fn sup_h1_distance(a: &[SpectralField], b: &[SpectralField]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut d = x.clone();
            d.axpy(Complex64::new(-1.0, 0.0), y);
            d.sobolev_norm(1.0).value
        })
        .fold(0.0, f64::max)
}
