//! Functions on M = S¹×S² in the basis ê_m(θ)·Y_n^j(ω), ê_m = e^{imθ}/√(2π).

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::harmonics::{sphere_index, sphere_len, SphereGrid};
use crate::legendre::LegendreTable;
use crate::rng;
use crate::spectrum::{self, in_block, japanese_bracket, INDEX_CAP};

const MAX_DENSE_LEN: usize = 1 << 28;

/// Dense coefficient array over |m| ≤ m_max, 0 ≤ n ≤ n_max, |j| ≤ n.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    m_max: usize,
    n_max: usize,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorm {
    pub s: f64,
    pub value: f64,
}

impl SpectralField {
    pub fn zeros(m_max: usize, n_max: usize) -> Result<Self> {
        if m_max as i64 > INDEX_CAP || n_max as i64 > INDEX_CAP {
            return Err(Error::Overflow { m: m_max as i64, n: n_max as i64, cap: INDEX_CAP });
        }
        let len = (2 * m_max + 1)
            .checked_mul(sphere_len(n_max))
            .filter(|&l| l <= MAX_DENSE_LEN)
            .ok_or_else(|| Error::InvalidParameter(format!("caps ({m_max}, {n_max}) too large for dense storage")))?;
        Ok(SpectralField { m_max, n_max, coeffs: vec![Complex64::default(); len] })
    }

    /// Zero field sized to hold the dyadic block N.
    pub fn for_block(block: u64) -> Result<Self> {
        let cap = 2 * block as usize - 1;
        SpectralField::zeros(cap, cap)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn offset(&self, m: i64, n: usize, j: i64) -> Option<usize> {
        if m.unsigned_abs() as usize > self.m_max || n > self.n_max || j.unsigned_abs() as usize > n {
            return None;
        }
        Some((m + self.m_max as i64) as usize * sphere_len(self.n_max) + sphere_index(n, j))
    }

    pub fn get(&self, m: i64, n: usize, j: i64) -> Complex64 {
        self.offset(m, n, j).map_or(Complex64::default(), |k| self.coeffs[k])
    }

    pub fn set(&mut self, m: i64, n: usize, j: i64, c: Complex64) -> Result<()> {
        let k = self
            .offset(m, n, j)
            .ok_or_else(|| Error::InvalidParameter(format!("key ({m}, {n}, {j}) outside caps ({}, {})", self.m_max, self.n_max)))?;
        self.coeffs[k] = c;
        Ok(())
    }

    /// All stored (m, n, j, c), zero or not.
    pub fn entries(&self) -> impl Iterator<Item = (i64, usize, i64, Complex64)> + '_ {
        let per_m = sphere_len(self.n_max);
        let mm = self.m_max as i64;
        self.coeffs.iter().enumerate().map(move |(k, &c)| {
            let m = (k / per_m) as i64 - mm;
            let r = k % per_m;
            let n = (r as f64).sqrt() as usize;
            let n = if (n + 1) * (n + 1) <= r { n + 1 } else if n * n > r { n - 1 } else { n };
            (m, n, r as i64 - (n * n + n) as i64, c)
        })
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (i64, usize, i64, Complex64)> + '_ {
        self.entries().filter(|e| e.3 != Complex64::default())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sobolev_norm(&self, s: f64) -> SobolevNorm {
        let v: f64 = self
            .entries()
            .map(|(m, n, _, c)| japanese_bracket(lambda(m, n)).powf(s) * c.norm_sqr())
            .sum();
        SobolevNorm { s, value: v.sqrt() }
    }

    /// P_N f: keeps the coefficients whose mode lies in the dyadic block N.
    pub fn project_dyadic(&self, block: u64) -> Result<Self> {
        if !spectrum::is_dyadic(block) {
            return Err(Error::InvalidParameter(format!("{block} is not a dyadic number")));
        }
        let mut out = self.clone();
        for (k, (m, n, _, _)) in self.entries().enumerate() {
            if !in_block((m * m) as u64 + (n * n + n) as u64, block) {
                out.coeffs[k] = Complex64::default();
            }
        }
        Ok(out)
    }

    /// e^{itΔ}f: each coefficient times e^{−iλt}.
    pub fn free_propagate(&self, t: f64) -> Self {
        let mut out = self.clone();
        let per_m = sphere_len(self.n_max);
        for (mi, chunk) in out.coeffs.chunks_mut(per_m).enumerate() {
            let m = mi as i64 - self.m_max as i64;
            for n in 0..=self.n_max {
                let lam = ((m * m) as u64 + (n * n + n) as u64) as f64;
                // reduce the integer phase before multiplying by t to keep λt accurate
                let phase = Complex64::from_polar(1.0, -(lam * t).rem_euclid(2.0 * PI));
                for c in &mut chunk[n * n..(n + 1) * (n + 1)] {
                    *c *= phase;
                }
            }
        }
        out
    }

    pub fn scale(&mut self, a: Complex64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// self + a·other on a common support; caps must agree.
    pub fn axpy(&mut self, a: Complex64, other: &SpectralField) {
        assert_eq!((self.m_max, self.n_max), (other.m_max, other.n_max));
        self.coeffs.iter_mut().zip(&other.coeffs).for_each(|(x, y)| *x += a * y);
    }

    /// Copy into a field with different caps, dropping what does not fit.
    pub fn resized(&self, m_max: usize, n_max: usize) -> Result<Self> {
        let mut out = SpectralField::zeros(m_max, n_max)?;
        for (m, n, j, c) in self.iter_nonzero() {
            if let Some(k) = out.offset(m, n, j) {
                out.coeffs[k] = c;
            }
        }
        Ok(out)
    }

    /// Largest eigenvalue among the stored slots.
    pub fn lambda_cap(&self) -> f64 {
        lambda(self.m_max as i64, self.n_max)
    }

    /// Largest eigenvalue carrying a nonzero coefficient.
    pub fn lambda_support(&self) -> f64 {
        self.iter_nonzero().map(|(m, n, _, _)| lambda(m, n)).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,n,j,re,im\n");
        for (m, n, j, c) in self.iter_nonzero() {
            let _ = writeln!(s, "{m},{n},{j},{:.17e},{:.17e}", c.re, c.im);
        }
        s
    }

    /// Reads the `m,n,j,re,im` form; caps are the smallest that hold every row.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (ln == 0 && line.starts_with('m')) {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields", ln + 1)));
            }
            let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("line {}: {e}", ln + 1));
            let m: i64 = f[0].trim().parse().map_err(|e| bad(&e))?;
            let n: usize = f[1].trim().parse().map_err(|e| bad(&e))?;
            let j: i64 = f[2].trim().parse().map_err(|e| bad(&e))?;
            let re: f64 = f[3].trim().parse().map_err(|e| bad(&e))?;
            let im: f64 = f[4].trim().parse().map_err(|e| bad(&e))?;
            if j.unsigned_abs() as usize > n {
                return Err(bad(&"order exceeds degree"));
            }
            rows.push((m, n, j, Complex64::new(re, im)));
        }
        let m_max = rows.iter().map(|r| r.0.unsigned_abs() as usize).max().unwrap_or(0);
        let n_max = rows.iter().map(|r| r.1).max().unwrap_or(0);
        let mut out = SpectralField::zeros(m_max, n_max)?;
        for (m, n, j, c) in rows {
            out.set(m, n, j, c)?;
        }
        Ok(out)
    }
}

fn lambda(m: i64, n: usize) -> f64 {
    ((m * m) as u64 + (n * n + n) as u64) as f64
}

/// Unit-norm field with i.i.d. complex Gaussian coefficients on every (m, n, j) of block N.
pub fn random_block_field<R: Rng>(rng: &mut R, block: u64) -> Result<SpectralField> {
    let mut f = SpectralField::for_block(block)?;
    for mode in spectrum::dyadic_block(block)? {
        let n = mode.n as usize;
        for j in -mode.n..=mode.n {
            f.set(mode.m, n, j, rng::complex_gaussian(rng))?;
        }
    }
    let nrm = f.norm();
    f.scale(Complex64::new(1.0 / nrm, 0.0));
    Ok(f)
}

/// Field with i.i.d. complex Gaussian coefficients on every slot (not normalized).
pub fn random_field<R: Rng>(rng: &mut R, m_max: usize, n_max: usize) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(m_max, n_max)?;
    f.coeffs.iter_mut().for_each(|c| *c = rng::complex_gaussian(rng));
    Ok(f)
}

/// Point values on n_theta equispaced θ nodes × a sphere grid, laid out (θ, μ, φ).
#[derive(Debug, Clone)]
pub struct GridField {
    pub n_theta: usize,
    pub grid: SphereGrid,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn shape(&self) -> [usize; 3] {
        [self.n_theta, self.grid.n_mu, self.grid.n_phi]
    }

    /// Quadrature weight of the node with flat index k.
    pub fn weight(&self, k: usize) -> f64 {
        let imu = (k / self.grid.n_phi) % self.grid.n_mu;
        self.grid.point_weight(imu) * 2.0 * PI / self.n_theta as f64
    }

    /// ∫_M |f|^p by quadrature.
    pub fn integrate_abs_pow(&self, p: f64) -> f64 {
        self.values.iter().enumerate().map(|(k, v)| self.weight(k) * v.norm().powf(p)).sum()
    }
}

fn check_grid(n_theta: usize, grid: &SphereGrid, m_max: usize, n_max: usize) -> Result<()> {
    if n_theta < 2 * m_max + 1 {
        return Err(Error::Resolution(format!("n_theta = {n_theta} cannot resolve |m| ≤ {m_max}")));
    }
    grid.check_supports(n_max)
}

/// Synthesis and analysis between fields with fixed caps and one grid, with the
/// Legendre table and FFT plans computed once.
pub struct SpaceTransform {
    m_max: usize,
    n_max: usize,
    n_theta: usize,
    grid: SphereGrid,
    table: LegendreTable,
    inverse: Fft3,
    forward: Fft3,
}

impl SpaceTransform {
    pub fn new(m_max: usize, n_max: usize, n_theta: usize, grid: SphereGrid) -> Result<Self> {
        check_grid(n_theta, &grid, m_max, n_max)?;
        let shape = [n_theta, grid.n_mu, grid.n_phi];
        Ok(SpaceTransform {
            m_max,
            n_max,
            n_theta,
            table: LegendreTable::new(n_max, &grid.mu),
            grid,
            inverse: Fft3::new(shape, FftDirection::Inverse),
            forward: Fft3::new(shape, FftDirection::Forward),
        })
    }

    pub fn caps(&self) -> (usize, usize) {
        (self.m_max, self.n_max)
    }

    pub fn grid(&self) -> (usize, &SphereGrid) {
        (self.n_theta, &self.grid)
    }

    pub fn synthesize(&mut self, f: &SpectralField) -> Result<GridField> {
        if f.m_max > self.m_max || f.n_max > self.n_max {
            return Err(Error::Resolution(format!(
                "field caps ({}, {}) exceed transform caps ({}, {})",
                f.m_max, f.n_max, self.m_max, self.n_max
            )));
        }
        let (nt, nmu, np) = (self.n_theta, self.grid.n_mu, self.grid.n_phi);
        let per_m = sphere_len(f.n_max);
        let norm = 1.0 / (2.0 * PI).sqrt();
        let mut values = vec![Complex64::default(); nt * nmu * np];
        for (mi, chunk) in f.coeffs.chunks(per_m).enumerate() {
            if chunk.iter().all(|c| *c == Complex64::default()) {
                continue;
            }
            let m = mi as i64 - f.m_max as i64;
            let it = m.rem_euclid(nt as i64) as usize;
            for (imu, col) in self.table.columns.iter().enumerate() {
                let row = &mut values[(it * nmu + imu) * np..(it * nmu + imu + 1) * np];
                for n in 0..=f.n_max {
                    for j in -(n as i64)..=n as i64 {
                        let c = chunk[sphere_index(n, j)];
                        if c != Complex64::default() {
                            row[j.rem_euclid(np as i64) as usize] += c * (col.get(n, j) * norm);
                        }
                    }
                }
            }
        }
        self.inverse.process_axes(&mut values, [true, false, true]);
        Ok(GridField { n_theta: nt, grid: self.grid.clone(), values })
    }

    /// Coefficients of grid values, truncated to the transform caps.
    pub fn analyze_values(&mut self, values: &[Complex64]) -> Result<SpectralField> {
        let (nt, nmu, np) = (self.n_theta, self.grid.n_mu, self.grid.n_phi);
        if values.len() != nt * nmu * np {
            return Err(Error::InvalidParameter("grid values do not match the transform grid".into()));
        }
        let mut buf = values.to_vec();
        self.forward.process_axes(&mut buf, [true, false, true]);
        let mut out = SpectralField::zeros(self.m_max, self.n_max)?;
        let per_m = sphere_len(self.n_max);
        let scale = (2.0 * PI / nt as f64) * (2.0 * PI / np as f64) / (2.0 * PI).sqrt();
        let (m_max, n_max, table, grid) = (self.m_max, self.n_max, &self.table, &self.grid);
        out.coeffs.chunks_mut(per_m).enumerate().for_each(|(mi, chunk)| {
            let m = mi as i64 - m_max as i64;
            let it = m.rem_euclid(nt as i64) as usize;
            for (imu, col) in table.columns.iter().enumerate() {
                let w = grid.mu_weights[imu] * scale;
                let row = &buf[(it * nmu + imu) * np..(it * nmu + imu + 1) * np];
                for n in 0..=n_max {
                    for j in -(n as i64)..=n as i64 {
                        chunk[sphere_index(n, j)] += row[j.rem_euclid(np as i64) as usize] * (w * col.get(n, j));
                    }
                }
            }
        });
        Ok(out)
    }

    pub fn analyze(&mut self, g: &GridField) -> Result<SpectralField> {
        self.analyze_values(&g.values)
    }
}

/// Grid values of f.
pub fn synthesize(f: &SpectralField, n_theta: usize, grid: &SphereGrid) -> Result<GridField> {
    SpaceTransform::new(f.m_max, f.n_max, n_theta, grid.clone())?.synthesize(f)
}

/// Quadrature inner products with every ê_m Y_n^j inside the caps.
pub fn analyze(g: &GridField, m_max: usize, n_max: usize) -> Result<SpectralField> {
    SpaceTransform::new(m_max, n_max, g.n_theta, g.grid.clone())?.analyze(g)
}

/// Grid on which |f|^p is integrated exactly for even p and band-limited f.
pub fn power_grid(m_max: usize, n_max: usize, p: f64) -> (usize, SphereGrid) {
    let k = p.ceil().max(2.0) as usize;
    let n_theta = k * m_max + 1;
    (n_theta, SphereGrid::for_integrand_degree(k * n_max))
}

/// Temporal samples over τ₀ = [0, 8π] needed for the trapezoid rule to integrate |f(t)|^p
/// exactly when p is even and every frequency of f lies in [0, band]: the integrand's
/// frequencies are bounded by ⌈p/2⌉·band, and 8π/K-spaced nodes resolve |ω| < K/4.
pub fn required_time_samples(p: f64, band: f64) -> usize {
    4 * ((p / 2.0).ceil() * band).ceil() as usize + 1
}

/// Default sample count: four times the requirement.
pub fn default_time_samples(p: f64, band: f64) -> usize {
    4 * required_time_samples(p, band)
}

/// ‖f‖_{L^p(τ₀×M)} with τ₀ = [0, 8π]: trapezoid in t on `t_samples` nodes, exact
/// quadrature in space. `band` bounds the temporal frequencies of f.
pub fn lp_norm_spacetime<F>(f: F, p: f64, t_samples: usize, band: f64) -> Result<f64>
where
    F: Fn(f64) -> SpectralField + Sync,
{
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    let required = required_time_samples(p, band);
    if t_samples < required {
        return Err(Error::UnderResolvedTime { samples: t_samples, required });
    }
    let dt = 8.0 * PI / t_samples as f64;
    let first = f(0.0);
    let (n_theta, grid) = power_grid(first.m_max, first.n_max, p);
    let total: Result<f64> = (0..t_samples)
        .into_par_iter()
        .map(|k| {
            let fk = if k == 0 { first.clone() } else { f(k as f64 * dt) };
            Ok(synthesize(&fk, n_theta, &grid)?.integrate_abs_pow(p))
        })
        .sum();
    Ok((total? * dt).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dyadic_projection_of_constant_mode() {
        let mut f = SpectralField::zeros(3, 3).unwrap();
        f.set(0, 0, 0, Complex64::new(2.0, 1.0)).unwrap();
        assert_eq!(f.project_dyadic(1).unwrap(), f);
        for n in [2, 4, 8] {
            assert_eq!(f.project_dyadic(n).unwrap().norm(), 0.0);
        }
        assert!(f.project_dyadic(3).is_err());
    }

    #[test]
    fn dyadic_pieces_are_orthogonal_and_complete() {
        let mut rng = rng::stream(3, 0);
        let f = random_field(&mut rng, 16, 16).unwrap();
        let blocks = [1, 2, 4, 8, 16, 32];
        let sum: f64 = blocks.iter().map(|&b| f.project_dyadic(b).unwrap().norm().powi(2)).sum();
        assert!((sum - f.norm().powi(2)).abs() < 1e-12 * sum);
        let mut acc = SpectralField::zeros(16, 16).unwrap();
        for &b in &blocks {
            acc.axpy(Complex64::new(1.0, 0.0), &f.project_dyadic(b).unwrap());
        }
        assert_eq!(acc, f);
        let pp = f.project_dyadic(4).unwrap().project_dyadic(8).unwrap();
        assert_eq!(pp.norm(), 0.0);
    }

    #[test]
    fn h1_matches_dyadic_sum() {
        let mut rng = rng::stream(4, 0);
        for _ in 0..100 {
            let f = random_field(&mut rng, 12, 12).unwrap();
            let h1 = f.sobolev_norm(1.0).value.powi(2);
            let dy: f64 = [1u64, 2, 4, 8, 16]
                .iter()
                .map(|&b| (b * b) as f64 * f.project_dyadic(b).unwrap().norm().powi(2))
                .sum();
            let r = h1 / dy;
            assert!((0.25..=4.0).contains(&r), "{r}");
        }
    }

    #[test]
    fn propagator_phases() {
        let mut rng = rng::stream(5, 0);
        let f = random_field(&mut rng, 4, 4).unwrap();
        assert_eq!(f.free_propagate(0.0), f);
        let g = f.free_propagate(2.0 * PI);
        for (a, b) in f.coeffs.iter().zip(&g.coeffs) {
            assert!(close(*a, *b, 1e-12 * a.norm().max(1.0)));
        }
        let mut e = SpectralField::zeros(1, 1).unwrap();
        e.set(1, 1, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(close(e.free_propagate(PI / 3.0).get(1, 1, 0), Complex64::new(-1.0, 0.0), 1e-14));
        let (s, t) = (0.37, 1.91);
        let a = f.free_propagate(s).free_propagate(t);
        let b = f.free_propagate(s + t);
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!(close(*x, *y, 1e-12 * x.norm().max(1.0)));
        }
        assert!((f.free_propagate(123.4).norm() - f.norm()).abs() < 1e-12 * f.norm());
    }

    #[test]
    fn constant_field_grid_value() {
        let mut f = SpectralField::zeros(0, 0).unwrap();
        let c = Complex64::new(0.3, -1.2);
        f.set(0, 0, 0, c).unwrap();
        let g = synthesize(&f, 3, &SphereGrid::new(2, 3)).unwrap();
        for v in g.values {
            assert!(close(v, c / (8.0 * PI * PI).sqrt(), 1e-15));
        }
    }

    #[test]
    fn grid_round_trip_and_parseval() {
        let mut rng = rng::stream(6, 0);
        let f = random_field(&mut rng, 7, 9).unwrap();
        let grid = SphereGrid::new(10, 19);
        let g = synthesize(&f, 15, &grid).unwrap();
        let back = analyze(&g, 7, 9).unwrap();
        let err = f.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        let q = g.integrate_abs_pow(2.0);
        assert!((q - f.norm().powi(2)).abs() < 1e-10 * q);
        assert!(matches!(synthesize(&f, 14, &grid), Err(Error::Resolution(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = rng::stream(7, 0);
        let f = random_block_field(&mut rng, 2).unwrap();
        let g = SpectralField::from_csv(&f.to_csv()).unwrap();
        for (m, n, j, c) in f.iter_nonzero() {
            assert_eq!(g.get(m, n, j), c);
        }
        assert!((g.norm() - 1.0).abs() < 1e-14);
        assert!(SpectralField::from_csv("m,n,j,re,im\n0,1,2,0,0\n").is_err());
    }

    #[test]
    fn spacetime_norms_of_simple_fields() {
        let mut f = SpectralField::zeros(0, 0).unwrap();
        f.set(0, 0, 0, Complex64::new(1.0, 0.0)).unwrap();
        let l2 = lp_norm_spacetime(|_| f.clone(), 2.0, 8, 0.0).unwrap();
        assert!((l2 - (8.0 * PI).sqrt()).abs() < 1e-12);
        let l6 = lp_norm_spacetime(|_| f.clone(), 6.0, 8, 0.0).unwrap();
        let exact = (64.0 * PI.powi(3) * (8.0 * PI * PI).powi(-3)).powf(1.0 / 6.0);
        assert!((l6 - exact).abs() < 1e-12 * exact);

        let mut e = SpectralField::zeros(2, 3).unwrap();
        let c = Complex64::new(0.6, 0.8) * 1.5;
        e.set(-2, 3, 1, c).unwrap();
        let band = e.lambda_support();
        let l2 = lp_norm_spacetime(|t| e.free_propagate(t), 2.0, required_time_samples(2.0, band), band).unwrap();
        assert!((l2 - (8.0 * PI).sqrt() * 1.5).abs() < 1e-12);
        assert!(matches!(
            lp_norm_spacetime(|t| e.free_propagate(t), 4.0, 10, band),
            Err(Error::UnderResolvedTime { .. })
        ));
    }

    #[test]
    fn entries_decode_keys() {
        let f = SpectralField::zeros(2, 3).unwrap();
        for (k, (m, n, j, _)) in f.entries().enumerate() {
            assert_eq!(f.offset(m, n, j), Some(k));
        }
    }
}
