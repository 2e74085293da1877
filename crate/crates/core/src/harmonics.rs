//! Spherical harmonics on S², Gauss–Legendre × equispaced grids and dense transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftDirection;

use crate::ascent::{self, QuadraticInEach};
use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::legendre::LegendreTable;
use crate::quadrature::GaussLegendre;
use crate::report::{EstimateId, EstimateReport};
use crate::rng;
use crate::spectrum::japanese_bracket;

/// Degree n and order j of Y_n^j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicIndex {
    pub n: usize,
    pub j: i64,
}

impl HarmonicIndex {
    pub fn new(n: usize, j: i64) -> Result<Self> {
        if j.unsigned_abs() as usize > n {
            return Err(Error::InvalidParameter(format!("order {j} exceeds degree {n}")));
        }
        Ok(HarmonicIndex { n, j })
    }

    /// Position in degree-major storage: n² + n + j.
    pub fn flat(self) -> usize {
        sphere_index(self.n, self.j)
    }
}

/// Number of (n, j) pairs with n ≤ n_max.
pub fn sphere_len(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 1)
}

#[inline]
pub fn sphere_index(n: usize, j: i64) -> usize {
    ((n * n + n) as i64 + j) as usize
}

/// Tensor quadrature grid: Gauss–Legendre in μ = cos(polar angle), equispaced in φ.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n_mu: usize,
    pub n_phi: usize,
    pub mu: Vec<f64>,
    pub mu_weights: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_mu: usize, n_phi: usize) -> Self {
        let gl = GaussLegendre::new(n_mu.max(1));
        SphereGrid {
            n_mu: n_mu.max(1),
            n_phi: n_phi.max(1),
            mu: gl.nodes,
            mu_weights: gl.weights,
            phi: (0..n_phi.max(1)).map(|k| 2.0 * PI * k as f64 / n_phi.max(1) as f64).collect(),
        }
    }

    /// Smallest grid that integrates every spherical polynomial of degree ≤ `degree` exactly.
    pub fn for_integrand_degree(degree: usize) -> Self {
        SphereGrid::new(degree / 2 + 1, degree + 1)
    }

    pub fn len(&self) -> usize {
        self.n_mu * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point weight w_μ·2π/n_φ; these sum to 4π.
    pub fn point_weight(&self, imu: usize) -> f64 {
        self.mu_weights[imu] * 2.0 * PI / self.n_phi as f64
    }

    /// Exactness degree in μ (2 n_mu − 1) and in φ (n_phi − 1).
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_mu - 1).min(self.n_phi - 1)
    }

    /// Checks that harmonics of degree ≤ n_max are resolved and distinguishable.
    pub fn check_supports(&self, n_max: usize) -> Result<()> {
        if self.n_mu < n_max + 1 || self.n_phi < 2 * n_max + 1 {
            return Err(Error::Resolution(format!(
                "sphere grid {}x{} cannot resolve degree {n_max} (needs n_mu ≥ {}, n_phi ≥ {})",
                self.n_mu,
                self.n_phi,
                n_max + 1,
                2 * n_max + 1
            )));
        }
        Ok(())
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        (0..self.n_mu)
            .map(|i| self.point_weight(i) * values[i * self.n_phi..(i + 1) * self.n_phi].iter().sum::<f64>())
            .sum()
    }
}

/// Point values of the orthonormal harmonic Y_n^j on the grid, row-major in (μ, φ).
pub fn sph_harm_eval(idx: HarmonicIndex, grid: &SphereGrid) -> Result<Vec<Complex64>> {
    grid.check_supports(idx.n)?;
    let table = LegendreTable::new(idx.n, &grid.mu);
    let mut out = Vec::with_capacity(grid.len());
    for col in &table.columns {
        let p = col.get(idx.n, idx.j);
        out.extend(grid.phi.iter().map(|&phi| Complex64::from_polar(p, idx.j as f64 * phi)));
    }
    Ok(out)
}

/// Grid values from coefficients c_{n,j} (degree-major, n ≤ n_max).
pub fn sphere_synthesis(coeffs: &[Complex64], n_max: usize, grid: &SphereGrid) -> Result<Vec<Complex64>> {
    debug_assert_eq!(coeffs.len(), sphere_len(n_max));
    if grid.n_mu < n_max + 1 && n_max > 0 {
        return Err(Error::Resolution(format!("sphere grid too coarse for degree {n_max}")));
    }
    let table = LegendreTable::new(n_max, &grid.mu);
    let np = grid.n_phi;
    let mut out = vec![Complex64::default(); grid.len()];
    for (imu, col) in table.columns.iter().enumerate() {
        let row = &mut out[imu * np..(imu + 1) * np];
        for j in -(n_max as i64)..=n_max as i64 {
            let mut s = Complex64::default();
            for n in j.unsigned_abs() as usize..=n_max {
                s += coeffs[sphere_index(n, j)] * col.get(n, j);
            }
            row[j.rem_euclid(np as i64) as usize] += s;
        }
    }
    Fft3::new([1, grid.n_mu, np], FftDirection::Inverse).process_axes(&mut out, [false, false, true]);
    Ok(out)
}

/// Quadrature inner products with every Y_n^j, n ≤ n_max.
pub fn sphere_analysis(values: &[Complex64], n_max: usize, grid: &SphereGrid) -> Result<Vec<Complex64>> {
    grid.check_supports(n_max)?;
    let np = grid.n_phi;
    let mut buf = values.to_vec();
    Fft3::new([1, grid.n_mu, np], FftDirection::Forward).process_axes(&mut buf, [false, false, true]);
    let table = LegendreTable::new(n_max, &grid.mu);
    let mut coeffs = vec![Complex64::default(); sphere_len(n_max)];
    for (imu, col) in table.columns.iter().enumerate() {
        let w = grid.point_weight(imu);
        let row = &buf[imu * np..(imu + 1) * np];
        for j in -(n_max as i64)..=n_max as i64 {
            let fj = row[j.rem_euclid(np as i64) as usize] * w;
            for n in j.unsigned_abs() as usize..=n_max {
                coeffs[sphere_index(n, j)] += fj * col.get(n, j);
            }
        }
    }
    Ok(coeffs)
}

/// Unit vector in the degree-n eigenspace: i.i.d. standard complex Gaussians over the
/// 2n+1 orders, normalized.
pub fn random_eigenspace<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..2 * n + 1).map(|_| rng::complex_gaussian(rng)).collect();
    ascent::normalize(&mut v);
    v
}

fn embed_degree(n: usize, orders: &[Complex64], n_max: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::default(); sphere_len(n_max)];
    for (k, v) in orders.iter().enumerate() {
        c[sphere_index(n, k as i64 - n as i64)] = *v;
    }
    c
}

/// ‖f₁ f₂ f₃‖_{L²(S²)} for eigenspace components of degrees `degrees`.
struct ClusterForm {
    degrees: [usize; 3],
    grid: SphereGrid,
}

impl ClusterForm {
    fn new(degrees: [usize; 3]) -> Self {
        let total: usize = degrees.iter().sum();
        ClusterForm { degrees, grid: SphereGrid::for_integrand_degree(2 * total) }
    }

    fn grids(&self, x: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        (0..3)
            .map(|i| {
                let n = self.degrees[i];
                sphere_synthesis(&embed_degree(n, &x[i], n), n, &self.grid)
            })
            .collect()
    }

    fn integrate_sq(&self, values: &[Complex64]) -> f64 {
        (0..self.grid.n_mu)
            .map(|i| {
                self.grid.point_weight(i)
                    * values[i * self.grid.n_phi..(i + 1) * self.grid.n_phi]
                        .iter()
                        .map(|v| v.norm_sqr())
                        .sum::<f64>()
            })
            .sum()
    }
}

impl QuadraticInEach for ClusterForm {
    fn factors(&self) -> usize {
        3
    }

    fn value(&self, x: &[Vec<Complex64>]) -> Result<f64> {
        let g = self.grids(x)?;
        let prod: Vec<Complex64> = (0..self.grid.len()).map(|k| g[0][k] * g[1][k] * g[2][k]).collect();
        Ok(self.integrate_sq(&prod))
    }

    fn value_and_gradient(&self, x: &[Vec<Complex64>], i: usize) -> Result<(f64, Vec<Complex64>)> {
        let g = self.grids(x)?;
        let mut value = 0.0;
        let mut weighted = vec![Complex64::default(); self.grid.len()];
        for (k, w) in weighted.iter_mut().enumerate() {
            let others: f64 = (0..3).filter(|&l| l != i).map(|l| g[l][k].norm_sqr()).product();
            let p = g[0][k] * g[1][k] * g[2][k];
            value += p.norm_sqr() * self.grid.point_weight(k / self.grid.n_phi);
            *w = g[i][k] * others;
        }
        // analysis grid must resolve the degree of |others|²·f_i against Y_{n_i}
        let n = self.degrees[i];
        let coeffs = sphere_analysis(&weighted, n, &self.grid)?;
        let grad = (0..2 * n + 1).map(|k| coeffs[sphere_index(n, k as i64 - n as i64)]).collect();
        Ok((value, grad))
    }
}

/// Extremizer search options shared by the sampled-supremum harnesses.
#[derive(Debug, Clone, Copy)]
pub struct SupSearch {
    pub trials: usize,
    pub seed: u64,
    /// Coordinate-ascent iterations started from the best random trial (0 disables).
    pub ascent_iterations: usize,
}

impl SupSearch {
    pub fn sampling(trials: usize, seed: u64) -> Self {
        SupSearch { trials, seed, ascent_iterations: 0 }
    }

    pub fn refined(trials: usize, seed: u64) -> Self {
        SupSearch { trials, seed, ascent_iterations: 50 }
    }
}

/// Max over random unit eigenspace data of ‖Π_{n1}f₁Π_{n2}f₂Π_{n3}f₃‖ / (⟨n2⟩⟨n3⟩)^{1/4}.
pub fn cluster_trilinear_ratio(degrees: [usize; 3], search: SupSearch) -> Result<EstimateReport> {
    let [n1, n2, n3] = degrees;
    if !(n1 >= n2 && n2 >= n3) {
        return Err(Error::InvalidParameter(format!("need n1 ≥ n2 ≥ n3, got {degrees:?}")));
    }
    let form = ClusterForm::new(degrees);
    let mut rng = rng::stream(search.seed, rng::stream_id(&[n1 as i64, n2 as i64, n3 as i64]));
    let mut best = -1.0f64;
    let mut best_x = Vec::new();
    for _ in 0..search.trials.max(1) {
        let x: Vec<Vec<Complex64>> = degrees.iter().map(|&n| random_eigenspace(&mut rng, n)).collect();
        let v = form.value(&x)?;
        if v > best {
            best = v;
            best_x = x;
        }
    }
    if search.ascent_iterations > 0 {
        best = best.max(ascent::coordinate_ascent(&form, &mut best_x, search.ascent_iterations)?);
    }
    let rhs = (japanese_bracket(n2 as f64) * japanese_bracket(n3 as f64)).powf(0.25);
    Ok(EstimateReport::new(
        EstimateId::Cluster,
        &[("n1", n1 as f64), ("n2", n2 as f64), ("n3", n3 as f64)],
        best.max(0.0).sqrt(),
        rhs,
        search.trials as u64,
        search.seed,
    ))
}

/// ‖f₁f₂f₃‖_{L²(S²)} for given eigenspace coefficient vectors (2n_i+1 entries each).
pub fn cluster_product_norm(degrees: [usize; 3], data: &[Vec<Complex64>; 3]) -> Result<f64> {
    for i in 0..3 {
        if data[i].len() != 2 * degrees[i] + 1 {
            return Err(Error::InvalidParameter("eigenspace vector has wrong length".into()));
        }
    }
    Ok(ClusterForm::new(degrees).value(data)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(grid: &SphereGrid, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        (0..grid.len())
            .map(|k| a[k] * b[k].conj() * grid.point_weight(k / grid.n_phi))
            .sum()
    }

    #[test]
    fn weights_sum_to_area() {
        let g = SphereGrid::new(17, 33);
        let s: f64 = (0..g.n_mu).map(|i| g.point_weight(i) * g.n_phi as f64).sum();
        assert!((s - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
    }

    #[test]
    fn constant_harmonic() {
        let g = SphereGrid::new(3, 5);
        let y = sph_harm_eval(HarmonicIndex::new(0, 0).unwrap(), &g).unwrap();
        for v in y {
            assert!((v - Complex64::new(1.0 / (4.0 * PI).sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn orthonormality_up_to_degree_32() {
        let g = SphereGrid::new(33, 65);
        let idx: Vec<HarmonicIndex> = (0..=32usize)
            .step_by(3)
            .flat_map(|n| [-(n as i64), 0, n as i64 / 2].into_iter().map(move |j| HarmonicIndex { n, j }))
            .collect();
        let vals: Vec<Vec<Complex64>> = idx.iter().map(|&i| sph_harm_eval(i, &g).unwrap()).collect();
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                let ip = gram(&g, &vals[a], &vals[b]);
                let e = if idx[a] == idx[b] { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(e, 0.0)).norm() < 1e-12, "{:?} {:?}", idx[a], idx[b]);
            }
        }
        let y21 = sph_harm_eval(HarmonicIndex::new(2, 1).unwrap(), &g).unwrap();
        assert!((gram(&g, &y21, &y21).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_checks() {
        let g = SphereGrid::new(3, 5);
        assert!(matches!(sph_harm_eval(HarmonicIndex::new(3, 0).unwrap(), &g), Err(Error::Resolution(_))));
        assert!(HarmonicIndex::new(2, 3).is_err());
    }

    #[test]
    fn analysis_picks_single_harmonic() {
        let g = SphereGrid::new(8, 15);
        let y = sph_harm_eval(HarmonicIndex::new(3, -2).unwrap(), &g).unwrap();
        let c = sphere_analysis(&y, 7, &g).unwrap();
        for n in 0..=7usize {
            for j in -(n as i64)..=n as i64 {
                let e = if (n, j) == (3, -2) { 1.0 } else { 0.0 };
                assert!((c[sphere_index(n, j)] - Complex64::new(e, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let n_max = 16;
        let g = SphereGrid::new(n_max + 1, 2 * n_max + 1);
        let mut rng = rng::stream(11, 0);
        let c: Vec<Complex64> = (0..sphere_len(n_max)).map(|_| rng::complex_gaussian(&mut rng)).collect();
        let v = sphere_synthesis(&c, n_max, &g).unwrap();
        let back = sphere_analysis(&v, n_max, &g).unwrap();
        let err = c.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "round trip {err}");
        let l2: f64 = gram(&g, &v, &v).re;
        let s: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        assert!((l2 - s).abs() < 1e-11 * s);
    }

    #[test]
    fn conjugation_keeps_degree() {
        let g = SphereGrid::new(12, 23);
        let mut rng = rng::stream(5, 1);
        let v = random_eigenspace(&mut rng, 6);
        let vals = sphere_synthesis(&embed_degree(6, &v, 6), 6, &g).unwrap();
        let conj: Vec<Complex64> = vals.iter().map(|z| z.conj()).collect();
        let c = sphere_analysis(&conj, 11, &g).unwrap();
        for n in 0..=11usize {
            let e: f64 = (-(n as i64)..=n as i64).map(|j| c[sphere_index(n, j)].norm_sqr()).sum();
            if n == 6 {
                assert!((e - 1.0).abs() < 1e-12);
            } else {
                assert!(e < 1e-24, "degree {n} energy {e}");
            }
        }
    }

    #[test]
    fn constant_cluster_ratio() {
        let r = cluster_trilinear_ratio([0, 0, 0], SupSearch::sampling(3, 1)).unwrap();
        assert!((r.ratio - 1.0 / (4.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn cluster_norm_is_phase_invariant() {
        let mut rng = rng::stream(2, 2);
        let d = [5usize, 3, 2];
        let x = [random_eigenspace(&mut rng, 5), random_eigenspace(&mut rng, 3), random_eigenspace(&mut rng, 2)];
        let a = cluster_product_norm(d, &x).unwrap();
        let ph = Complex64::from_polar(1.0, 0.7);
        let y = [x[0].iter().map(|c| c * ph).collect(), x[1].clone(), x[2].clone()];
        let b = cluster_product_norm(d, &y).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn ascent_does_not_lose_value() {
        let plain = cluster_trilinear_ratio([6, 3, 1], SupSearch::sampling(5, 4)).unwrap();
        let refined = cluster_trilinear_ratio([6, 3, 1], SupSearch::refined(5, 4)).unwrap();
        assert!(refined.lhs >= plain.lhs * (1.0 - 1e-12));
    }
}
