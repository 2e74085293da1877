//! Exact space-time L² norms of products of free evolutions on τ₀×M.
//!
//! Each factor e^{itΔ}φ is a trigonometric polynomial in (t, θ, φ) times Legendre
//! functions in μ. After shifting every factor to its lowest frequency (a unimodular
//! change that leaves |Π u_i| alone) the product lives on a small frequency box, so a
//! uniform grid in (t, θ, φ) and Gauss–Legendre nodes in μ integrate |Π u_i|² exactly.
//! The spectrum is integral, hence everything is 2π-periodic in t and
//! ∫_{[0,8π]} = 4∫_{[0,2π]}.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::ascent::QuadraticInEach;
use crate::error::{Error, Result};
use crate::fft::{good_size, Fft3};
use crate::field::SpectralField;
use crate::legendre::LegendreColumn;
use crate::quadrature::GaussLegendre;

/// Basis label (m, n, j) of ê_m Y_n^j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub m: i64,
    pub n: usize,
    pub j: i64,
}

impl Key {
    pub fn lambda(self) -> i64 {
        self.m * self.m + (self.n * self.n + self.n) as i64
    }
}

/// Nonzero keys of a field with their coefficients.
pub fn support_of(f: &SpectralField) -> (Vec<Key>, Vec<Complex64>) {
    f.iter_nonzero().map(|(m, n, j, c)| (Key { m, n, j }, c)).unzip()
}

#[derive(Debug, Clone)]
struct Slot {
    keys: Vec<Key>,
    bins: Vec<usize>,
    n_max: usize,
}

/// ∫_{τ₀}∫_M |Π_i e^{itΔ}φ_i|² for factors supported on fixed key sets.
///
/// Factors refer to slots; a slot used k times contributes its k-th power.
#[derive(Debug, Clone)]
pub struct ProductForm {
    slots: Vec<Slot>,
    factor_slot: Vec<usize>,
    shape: [usize; 3],
    mu_nodes: Vec<f64>,
    mu_weights: Vec<f64>,
}

impl ProductForm {
    /// One factor per support.
    pub fn new(supports: Vec<Vec<Key>>) -> Result<Self> {
        let n = supports.len();
        ProductForm::with_multiplicity(supports, (0..n).collect())
    }

    /// |u|^{2k} integrand for a single support: the L^{2k} norm to the power 2k.
    pub fn power(support: Vec<Key>, k: usize) -> Result<Self> {
        ProductForm::with_multiplicity(vec![support], vec![0; k])
    }

    pub fn with_multiplicity(supports: Vec<Vec<Key>>, factor_slot: Vec<usize>) -> Result<Self> {
        if factor_slot.is_empty() || supports.iter().any(|s| s.is_empty()) {
            return Err(Error::Empty("product needs nonempty factors".into()));
        }
        let mut lo = Vec::new();
        let mut spread = [0usize; 3];
        let mut n_sum = 0;
        for keys in &supports {
            let freq = |k: &Key| [-k.lambda(), k.m, k.j];
            let mut l = freq(&keys[0]);
            let mut h = l;
            for k in keys {
                let f = freq(k);
                for a in 0..3 {
                    l[a] = l[a].min(f[a]);
                    h[a] = h[a].max(f[a]);
                }
            }
            lo.push((l, h));
        }
        for &s in &factor_slot {
            let (l, h) = lo[s];
            for a in 0..3 {
                spread[a] += (h[a] - l[a]) as usize;
            }
            n_sum += supports[s].iter().map(|k| k.n).max().unwrap_or(0);
        }
        let shape = [good_size(spread[0] + 1), good_size(spread[1] + 1), good_size(spread[2] + 1)];
        let slots = supports
            .into_iter()
            .zip(&lo)
            .map(|(keys, (l, _))| {
                let bins = keys
                    .iter()
                    .map(|k| {
                        let b = [(-k.lambda() - l[0]) as usize, (k.m - l[1]) as usize, (k.j - l[2]) as usize];
                        (b[0] * shape[1] + b[1]) * shape[2] + b[2]
                    })
                    .collect();
                let n_max = keys.iter().map(|k| k.n).max().unwrap_or(0);
                Slot { keys, bins, n_max }
            })
            .collect();
        let gl = GaussLegendre::new(n_sum + 1);
        Ok(ProductForm { slots, factor_slot, shape, mu_nodes: gl.nodes, mu_weights: gl.weights })
    }

    /// Space-time grid size in (t, θ, φ) per μ node, and the μ node count.
    pub fn grid(&self) -> ([usize; 3], usize) {
        (self.shape, self.mu_nodes.len())
    }

    pub fn keys(&self, slot: usize) -> &[Key] {
        &self.slots[slot].keys
    }

    fn cell_volume(&self) -> f64 {
        let [a, b, c] = self.shape;
        (8.0 * PI / a as f64) * (2.0 * PI / b as f64) * (2.0 * PI / c as f64)
    }

    fn check(&self, x: &[Vec<Complex64>]) -> Result<()> {
        if x.len() != self.slots.len() || x.iter().zip(&self.slots).any(|(v, s)| v.len() != s.keys.len()) {
            return Err(Error::InvalidParameter("coefficient vectors do not match the product supports".into()));
        }
        Ok(())
    }

    fn fill(&self, slot: usize, x: &[Complex64], col: &LegendreColumn, buf: &mut [Complex64]) {
        let s = &self.slots[slot];
        let norm = 1.0 / (2.0 * PI).sqrt();
        buf.iter_mut().for_each(|v| *v = Complex64::default());
        for ((k, &b), c) in s.keys.iter().zip(&s.bins).zip(x) {
            buf[b] += c * (col.get(k.n, k.j) * norm);
        }
    }

    /// Grid values of every slot at one μ node.
    fn slot_values(&self, x: &[Vec<Complex64>], mu: f64, fft: &mut Fft3) -> (LegendreColumn, Vec<Vec<Complex64>>) {
        let n_max = self.slots.iter().map(|s| s.n_max).max().unwrap_or(0);
        let col = LegendreColumn::new(n_max, mu);
        let len = fft.len();
        let vals = (0..self.slots.len())
            .map(|s| {
                let mut buf = vec![Complex64::default(); len];
                if self.factor_slot.contains(&s) {
                    self.fill(s, &x[s], &col, &mut buf);
                    fft.process(&mut buf);
                }
                buf
            })
            .collect();
        (col, vals)
    }

    fn node_value(&self, x: &[Vec<Complex64>], imu: usize, fft: &mut Fft3) -> f64 {
        let (_, vals) = self.slot_values(x, self.mu_nodes[imu], fft);
        let s: f64 = (0..fft.len())
            .map(|p| {
                let mut w = Complex64::new(1.0, 0.0);
                for &f in &self.factor_slot {
                    w *= vals[f][p];
                }
                w.norm_sqr()
            })
            .sum();
        s * self.mu_weights[imu]
    }

    pub fn value(&self, x: &[Vec<Complex64>]) -> Result<f64> {
        self.check(x)?;
        let parts: Vec<f64> = (0..self.mu_nodes.len())
            .into_par_iter()
            .map_init(
                || Fft3::new(self.shape, FftDirection::Inverse),
                |fft, imu| self.node_value(x, imu, fft),
            )
            .collect();
        Ok(parts.iter().sum::<f64>() * self.cell_volume())
    }

    /// Value and Q_s x_s for a slot used by exactly one factor.
    pub fn value_and_gradient(&self, x: &[Vec<Complex64>], slot: usize) -> Result<(f64, Vec<Complex64>)> {
        self.check(x)?;
        if self.factor_slot.iter().filter(|&&f| f == slot).count() != 1 {
            return Err(Error::InvalidParameter(format!("slot {slot} is not a single factor")));
        }
        let norm = 1.0 / (2.0 * PI).sqrt();
        let parts: Vec<(f64, Vec<Complex64>)> = (0..self.mu_nodes.len())
            .into_par_iter()
            .map_init(
                || (Fft3::new(self.shape, FftDirection::Inverse), Fft3::new(self.shape, FftDirection::Forward)),
                |(inv, fwd), imu| {
                    let (col, vals) = self.slot_values(x, self.mu_nodes[imu], inv);
                    let mut g = vec![Complex64::default(); inv.len()];
                    let mut value = 0.0;
                    for (p, gp) in g.iter_mut().enumerate() {
                        let mut others = 1.0;
                        for (fi, &f) in self.factor_slot.iter().enumerate() {
                            if f != slot || self.factor_slot[..fi].contains(&slot) {
                                others *= vals[f][p].norm_sqr();
                            }
                        }
                        let own = vals[slot][p];
                        value += others * own.norm_sqr();
                        *gp = own * others;
                    }
                    fwd.process(&mut g);
                    let w = self.mu_weights[imu];
                    let s = &self.slots[slot];
                    let grad = s
                        .keys
                        .iter()
                        .zip(&s.bins)
                        .map(|(k, &b)| g[b] * (w * col.get(k.n, k.j) * norm))
                        .collect::<Vec<_>>();
                    (value * w, grad)
                },
            )
            .collect();
        let vol = self.cell_volume();
        let mut grad = vec![Complex64::default(); self.slots[slot].keys.len()];
        let mut value = 0.0;
        for (v, g) in &parts {
            value += v;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        grad.iter_mut().for_each(|a| *a *= vol);
        Ok((value * vol, grad))
    }
}

impl QuadraticInEach for ProductForm {
    fn factors(&self) -> usize {
        self.slots.len()
    }

    fn value(&self, x: &[Vec<Complex64>]) -> Result<f64> {
        ProductForm::value(self, x)
    }

    fn value_and_gradient(&self, x: &[Vec<Complex64>], i: usize) -> Result<(f64, Vec<Complex64>)> {
        ProductForm::value_and_gradient(self, x, i)
    }
}

/// ‖Π_i e^{itΔ}f_i‖_{L²(τ₀×M)}.
pub fn product_norm(fields: &[&SpectralField]) -> Result<f64> {
    let (keys, coeffs): (Vec<_>, Vec<_>) = fields.iter().map(|f| support_of(f)).unzip();
    if keys.iter().any(|k: &Vec<Key>| k.is_empty()) {
        return Ok(0.0);
    }
    Ok(ProductForm::new(keys)?.value(&coeffs)?.sqrt())
}

/// ‖e^{itΔ}f‖_{L^p(τ₀×M)} for even p ≥ 2, exactly.
pub fn free_lp_norm(f: &SpectralField, p: usize) -> Result<f64> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::InvalidParameter(format!("exact space-time norm needs even p, got {p}")));
    }
    let (keys, coeffs) = support_of(f);
    if keys.is_empty() {
        return Ok(0.0);
    }
    let v = ProductForm::power(keys, p / 2)?.value(&[coeffs])?;
    Ok(v.powf(1.0 / p as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{lp_norm_spacetime, random_field, required_time_samples};
    use crate::rng;

    fn unit(m: i64, n: usize, j: i64, c: Complex64) -> SpectralField {
        let mut f = SpectralField::zeros(m.unsigned_abs() as usize, n).unwrap();
        f.set(m, n, j, c).unwrap();
        f
    }

    #[test]
    fn constant_triple_closed_form() {
        let f = unit(0, 0, 0, Complex64::new(1.0, 0.0));
        let v = product_norm(&[&f, &f, &f]).unwrap();
        let exact = (64.0 * PI.powi(3)).sqrt() / (8.0 * PI * PI).powf(1.5);
        assert!((v - exact).abs() < 1e-14);
        assert!((v - 0.0635).abs() < 1e-4);
        let l6 = free_lp_norm(&f, 6).unwrap();
        assert!((l6 - (64.0 * PI.powi(3)).powf(1.0 / 6.0) / (8.0 * PI * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_time_sampled_norm() {
        let mut rng = rng::stream(9, 0);
        let f = random_field(&mut rng, 2, 2).unwrap();
        let g = random_field(&mut rng, 1, 3).unwrap();
        let exact = product_norm(&[&f, &g]).unwrap();
        let fm = f.resized(2, 3).unwrap();
        let gm = g.resized(2, 3).unwrap();
        let band = fm.lambda_cap().max(gm.lambda_cap());
        // |f g|² has the frequency content of a quartic in one field with this band
        let k = required_time_samples(4.0, band);
        let sampled: f64 = {
            let dt = 8.0 * PI / k as f64;
            let (nt, grid) = crate::field::power_grid(2, 3, 4.0);
            (0..k)
                .map(|i| {
                    let t = i as f64 * dt;
                    let a = crate::field::synthesize(&fm.free_propagate(t), nt, &grid).unwrap();
                    let b = crate::field::synthesize(&gm.free_propagate(t), nt, &grid).unwrap();
                    a.values.iter().zip(&b.values).enumerate().map(|(p, (x, y))| a.weight(p) * (x * y).norm_sqr()).sum::<f64>()
                })
                .sum::<f64>()
                * dt
        };
        assert!((exact * exact - sampled).abs() < 1e-10 * sampled, "{exact} {sampled}");
        let l4 = lp_norm_spacetime(|t| fm.free_propagate(t), 4.0, required_time_samples(4.0, band), band).unwrap();
        assert!((l4 - free_lp_norm(&fm, 4).unwrap()).abs() < 1e-10 * l4);
    }

    #[test]
    fn gradient_matches_quadratic_form() {
        let mut rng = rng::stream(10, 0);
        let fs: Vec<SpectralField> = (0..3).map(|_| random_field(&mut rng, 2, 2).unwrap()).collect();
        let (keys, x): (Vec<_>, Vec<_>) = fs.iter().map(support_of).unzip();
        let form = ProductForm::new(keys).unwrap();
        let v = form.value(&x).unwrap();
        for i in 0..3 {
            let (v2, g) = form.value_and_gradient(&x, i).unwrap();
            assert!((v - v2).abs() < 1e-12 * v);
            let ip: Complex64 = x[i].iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
            assert!((ip.re - v).abs() < 1e-10 * v && ip.im.abs() < 1e-10 * v);
            // directional derivative of the value along a random direction
            let d: Vec<Complex64> = x[i].iter().map(|_| rng::complex_gaussian(&mut rng)).collect();
            let h = 1e-5;
            let mut xp = x.clone();
            let mut xm = x.clone();
            for k in 0..d.len() {
                xp[i][k] += d[k] * h;
                xm[i][k] -= d[k] * h;
            }
            let fd = (form.value(&xp).unwrap() - form.value(&xm).unwrap()) / (2.0 * h);
            let an: f64 = 2.0 * d.iter().zip(&g).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{fd} {an}");
        }
    }

    #[test]
    fn refined_grid_changes_nothing() {
        let mut rng = rng::stream(12, 0);
        let f = random_field(&mut rng, 3, 3).unwrap();
        let (keys, x) = support_of(&f);
        let a = ProductForm::power(keys, 2).unwrap();
        let va = a.value(&[x.clone()]).unwrap();
        let gl = GaussLegendre::new(2 * a.mu_nodes.len());
        let vb = {
            let mut c = a.clone();
            c.mu_nodes = gl.nodes;
            c.mu_weights = gl.weights;
            c.value(&[x]).unwrap()
        };
        assert!((va - vb).abs() < 1e-12 * va);
    }
}
