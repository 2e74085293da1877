//! The critical trilinear estimate on τ₀×M and its off-diagonal and sup-norm companions.

use num_complex::Complex64;
use rand::Rng;

use crate::ascent;
use crate::error::{Error, Result};
use crate::field::{synthesize, SpectralField};
use crate::harmonics::SphereGrid;
use crate::report::{EstimateId, EstimateReport};
use crate::rng::{self, SweepRng};
use crate::spacetime::{product_norm, support_of, Key, ProductForm};
use crate::spectrum::{self, block_dimension, in_block};

/// (N₃/N₁ + 1/N₂)^δ · N₂ · N₃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilinearConstant {
    pub delta: f64,
    pub blocks: [u64; 3],
}

impl TrilinearConstant {
    pub fn new(delta: f64, blocks: [u64; 3]) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidParameter(format!("δ = {delta} must lie in (0, 1/2)")));
        }
        check_blocks(blocks)?;
        Ok(TrilinearConstant { delta, blocks })
    }

    pub fn value(&self) -> f64 {
        let [n1, n2, n3] = self.blocks.map(|b| b as f64);
        (n3 / n1 + 1.0 / n2).powf(self.delta) * n2 * n3
    }
}

/// ln(N₃/N₁ + 1/N₂), the regressor of the δ fit.
pub fn gain_regressor(blocks: [u64; 3]) -> f64 {
    let [n1, n2, n3] = blocks.map(|b| b as f64);
    (n3 / n1 + 1.0 / n2).ln()
}

pub fn check_blocks(blocks: [u64; 3]) -> Result<()> {
    let [n1, n2, n3] = blocks;
    if !blocks.iter().all(|&b| spectrum::is_dyadic(b)) || !(n1 >= n2 && n2 >= n3) {
        return Err(Error::InvalidParameter(format!("need dyadic N₁ ≥ N₂ ≥ N₃, got {blocks:?}")));
    }
    Ok(())
}

/// ‖P_{N₁}e^{itΔ}φ₁ · P_{N₂}e^{itΔ}φ₂ · P_{N₃}e^{itΔ}φ₃‖_{L²(τ₀×M)}.
pub fn trilinear_lhs(phi: [&SpectralField; 3], blocks: [u64; 3]) -> Result<f64> {
    check_blocks(blocks)?;
    let p: Vec<SpectralField> = (0..3).map(|i| phi[i].project_dyadic(blocks[i])).collect::<Result<_>>()?;
    product_norm(&[&p[0], &p[1], &p[2]])
}

/// A datum given by its support and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Datum {
    pub keys: Vec<Key>,
    pub coeffs: Vec<Complex64>,
}

impl Datum {
    fn gaussian<R: Rng>(rng: &mut R, keys: Vec<Key>) -> Self {
        let mut coeffs: Vec<Complex64> = keys.iter().map(|_| rng::complex_gaussian(rng)).collect();
        ascent::normalize(&mut coeffs);
        Datum { keys, coeffs }
    }

    pub fn from_field(f: &SpectralField) -> Self {
        let (keys, coeffs) = support_of(f);
        Datum { keys, coeffs }
    }

    pub fn to_field(&self) -> Result<SpectralField> {
        let m_max = self.keys.iter().map(|k| k.m.unsigned_abs() as usize).max().unwrap_or(0);
        let n_max = self.keys.iter().map(|k| k.n).max().unwrap_or(0);
        let mut f = SpectralField::zeros(m_max, n_max)?;
        for (k, c) in self.keys.iter().zip(&self.coeffs) {
            f.set(k.m, k.n, k.j, *c)?;
        }
        Ok(f)
    }

    pub fn norm(&self) -> f64 {
        ascent::norm(&self.coeffs)
    }
}

/// Every (m, n, j) of block N.
pub fn block_keys(block: u64) -> Result<Vec<Key>> {
    Ok(spectrum::dyadic_block(block)?
        .into_iter()
        .flat_map(|md| (-md.n..=md.n).map(move |j| Key { m: md.m, n: md.n as usize, j }))
        .collect())
}

/// Block N restricted to one azimuthal order j, |j| < 2N drawn uniformly.
pub fn single_order_keys<R: Rng>(rng: &mut R, block: u64) -> Result<Vec<Key>> {
    let top = 2 * block as i64 - 1;
    let j = rng.random_range(-top..=top);
    Ok(spectrum::dyadic_block(block)?
        .into_iter()
        .filter(|md| md.n >= j.abs())
        .map(|md| Key { m: md.m, n: md.n as usize, j })
        .collect())
}

/// A piece of block N₁ localized as in the almost-orthogonal decomposition against a
/// block N₂: an anchor mode (m₀, n₀) of block N₁, the cube (m₀, n₀) + {0..N₂−1}², the
/// annulus √λ ∈ [√λ₀, √λ₀ + M) with M = max(N₂²/N₁, 1), and one order j with |j| ≤ n₀.
pub fn localized_keys<R: Rng>(rng: &mut R, n1: u64, n2: u64) -> Result<Vec<Key>> {
    let modes = spectrum::dyadic_block(n1)?;
    let anchor = modes[rng.random_range(0..modes.len())];
    let width = ((n2 * n2) as f64 / n1 as f64).max(1.0);
    let r0 = (anchor.lambda as f64).sqrt();
    let j = rng.random_range(-anchor.n..=anchor.n);
    let side = n2 as i64;
    let mut keys = Vec::new();
    for n in anchor.n..anchor.n + side {
        for m in anchor.m..anchor.m + side {
            let lam = (m * m + n * n + n) as u64;
            let r = (lam as f64).sqrt();
            if in_block(lam, n1) && r >= r0 && r < r0 + width {
                keys.push(Key { m, n: n as usize, j });
            }
        }
    }
    Ok(keys)
}

/// How sweep data are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFamily {
    /// Gaussian on every (m, n, j) of each block.
    FullBlock,
    /// A localized single-order piece of block N₁ (the whole single-order block when
    /// N₁ = N₂); blocks N₂, N₃ in full when N₂ ≤ [`FULL_LOW_MAX`], else one order each.
    Localized,
}

impl std::str::FromStr for DataFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(DataFamily::FullBlock),
            "localized" => Ok(DataFamily::Localized),
            _ => Err(Error::Parse(format!("unknown data family `{s}` (full, localized)"))),
        }
    }
}

/// Largest N₂ for which the localized family keeps every order of the low blocks.
pub const FULL_LOW_MAX: u64 = 4;

/// Unit data for one trial. Factors 2 and 3 come from `low`, factor 1 from `high`, so a
/// sweep over N₁ can reuse the low-frequency draws.
pub fn draw_data(blocks: [u64; 3], family: DataFamily, high: &mut SweepRng, low: &mut SweepRng) -> Result<[Datum; 3]> {
    check_blocks(blocks)?;
    let [n1, n2, n3] = blocks;
    Ok(match family {
        DataFamily::FullBlock => [
            Datum::gaussian(high, block_keys(n1)?),
            Datum::gaussian(low, block_keys(n2)?),
            Datum::gaussian(low, block_keys(n3)?),
        ],
        DataFamily::Localized => {
            let low_keys = |rng: &mut SweepRng, b| if n2 <= FULL_LOW_MAX { block_keys(b) } else { single_order_keys(rng, b) };
            let k2 = low_keys(low, n2)?;
            let d2 = Datum::gaussian(low, k2);
            let k3 = low_keys(low, n3)?;
            let d3 = Datum::gaussian(low, k3);
            let k1 = if n1 == n2 { single_order_keys(high, n1)? } else { localized_keys(high, n1, n2)? };
            [Datum::gaussian(high, k1), d2, d3]
        }
    })
}

fn form_of(data: &[Datum; 3]) -> Result<ProductForm> {
    ProductForm::new(data.iter().map(|d| d.keys.clone()).collect())
}

/// Exact trilinear norm of block-supported data.
pub fn trilinear_of(data: &[Datum; 3]) -> Result<f64> {
    Ok(form_of(data)?.value(&data.iter().map(|d| d.coeffs.clone()).collect::<Vec<_>>())?.sqrt())
}

/// Options of a trilinear sweep point.
#[derive(Debug, Clone, Copy)]
pub struct TrilinearSearch {
    pub trials: usize,
    pub seed: u64,
    /// Coordinate-ascent iterations per start (0 disables).
    pub ascent_iterations: usize,
    /// Ascent starts from the best trials, in decreasing order of their value.
    pub ascent_starts: usize,
    pub family: DataFamily,
}

/// Sampled sup of trilinear_lhs/(N₂N₃) over unit data, with the optional ascent.
pub fn trilinear_point(blocks: [u64; 3], search: TrilinearSearch) -> Result<EstimateReport> {
    check_blocks(blocks)?;
    let [n1, n2, n3] = blocks.map(|b| b as i64);
    let mut high = rng::stream(search.seed, rng::stream_id(&[EstimateId::Trilinear as i64, n1, n2, n3]));
    let mut low = rng::stream(search.seed, rng::stream_id(&[EstimateId::Trilinear as i64, n2, n3]));
    let mut sampled = Vec::with_capacity(search.trials.max(1));
    for _ in 0..search.trials.max(1) {
        let data = draw_data(blocks, search.family, &mut high, &mut low)?;
        let v = trilinear_of(&data)?;
        sampled.push((data, v));
    }
    // stable sort keeps draw order among ties
    sampled.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut lhs = sampled[0].1;
    if search.ascent_iterations > 0 {
        for (data, _) in sampled.iter().take(search.ascent_starts.max(1)) {
            let form = form_of(data)?;
            let mut x: Vec<Vec<Complex64>> = data.iter().map(|d| d.coeffs.clone()).collect();
            lhs = lhs.max(ascent::coordinate_ascent(&form, &mut x, search.ascent_iterations)?.sqrt());
        }
    }
    Ok(EstimateReport::new(
        EstimateId::Trilinear,
        &[("N1", n1 as f64), ("N2", n2 as f64), ("N3", n3 as f64)],
        lhs,
        (n2 * n3) as f64,
        search.trials as u64,
        search.seed,
    ))
}

/// Least-squares fit ln(ratio) ≈ c + δ̂·ln(N₃/N₁ + 1/N₂).
#[derive(Debug, Clone)]
pub struct DeltaFit {
    pub delta_hat: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub reports: Vec<EstimateReport>,
}

impl DeltaFit {
    /// Two-sided interval δ̂ ± z·se.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.delta_hat - z * self.std_error, self.delta_hat + z * self.std_error)
    }
}

pub fn fit_delta(reports: Vec<EstimateReport>) -> Result<DeltaFit> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| {
            let b = |k: &str| r.param(k).unwrap_or(1.0) as u64;
            (gain_regressor([b("N1"), b("N2"), b("N3")]), r.ratio.ln())
        })
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 3 {
        return Err(Error::InvalidParameter("δ fit needs at least three sweep points".into()));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("δ fit needs distinct regressors".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DeltaFit { delta_hat: slope, std_error: (ssr / (n - 2.0) / sxx).sqrt(), intercept, reports })
}

/// Every dyadic (N₁, N₂, N₃) with N₁ ≤ n1_max, N₃ ≤ N₂ ≤ min(N₁, n23_max).
pub fn desk_triples(n1_max: u64, n23_max: u64) -> Vec<[u64; 3]> {
    let dy = |top: u64| (0..).map(|k| 1u64 << k).take_while(move |&b| b <= top);
    let mut out = Vec::new();
    for n1 in dy(n1_max) {
        for n2 in dy(n23_max.min(n1)) {
            for n3 in dy(n2) {
                out.push([n1, n2, n3]);
            }
        }
    }
    out
}

/// Sweep every triple and fit δ̂.
pub fn trilinear_sweep_fit(triples: &[[u64; 3]], search: TrilinearSearch) -> Result<DeltaFit> {
    let reports = triples.iter().map(|&b| trilinear_point(b, search)).collect::<Result<Vec<_>>>()?;
    fit_delta(reports)
}

/// trilinear_lhs against (N₂N₃)^{3/2}·Π‖P_{N_i}φ_i‖; the ratio is the observed constant.
pub fn off_diagonal_bound_check(blocks: [u64; 3], phi: [&SpectralField; 3]) -> Result<EstimateReport> {
    let lhs = trilinear_lhs(phi, blocks)?;
    let norms: f64 = (0..3).map(|i| phi[i].project_dyadic(blocks[i]).map(|p| p.norm())).product::<Result<f64>>()?;
    if norms == 0.0 {
        return Err(Error::Empty("a projected datum vanishes".into()));
    }
    let [n1, n2, n3] = blocks.map(|b| b as f64);
    Ok(EstimateReport::new(
        EstimateId::OffDiagonal,
        &[("N1", n1), ("N2", n2), ("N3", n3)],
        lhs,
        (n2 * n3).powf(1.5) * norms,
        1,
        0,
    ))
}

/// Max over trials of the off-diagonal constant at each N₁ for fixed N₂, N₃.
pub fn off_diagonal_sweep(n1s: &[u64], n2: u64, n3: u64, search: TrilinearSearch) -> Result<Vec<EstimateReport>> {
    n1s.iter()
        .map(|&n1| {
            let mut r = trilinear_point([n1, n2, n3], search)?;
            let lhs = r.lhs;
            r = EstimateReport::new(
                EstimateId::OffDiagonal,
                &[("N1", n1 as f64), ("N2", n2 as f64), ("N3", n3 as f64)],
                lhs,
                ((n2 * n3) as f64).powf(1.5),
                search.trials as u64,
                search.seed,
            );
            Ok(r)
        })
        .collect()
}

/// max |P_N e^{itΔ}φ| over a space grid at `times` against the Cauchy–Schwarz bound
/// √(dim/(8π²))·‖P_Nφ‖; the cruder √dim·‖P_Nφ‖ is kept as param `sqrt_dim`.
pub fn sup_norm_check(phi: &SpectralField, block: u64, times: &[f64]) -> Result<EstimateReport> {
    let p = phi.project_dyadic(block)?;
    // twice the minimal resolution, so the sup is sampled between the exact nodes too
    let n_theta = 2 * (2 * p.m_max() + 1);
    let grid = SphereGrid::new(2 * (p.n_max() + 1), 2 * (2 * p.n_max() + 1));
    let mut sup = 0.0f64;
    for &t in times {
        let g = synthesize(&p.free_propagate(t), n_theta, &grid)?;
        sup = g.values.iter().fold(sup, |s, v| s.max(v.norm()));
    }
    let dim = block_dimension(block)? as f64;
    let nrm = p.norm();
    let bound = (dim / (8.0 * std::f64::consts::PI.powi(2))).sqrt() * nrm;
    if bound == 0.0 {
        return Err(Error::Empty("projected datum vanishes".into()));
    }
    Ok(EstimateReport::new(
        EstimateId::SupNorm,
        &[("N", block as f64), ("sqrt_dim", dim.sqrt() * nrm), ("times", times.len() as f64)],
        sup,
        bound,
        1,
        0,
    ))
}
