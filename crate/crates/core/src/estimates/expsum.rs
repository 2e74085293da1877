//! Exponential sums F(t,θ) = Σ a_{m,n} e^{−iλ_{m,n}t} e^{imθ} on τ₀×S¹.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::fft::good_size;
use crate::report::{EstimateId, EstimateReport};
use crate::rng;
use crate::spectrum::{self, sector_count, sector_set, LatticeDomain, Mode, SectorParams};

/// Which norm of F to take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TorusNorm {
    /// L^p_{t,θ}(τ₀×S¹).
    Full(f64),
    /// L^p_t(τ₀; L⁴_θ(S¹)).
    Mixed(f64),
}

/// Frequencies after the Galilean shift m → m − c. With λ = m² + q(n),
/// e^{−iλt}e^{imθ} = e^{−i(c²t − cθ)}·e^{−i((m−c)² + q)t} e^{i(m−c)(θ − 2ct)}, and θ ↦ θ − 2ct
/// preserves the measure on S¹ for every t, so |F| is only rearranged.
fn recentered(terms: &[(Mode, Complex64)]) -> Vec<(i64, i64, Complex64)> {
    let (lo, hi) = terms.iter().fold((i64::MAX, i64::MIN), |(l, h), (md, _)| (l.min(md.m), h.max(md.m)));
    let c = (lo + hi).div_euclid(2);
    terms
        .iter()
        .map(|(md, a)| {
            let q = md.lambda as i64 - md.m * md.m;
            let m = md.m - c;
            (m * m + q, m, *a)
        })
        .collect()
}

/// Samples of F on a K_t × K_θ grid over [0, 2π)², after shifting both frequency
/// axes to start at zero. Visits one t-row at a time.
fn for_each_row(
    terms: &[(Mode, Complex64)],
    shape: impl Fn(usize, usize) -> (usize, usize),
    mut visit: impl FnMut(&[Complex64]),
) -> (usize, usize) {
    let shifted = recentered(terms);
    let (l_lo, l_hi) = shifted.iter().fold((i64::MAX, i64::MIN), |(l, h), t| (l.min(-t.0), h.max(-t.0)));
    let (m_lo, m_hi) = shifted.iter().fold((i64::MAX, i64::MIN), |(l, h), t| (l.min(t.1), h.max(t.1)));
    let (kt, kth) = shape((l_hi - l_lo) as usize, (m_hi - m_lo) as usize);
    let mut planner = FftPlanner::new();
    let ft = planner.plan_fft(kt, FftDirection::Inverse);
    let fth = planner.plan_fft(kth, FftDirection::Inverse);
    // transform along t only for the θ-frequencies that occur
    let width = (m_hi - m_lo) as usize + 1;
    let mut cols = vec![Complex64::default(); width * kt];
    for &(lam, m, a) in &shifted {
        cols[(m - m_lo) as usize * kt + (-lam - l_lo) as usize] += a;
    }
    for col in cols.chunks_mut(kt) {
        ft.process(col);
    }
    let mut row = vec![Complex64::default(); kth];
    for it in 0..kt {
        row.iter_mut().for_each(|v| *v = Complex64::default());
        for c in 0..width {
            row[c] = cols[c * kt + it];
        }
        fth.process(&mut row);
        visit(&row);
    }
    (kt, kth)
}

/// Norm of F over τ₀×S¹. Even p in the full norm is integrated exactly; other cases use
/// four-fold oversampling of the grid that would be exact for the nearest even power.
pub fn torus_norm(terms: &[(Mode, Complex64)], norm: TorusNorm) -> Result<f64> {
    torus_norm_oversampled(terms, norm, 1)
}

/// As [`torus_norm`] with every grid dimension refined by `refine`.
pub fn torus_norm_oversampled(terms: &[(Mode, Complex64)], norm: TorusNorm, refine: usize) -> Result<f64> {
    if terms.is_empty() {
        return Ok(0.0);
    }
    let p = match norm {
        TorusNorm::Full(p) | TorusNorm::Mixed(p) => p,
    };
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be a finite exponent ≥ 1")));
    }
    let even = p.fract() == 0.0 && (p as u64) % 2 == 0;
    let k = (p / 2.0).ceil() as usize;
    let over = refine.max(1);
    match norm {
        TorusNorm::Full(_) => {
            let margin = if even { 1 } else { 4 };
            let mut total = 0.0;
            let (kt, kth) = for_each_row(
                terms,
                |st, sm| (good_size(margin * over * (k * st + 1)), good_size(margin * over * (k * sm + 1))),
                |row| total += row.iter().map(|v| v.norm().powf(p)).sum::<f64>(),
            );
            Ok((total * (8.0 * PI / kt as f64) * (2.0 * PI / kth as f64)).powf(1.0 / p))
        }
        TorusNorm::Mixed(_) => {
            // θ-integral of |F|⁴ is exact; the t-integrand has band 2·spread(λ), sampled at 4× Nyquist
            let mut total = 0.0;
            let (kt, _) = for_each_row(
                terms,
                |st, sm| (good_size(4 * over * (2 * st + 1)), good_size(over * (2 * sm + 1))),
                |row| {
                    let inner: f64 = row.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * 2.0 * PI / row.len() as f64;
                    total += inner.powf(p / 4.0);
                },
            );
            Ok((total * 8.0 * PI / kt as f64).powf(1.0 / p))
        }
    }
}

/// ‖F‖_{L^p(τ₀×S¹)} for p > 4.
pub fn exp_sum_norm(terms: &[(Mode, Complex64)], p: f64) -> Result<f64> {
    if p <= 4.0 {
        return Err(Error::InvalidParameter(format!("exponential sum norm needs p > 4, got {p}")));
    }
    torus_norm(terms, TorusNorm::Full(p))
}

/// ‖F‖_{L^p_t L⁴_θ(τ₀×S¹)} for p > 16/3.
pub fn exp_sum_mixed_norm(terms: &[(Mode, Complex64)], p: f64) -> Result<f64> {
    if p <= 16.0 / 3.0 {
        return Err(Error::InvalidParameter(format!("mixed norm needs p > 16/3, got {p}")));
    }
    torus_norm(terms, TorusNorm::Mixed(p))
}

pub fn l2_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn cube(z: (i64, i64), side: u64) -> Vec<Mode> {
    let mut out = Vec::new();
    for n in z.1..=z.1 + side as i64 {
        for m in z.0..=z.0 + side as i64 {
            let k = if n < 0 { -1 - n } else { n };
            out.push(Mode { m, n, lambda: (m * m + k * k + k) as u64 });
        }
    }
    out
}

/// Random cube z + {0..N}² ⊂ ℤ², z uniform in [−4N, 4N]², with unit-norm Gaussian weights.
pub fn random_cube_sum<R: Rng>(rng: &mut R, side: u64) -> Vec<(Mode, Complex64)> {
    let reach = 4 * side as i64;
    let z = (rng.random_range(-reach..=reach), rng.random_range(-reach..=reach));
    with_gaussian_weights(rng, cube(z, side))
}

fn with_gaussian_weights<R: Rng>(rng: &mut R, modes: Vec<Mode>) -> Vec<(Mode, Complex64)> {
    let mut terms: Vec<(Mode, Complex64)> = modes.into_iter().map(|md| (md, rng::complex_gaussian(rng))).collect();
    let nrm = l2_norm(&terms.iter().map(|t| t.1).collect::<Vec<_>>());
    terms.iter_mut().for_each(|t| t.1 /= nrm);
    terms
}

/// For each N: max over `trials` random cubes of ‖F‖/(N^{e}‖a‖), with e = 1 − 3/p for the
/// full norm and e = 3/4 − 2/p for the mixed norm.
pub fn exp_sum_sweep(sides: &[u64], norm: TorusNorm, trials: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    let (id, p, expo) = match norm {
        TorusNorm::Full(p) => (EstimateId::ExpSum, p, 1.0 - 3.0 / p),
        TorusNorm::Mixed(p) => (EstimateId::ExpSumMixed, p, 0.75 - 2.0 / p),
    };
    sides
        .iter()
        .map(|&side| {
            if side == 0 {
                return Err(Error::InvalidParameter("cube side must be positive".into()));
            }
            let mut rng = rng::stream(seed, rng::stream_id(&[id as i64, side as i64, (p * 1e6) as i64]));
            let mut best = 0.0f64;
            for _ in 0..trials {
                let terms = random_cube_sum(&mut rng, side);
                let v = match norm {
                    TorusNorm::Full(p) => exp_sum_norm(&terms, p)?,
                    TorusNorm::Mixed(p) => exp_sum_mixed_norm(&terms, p)?,
                };
                best = best.max(v);
            }
            Ok(EstimateReport::new(
                id,
                &[("N", side as f64), ("p", p)],
                best,
                (side as f64).powf(expo),
                trials as u64,
                seed,
            ))
        })
        .collect()
}

/// ‖F‖_{L^p} over S_{N,M} against (N/M)^ε N^{1/2−1/p} M^{1/2−2/p} ‖a‖.
pub fn sector_lp_estimate(params: SectorParams, a: &[Complex64], p: f64, eps: f64) -> Result<EstimateReport> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be positive")));
    }
    let modes = sector_set(params, LatticeDomain::Eigen)?;
    if modes.len() != a.len() {
        return Err(Error::InvalidParameter(format!(
            "sector has {} modes but {} weights were given",
            modes.len(),
            a.len()
        )));
    }
    if modes.is_empty() {
        return Err(Error::Empty("sector contains no lattice points".into()));
    }
    let terms: Vec<(Mode, Complex64)> = modes.into_iter().zip(a.iter().copied()).collect();
    let lhs = exp_sum_norm(&terms, p)?;
    let (n, m) = (params.side as f64, params.width as f64);
    let rhs = (n / m).powf(eps) * n.powf(0.5 - 1.0 / p) * m.powf(0.5 - 2.0 / p) * l2_norm(a);
    Ok(EstimateReport::new(
        EstimateId::Sector,
        &[("N", n), ("M", m), ("p", p), ("eps", eps), ("b", params.b as f64), ("z1", params.z.0 as f64), ("z2", params.z.1 as f64)],
        lhs,
        rhs,
        1,
        0,
    ))
}

/// Σ|a| over S_{N,M} against √(MN)·‖a‖; `sup_grid` is the largest |F| seen on the exact
/// L⁶ grid, which must not exceed Σ|a|.
#[derive(Debug, Clone)]
pub struct EllOneCheck {
    pub report: EstimateReport,
    pub sup_grid: f64,
    pub count: u64,
}

pub fn ell1_sector_check(params: SectorParams, a: &[Complex64]) -> Result<EllOneCheck> {
    let modes = sector_set(params, LatticeDomain::Eigen)?;
    if modes.len() != a.len() {
        return Err(Error::InvalidParameter("weights do not match the sector".into()));
    }
    if modes.is_empty() {
        return Err(Error::Empty("sector contains no lattice points".into()));
    }
    let count = sector_count(params, LatticeDomain::Eigen)?;
    let l1: f64 = a.iter().map(|c| c.norm()).sum();
    let mut sup = 0.0f64;
    let terms: Vec<(Mode, Complex64)> = modes.into_iter().zip(a.iter().copied()).collect();
    for_each_row(&terms, |st, sm| (good_size(st + 1), good_size(sm + 1)), |row| {
        sup = row.iter().fold(sup, |s, v| s.max(v.norm()));
    });
    let (n, m) = (params.side as f64, params.width as f64);
    let report = EstimateReport::new(
        EstimateId::Sector,
        &[("N", n), ("M", m), ("l1", 1.0)],
        l1,
        (n * m).sqrt() * l2_norm(a),
        1,
        0,
    );
    Ok(EllOneCheck { report, sup_grid: sup, count })
}

/// For each (N, M): max over random sectors of the L^p ratio, Gaussian unit weights.
pub fn sector_sweep(pairs: &[(u64, u64)], p: f64, eps: f64, trials: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    pairs
        .iter()
        .map(|&(side, width)| {
            let mut rng = rng::stream(seed, rng::stream_id(&[EstimateId::Sector as i64, side as i64, width as i64]));
            let mut best: Option<EstimateReport> = None;
            let mut drawn = 0;
            while drawn < trials {
                let params = spectrum::random_sector(&mut rng, side, width, LatticeDomain::Eigen);
                let modes = sector_set(params, LatticeDomain::Eigen)?;
                drawn += 1;
                if modes.is_empty() {
                    continue;
                }
                let a: Vec<Complex64> = with_gaussian_weights(&mut rng, modes).into_iter().map(|t| t.1).collect();
                let r = sector_lp_estimate(params, &a, p, eps)?;
                if best.as_ref().is_none_or(|b| r.ratio > b.ratio) {
                    best = Some(r);
                }
            }
            let mut r = best.ok_or_else(|| Error::Empty(format!("every sampled sector with N={side}, M={width} was empty")))?;
            r.trials = trials as u64;
            r.seed = seed;
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(terms: &[(Mode, Complex64)], p: f64, kt: usize, kth: usize) -> f64 {
        let mut s = 0.0;
        for it in 0..kt {
            let t = 2.0 * PI * it as f64 / kt as f64;
            for ith in 0..kth {
                let th = 2.0 * PI * ith as f64 / kth as f64;
                let v: Complex64 = terms
                    .iter()
                    .map(|(md, a)| a * Complex64::from_polar(1.0, -(md.lambda as f64) * t + md.m as f64 * th))
                    .sum();
                s += v.norm().powf(p);
            }
        }
        (s * 4.0 * (2.0 * PI / kt as f64) * (2.0 * PI / kth as f64)).powf(1.0 / p)
    }

    #[test]
    fn single_mode_values() {
        let a = Complex64::new(0.3, 0.4);
        let t = [(Mode::new(3, 5).unwrap(), a)];
        for p in [5.0, 6.0, 7.5] {
            let v = exp_sum_norm(&t, p).unwrap();
            assert!((v - (16.0 * PI * PI).powf(1.0 / p) * 0.5).abs() < 1e-12);
        }
        let mixed = exp_sum_mixed_norm(&t, 6.0).unwrap();
        assert!((mixed - (8.0 * PI).powf(1.0 / 6.0) * (2.0 * PI).powf(0.25) * 0.5).abs() < 1e-12);
        assert!(exp_sum_norm(&t, 4.0).is_err());
    }

    #[test]
    fn block_one_matches_direct_double_resolution() {
        let terms: Vec<(Mode, Complex64)> =
            spectrum::dyadic_block(1).unwrap().into_iter().map(|md| (md, Complex64::new(1.0, 0.0))).collect();
        let v = exp_sum_norm(&terms, 6.0).unwrap();
        // λ ≤ 2, |m| ≤ 1: the sextic has bands 3·2 and 3·2
        let d = brute(&terms, 6.0, 2 * 7, 2 * 7);
        assert!((v - d).abs() < 1e-8 * d, "{v} {d}");
    }

    #[test]
    fn galilean_shift_is_exact() {
        let mut rng = rng::stream(1, 1);
        let terms = random_cube_sum(&mut rng, 3);
        let v = exp_sum_norm(&terms, 6.0).unwrap();
        let spread_l = terms.iter().map(|t| t.0.lambda).max().unwrap() - terms.iter().map(|t| t.0.lambda).min().unwrap();
        let k = 3 * spread_l as usize + 1;
        let d = brute(&terms, 6.0, k, 3 * 2 * 3 * 4 + 1 + 4 * 4 * 3 * 2);
        assert!((v - d).abs() < 1e-9 * d, "{v} {d}");
    }

    #[test]
    fn holder_between_mixed_and_full() {
        let mut rng = rng::stream(2, 1);
        for side in [1, 2, 4] {
            let terms = random_cube_sum(&mut rng, side);
            let mixed = exp_sum_mixed_norm(&terms, 6.0).unwrap();
            let full = exp_sum_norm(&terms, 6.0).unwrap();
            assert!(mixed <= (2.0 * PI).powf(0.25 - 1.0 / 6.0) * full * (1.0 + 1e-9));
        }
    }

    #[test]
    fn full_width_sector_reduces_to_cube_exponent() {
        let params = SectorParams { z: (-2, 0), side: 4, b: 0, width: 4 };
        let n = sector_set(params, LatticeDomain::Eigen).unwrap().len();
        let a = vec![Complex64::new(1.0, 0.0); n];
        let r = sector_lp_estimate(params, &a, 6.0, 0.1).unwrap();
        let expected = 4f64.powf(1.0 - 0.5).powf(1.0) * 4f64.powf(-0.0) * l2_norm(&a);
        assert!((r.rhs_bound - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn ell1_bound_dominates_sup() {
        let mut rng = rng::stream(3, 1);
        let (params, modes) = loop {
            let params = spectrum::random_sector(&mut rng, 16, 1, LatticeDomain::Eigen);
            let modes = sector_set(params, LatticeDomain::Eigen).unwrap();
            if modes.len() > 3 {
                break (params, modes);
            }
        };
        let a: Vec<Complex64> = modes.iter().map(|_| rng::complex_gaussian(&mut rng)).collect();
        let c = ell1_sector_check(params, &a).unwrap();
        assert!(c.sup_grid <= c.report.lhs * (1.0 + 1e-12));
        assert!(c.report.lhs <= (c.count as f64).sqrt() * l2_norm(&a) * (1.0 + 1e-12));
    }
}
