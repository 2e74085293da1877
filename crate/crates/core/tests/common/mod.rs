//! Oracles shared by the integration tests. None of them touch the crate's grids or
//! transforms: sphere products go through Gaunt coefficients, space-time norms through
//! Plancherel over resonance classes, and the 2-variation through subset enumeration.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use s1s2_core::field::SpectralField;

fn ln_fact(n: i64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner 3j symbol by the Racah formula.
pub fn wigner3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    let tri = ln_fact(j1 + j2 - j3) + ln_fact(j1 - j2 + j3) + ln_fact(-j1 + j2 + j3) - ln_fact(j1 + j2 + j3 + 1);
    let pre = ln_fact(j1 + m1)
        + ln_fact(j1 - m1)
        + ln_fact(j2 + m2)
        + ln_fact(j2 - m2)
        + ln_fact(j3 + m3)
        + ln_fact(j3 - m3);
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let d = ln_fact(k)
            + ln_fact(j1 + j2 - j3 - k)
            + ln_fact(j1 - m1 - k)
            + ln_fact(j2 + m2 - k)
            + ln_fact(j3 - j2 + m1 + k)
            + ln_fact(j3 - j1 - m2 + k);
        let term = (0.5 * (tri + pre) - d).exp();
        sum += if k % 2 == 0 { term } else { -term };
    }
    if (j1 - j2 - m3) % 2 == 0 {
        sum
    } else {
        -sum
    }
}

/// Sphere expansion {(n, j) ↦ c} with orthonormal, Condon–Shortley Y_n^j.
pub type SphereSeries = BTreeMap<(i64, i64), Complex64>;

/// Y_a^α Y_b^β = Σ_L √((2a+1)(2b+1)(2L+1)/4π)·(a b L; 0 0 0)(a b L; α β −M)(−1)^M Y_L^M.
pub fn gaunt_product(x: &SphereSeries, y: &SphereSeries) -> SphereSeries {
    let mut out = SphereSeries::new();
    for (&(a, al), &cx) in x {
        for (&(b, be), &cy) in y {
            let m = al + be;
            for l in (a - b).abs()..=a + b {
                if (a + b + l) % 2 == 1 || m.abs() > l {
                    continue;
                }
                let g = (((2 * a + 1) * (2 * b + 1) * (2 * l + 1)) as f64 / (4.0 * PI)).sqrt()
                    * wigner3j(a, b, l, 0, 0, 0)
                    * wigner3j(a, b, l, al, be, -m)
                    * if m % 2 == 0 { 1.0 } else { -1.0 };
                if g != 0.0 {
                    *out.entry((l, m)).or_default() += cx * cy * g;
                }
            }
        }
    }
    out
}

/// ‖Π_i e^{itΔ}f_i‖²_{L²([0,8π]×S¹×S²)} from the coefficients alone: the time and θ
/// integrals are Kronecker deltas on (Σλ, Σm), the sphere integral is Parseval on the
/// Gaunt expansion of each class.
pub fn plancherel_product_sq(fields: &[&SpectralField]) -> f64 {
    plancherel_product_sq_conj(fields, &vec![false; fields.len()])
}

/// As [`plancherel_product_sq`] with the factors flagged in `conj` complex conjugated:
/// conj(e^{itΔ}φ) has coefficients (−1)^j·c̄ at (−m, n, −j) and time phases e^{+iλt}.
pub fn plancherel_product_sq_conj(fields: &[&SpectralField], conj: &[bool]) -> f64 {
    // classes keyed by (Σλ, Σm) of the factors so far
    let mut classes: BTreeMap<(i64, i64), SphereSeries> = BTreeMap::new();
    classes.insert((0, 0), SphereSeries::from([((0, 0), Complex64::new((4.0 * PI).sqrt(), 0.0))]));
    for (f, &cj) in fields.iter().zip(conj) {
        let mut next: BTreeMap<(i64, i64), SphereSeries> = BTreeMap::new();
        for ((tau, xi), series) in &classes {
            for (m, n, j, c) in f.iter_nonzero() {
                let lam = m * m + (n * n + n) as i64;
                let (m, j, c, lam) = if cj {
                    (-m, -j, c.conj() * if j % 2 == 0 { 1.0 } else { -1.0 }, -lam)
                } else {
                    (m, j, c, lam)
                };
                let single = SphereSeries::from([((n as i64, j), c)]);
                let prod = gaunt_product(series, &single);
                let slot = next.entry((tau + lam, xi + m)).or_default();
                for (k, v) in prod {
                    *slot.entry(k).or_default() += v;
                }
            }
        }
        classes = next;
    }
    // seed Y_0^0·√(4π) = 1; each ê_m contributes (2π)^{-1/2}
    let k = fields.len() as i32;
    let scale = 8.0 * PI * 2.0 * PI * (2.0 * PI).powi(-k);
    scale * classes.values().flat_map(|s| s.values()).map(|c| c.norm_sqr()).sum::<f64>()
}

/// max over all subsequences of Σ d(k_{i−1}, k_i) by enumeration.
pub fn v2_exhaustive(dist2: &[Vec<f64>]) -> f64 {
    let len = dist2.len();
    let mut best = 0.0f64;
    for mask in 1u32..(1 << len) {
        let idx: Vec<usize> = (0..len).filter(|&i| mask >> i & 1 == 1).collect();
        let s: f64 = idx.windows(2).map(|w| dist2[w[0]][w[1]]).sum();
        best = best.max(s);
    }
    best
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Least-squares slope of y against x.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
