//! Per-verb parameter resolution and execution. Everything a verb needs is resolved and
//! validated in [`prepare`]; the returned job only computes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rayon::ThreadPool;

use s1s2_core::estimates::expsum::{exp_sum_sweep, sector_sweep, TorusNorm};
use s1s2_core::estimates::l6::l6_block_estimate;
use s1s2_core::estimates::trilinear::{desk_triples, fit_delta, off_diagonal_sweep, trilinear_point, DataFamily, TrilinearSearch};
use s1s2_core::estimates::variation::discrete_v2_norm;
use s1s2_core::field::SpectralField;
use s1s2_core::harmonics::{cluster_trilinear_ratio, SupSearch};
use s1s2_core::nls::{fifth_differential_check, gaussian_data, picard_solve, polarization_sweep, split_step, Sign, SolverConfig, Trajectory};
use s1s2_core::report::{fmt_f64, EstimateId, EstimateReport};
use s1s2_core::rng;
use s1s2_core::spectrum::{self, count_ratio_sweep, standard_widths, LatticeDomain, COUNT_HEADER};

use crate::params::{dyadic_up_to, ensure, ensure_dyadic, Params};
use crate::run::Output;
use crate::{CliError, SearchArgs, SolverArgs, Verb};

pub type Job = Box<dyn FnOnce(&ThreadPool) -> Result<Output, CliError>>;

fn par_map<T, R, F>(pool: &ThreadPool, items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> s1s2_core::Result<R> + Sync + Send,
{
    Ok(pool.install(|| items.par_iter().map(f).collect::<s1s2_core::Result<Vec<R>>>())?)
}

fn max_ratio<'a>(reports: impl IntoIterator<Item = &'a EstimateReport>) -> f64 {
    reports.into_iter().map(|r| r.ratio).fold(0.0, f64::max)
}

fn results(pairs: &[(&str, f64)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), fmt_f64(*v))).collect()
}

fn family(p: &mut Params, flag: &Option<String>) -> Result<DataFamily, CliError> {
    let name: String = p.get("family", flag.clone(), "localized".to_string())?;
    Ok(name.parse()?)
}

fn search(p: &mut Params, a: &SearchArgs, trials: usize, ascent: usize) -> Result<(usize, usize), CliError> {
    let t = p.get("trials", a.trials, trials)?;
    let s = p.get("ascent", a.ascent, ascent)?;
    ensure(t >= 1, "--trials must be at least 1")?;
    Ok((t, s))
}

struct SolverDefaults {
    amp: Option<f64>,
    horizon: f64,
    m_max: usize,
    n_max: usize,
}

fn solver(p: &mut Params, a: &SolverArgs, d: SolverDefaults) -> Result<(SolverConfig, f64), CliError> {
    let base = SolverConfig::default();
    let amp = match d.amp {
        Some(v) => p.get("amp", a.amp, v)?,
        None => p.required("amp", a.amp)?,
    };
    ensure(amp.is_finite() && amp >= 0.0, "--amp must be non-negative")?;
    let sign: String = p.get("sign", a.sign.clone(), "1".to_string())?;
    let cfg = SolverConfig {
        sign: sign.parse::<Sign>()?,
        horizon: p.get("T", a.t, d.horizon)?,
        m_max: p.get("m_max", a.m_max, d.m_max)?,
        n_max: p.get("n_max", a.n_max, d.n_max)?,
        nodes: p.get("nodes", a.nodes, base.nodes)?,
        picard_tol: p.get("tol", a.tol, base.picard_tol)?,
        picard_max_iter: p.get("max_iter", a.max_iter, base.picard_max_iter)?,
        ..base
    };
    cfg.validate()?;
    Ok((cfg, amp))
}

fn initial_data(seed: u64, tag: i64, cfg: &SolverConfig, amp: f64) -> s1s2_core::Result<SpectralField> {
    gaussian_data(&mut rng::stream(seed, rng::stream_id(&[tag])), cfg.m_max, cfg.n_max, amp)
}

fn drift_results(traj: &Trajectory) -> Vec<(&'static str, f64)> {
    vec![("mass_drift", Trajectory::relative_drift(&traj.mass)), ("energy_drift", Trajectory::relative_drift(&traj.energy))]
}

/// Resolve and validate a verb; returns its name and the computation.
pub fn prepare(verb: &Verb, p: &mut Params, seed: u64) -> Result<(&'static str, Job), CliError> {
    Ok(match verb {
        Verb::Spectrum { n } => {
            let block: u64 = p.required("N", *n)?;
            ensure_dyadic("N", &[block])?;
            let job: Job = Box::new(move |_| {
                let modes = spectrum::dyadic_block(block)?;
                let mut csv = String::from("m,n,lambda,multiplicity\n");
                for md in &modes {
                    csv.push_str(&format!("{},{},{},{}\n", md.m, md.n, md.lambda, 2 * md.n + 1));
                }
                let mut out = Output { files: vec![("modes.csv".into(), csv)], ..Default::default() };
                out.results.insert("modes".into(), modes.len().to_string());
                out.results.insert("dimension".into(), spectrum::block_dimension(block)?.to_string());
                Ok(out)
            });
            ("spectrum", job)
        }
        Verb::Count { n, m, trials, raw } => {
            let sides: Vec<u64> = p.list("N", n.clone(), &[16, 32, 64, 128, 256, 512])?;
            let widths: Option<Vec<u64>> = p.opt_list("M", m.clone(), "1,sqrt(N),N")?;
            let trials = p.get("trials", *trials, 100usize)?;
            let raw = p.flag("raw", *raw)?;
            let mut pairs = Vec::new();
            for &s in &sides {
                ensure(s >= 1, "--N must be positive")?;
                let ws = widths.clone().unwrap_or_else(|| standard_widths(s));
                for w in ws {
                    ensure(w >= 1 && w <= s, format!("need 1 ≤ M ≤ N, got N={s}, M={w}"))?;
                    pairs.push((s, w));
                }
            }
            let domain = if raw { LatticeDomain::RawZ2 } else { LatticeDomain::Eigen };
            let job: Job = Box::new(move |pool| {
                let sweeps = par_map(pool, &pairs, |&pair| count_ratio_sweep(&[pair], trials, seed, domain))?;
                let mut csv = format!("{COUNT_HEADER}\n");
                let mut reports = Vec::new();
                for s in sweeps {
                    for r in &s.records {
                        csv.push_str(&r.to_csv_row());
                        csv.push('\n');
                    }
                    reports.extend(s.maxima);
                }
                let pick = |f: &dyn Fn(f64) -> bool| max_ratio(reports.iter().filter(|r| f(r.param("N").unwrap_or(0.0))));
                let res = results(&[("max_ratio", pick(&|_| true)), ("max_ratio_N_le_32", pick(&|n| n <= 32.0)), ("max_ratio_N_ge_256", pick(&|n| n >= 256.0))]);
                Ok(Output { reports, files: vec![("counts.csv".into(), csv)], results: res })
            });
            ("count", job)
        }
        Verb::Expsum { n, p: pp, trials, mixed } => {
            let sides: Vec<u64> = p.list("N", n.clone(), &dyadic_up_to(64))?;
            let pe = p.get("p", *pp, 6.0)?;
            let trials = p.get("trials", *trials, 50usize)?;
            let mixed = p.flag("mixed", *mixed)?;
            ensure(pe >= 2.0, "--p must be at least 2")?;
            let norm = if mixed { TorusNorm::Mixed(pe) } else { TorusNorm::Full(pe) };
            let job: Job = Box::new(move |pool| {
                let reports: Vec<EstimateReport> =
                    par_map(pool, &sides, |&s| exp_sum_sweep(&[s], norm, trials, seed))?.into_iter().flatten().collect();
                let res = results(&[("max_ratio", max_ratio(&reports))]);
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("expsum", job)
        }
        Verb::Sector { n, m, p: pp, eps, trials } => {
            let sides: Vec<u64> = p.list("N", n.clone(), &[8, 16, 32, 64])?;
            let width = p.get("M", *m, 1u64)?;
            let pe = p.get("p", *pp, 6.0)?;
            let eps = p.get("eps", *eps, 0.01)?;
            let trials = p.get("trials", *trials, 50usize)?;
            ensure(eps > 0.0, "--eps must be positive")?;
            for &s in &sides {
                ensure(width >= 1 && width <= s, format!("need 1 ≤ M ≤ N, got N={s}, M={width}"))?;
            }
            let job: Job = Box::new(move |pool| {
                let reports: Vec<EstimateReport> = par_map(pool, &sides, |&s| sector_sweep(&[(s, width)], pe, eps, trials, seed))?
                    .into_iter()
                    .flatten()
                    .collect();
                let res = results(&[("max_ratio", max_ratio(&reports))]);
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("sector", job)
        }
        Verb::Cluster { n1, n2, n3, search: s } => {
            let n1s: Vec<usize> = p.list("n1", n1.clone(), &[2, 4, 8, 16, 32])?;
            let n2 = p.get("n2", *n2, 2usize)?;
            let n3 = p.get("n3", *n3, 2usize)?;
            let (trials, ascent) = search(p, s, 50, 50)?;
            for &a in &n1s {
                ensure(a >= n2 && n2 >= n3, format!("need n1 ≥ n2 ≥ n3, got ({a}, {n2}, {n3})"))?;
            }
            let job: Job = Box::new(move |pool| {
                let sup = SupSearch { trials, seed, ascent_iterations: ascent };
                let reports = par_map(pool, &n1s, |&a| cluster_trilinear_ratio([a, n2, n3], sup))?;
                let res = results(&[("max_ratio", max_ratio(&reports))]);
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("cluster", job)
        }
        Verb::Trilinear { n1, n2, n3, search: s, starts, family: fam } => {
            let n1: u64 = p.required("n1", *n1)?;
            let n2 = p.get("n2", *n2, 8u64)?;
            let n3 = p.get("n3", *n3, 8u64)?;
            ensure_dyadic("n1", &[n1])?;
            ensure_dyadic("n2", &[n2])?;
            ensure_dyadic("n3", &[n3])?;
            let (trials, ascent) = search(p, s, 50, 50)?;
            let starts = p.get("starts", *starts, 1usize)?;
            let family = family(p, fam)?;
            let triples: Vec<[u64; 3]> = desk_triples(n1, n2).into_iter().filter(|t| t[2] <= n3).collect();
            let job: Job = Box::new(move |pool| {
                let search = TrilinearSearch { trials, seed, ascent_iterations: ascent, ascent_starts: starts, family };
                let reports = par_map(pool, &triples, |&t| trilinear_point(t, search))?;
                let mut res = results(&[("max_ratio", max_ratio(&reports))]);
                match fit_delta(reports.clone()) {
                    Ok(fit) => {
                        res.extend(results(&[("delta_hat", fit.delta_hat), ("delta_std_error", fit.std_error), ("delta_intercept", fit.intercept)]));
                    }
                    Err(e) => {
                        res.insert("delta_hat".into(), format!("unavailable ({e})"));
                    }
                }
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("trilinear", job)
        }
        Verb::L6 { n, trials, family: fam } => {
            let blocks: Vec<u64> = p.list("N", n.clone(), &dyadic_up_to(16))?;
            ensure_dyadic("N", &blocks)?;
            let trials = p.get("trials", *trials, 20usize)?;
            let family = family(p, fam)?;
            let job: Job = Box::new(move |pool| {
                let reports = par_map(pool, &blocks, |&b| l6_block_estimate(b, trials, seed, family))?;
                let res = results(&[("max_ratio", max_ratio(&reports))]);
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("l6", job)
        }
        Verb::Offdiag { n1, n2, n3, search: s } => {
            let n1s: Vec<u64> = p.list("n1", n1.clone(), &[4, 8, 16, 32, 64])?;
            let n2 = p.get("n2", *n2, 2u64)?;
            let n3 = p.get("n3", *n3, 2u64)?;
            ensure_dyadic("n1", &n1s)?;
            ensure_dyadic("n2", &[n2, n3])?;
            for &a in &n1s {
                ensure(a >= n2 && n2 >= n3, format!("need N1 ≥ N2 ≥ N3, got ({a}, {n2}, {n3})"))?;
            }
            let (trials, ascent) = search(p, s, 50, 0)?;
            let job: Job = Box::new(move |pool| {
                let search = TrilinearSearch { trials, seed, ascent_iterations: ascent, ascent_starts: 1, family: DataFamily::Localized };
                let reports: Vec<EstimateReport> =
                    par_map(pool, &n1s, |&a| off_diagonal_sweep(&[a], n2, n3, search))?.into_iter().flatten().collect();
                let res = results(&[("max_ratio", max_ratio(&reports))]);
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("offdiag", job)
        }
        Verb::V2 { solver: a } => {
            let (cfg, amp) = solver(p, a, SolverDefaults { amp: None, horizon: 1.0, m_max: 8, n_max: 8 })?;
            let job: Job = Box::new(move |_| {
                let u0 = initial_data(seed, EstimateId::V2 as i64, &cfg, amp)?;
                let sol = picard_solve(&u0, &cfg)?;
                let traj = &sol.trajectory;
                let profile: Vec<(f64, SpectralField)> =
                    traj.times.iter().zip(&traj.snapshots).map(|(&t, u)| (t, u.free_propagate(-t))).collect();
                let v2 = discrete_v2_norm(&profile)?;
                let norm = u0.norm();
                ensure(norm > 0.0, "initial datum vanishes; use --amp > 0")?;
                let report = EstimateReport::new(
                    EstimateId::V2,
                    &[("T", cfg.horizon), ("amp", amp), ("samples", profile.len() as f64)],
                    v2,
                    norm,
                    1,
                    seed,
                );
                let res = results(&[("v2", v2), ("l2_data", norm), ("picard_residual", sol.residual)]);
                Ok(Output { reports: vec![report], files: vec![("trajectory.csv".into(), traj.to_csv())], results: res })
            });
            ("v2", job)
        }
        Verb::Solve { solver: a } => {
            let (cfg, amp) = solver(p, a, SolverDefaults { amp: None, horizon: 1.0, m_max: 8, n_max: 8 })?;
            let job: Job = Box::new(move |_| {
                let u0 = initial_data(seed, 0, &cfg, amp)?;
                let sol = picard_solve(&u0, &cfg)?;
                let mut res = results(&drift_results(&sol.trajectory));
                res.extend(results(&[
                    ("picard_residual", sol.residual),
                    ("remainder_h1", sol.remainder.sobolev_norm(1.0).value),
                    ("time_nodes", sol.nodes as f64),
                ]));
                res.insert("picard_iterations".into(), sol.increments.len().to_string());
                Ok(Output {
                    reports: Vec::new(),
                    files: vec![("trajectory.csv".into(), sol.trajectory.to_csv()), ("modes.csv".into(), sol.final_state.to_csv())],
                    results: res,
                })
            });
            ("solve", job)
        }
        Verb::Splitstep { solver: a, dt } => {
            let (mut cfg, amp) = solver(p, a, SolverDefaults { amp: None, horizon: 1.0, m_max: 8, n_max: 8 })?;
            cfg.dt = p.get("dt", *dt, cfg.dt)?;
            cfg.validate()?;
            let job: Job = Box::new(move |_| {
                let u0 = initial_data(seed, 0, &cfg, amp)?;
                let traj = split_step(&u0, &cfg)?;
                let mut res = results(&drift_results(&traj));
                res.insert("steps".into(), (traj.len() - 1).to_string());
                let last = traj.last().cloned().unwrap_or(u0);
                Ok(Output {
                    reports: Vec::new(),
                    files: vec![("trajectory.csv".into(), traj.to_csv()), ("modes.csv".into(), last.to_csv())],
                    results: res,
                })
            });
            ("splitstep", job)
        }
        Verb::D5check { solver: a, eps } => {
            let (cfg, amp) = solver(p, a, SolverDefaults { amp: Some(1.0), horizon: 0.5, m_max: 2, n_max: 1 })?;
            let eps: Vec<f64> = p.list("eps", eps.clone(), &[0.02, 0.01])?;
            for &e in &eps {
                ensure(e > 0.0 && e.is_finite(), format!("--eps: {e} must be positive"))?;
            }
            let job: Job = Box::new(move |_| {
                let h1 = initial_data(seed, 1, &cfg, amp)?;
                let h2 = initial_data(seed, 2, &cfg, amp)?;
                let check = fifth_differential_check(&h1, &h2, &cfg, &eps)?;
                let res = results(&[("relative_error", check.report.ratio)]);
                Ok(Output { reports: vec![check.report], files: vec![("modes.csv".into(), check.formula.to_csv())], results: res })
            });
            ("d5check", job)
        }
        Verb::Polarize { n1, trials } => {
            let n1s: Vec<u64> = p.list("n1", n1.clone(), &[4, 8, 16, 32, 64])?;
            ensure_dyadic("n1", &n1s)?;
            let trials = p.get("trials", *trials, 20usize)?;
            let job: Job = Box::new(move |pool| {
                let reports: Vec<EstimateReport> =
                    par_map(pool, &n1s, |&a| polarization_sweep(&[a], trials, seed))?.into_iter().flatten().collect();
                let identity = reports.iter().filter_map(|r| r.param("identity_error")).fold(0.0, f64::max);
                let mut c: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
                c.sort_by(f64::total_cmp);
                let median = if c.is_empty() { 0.0 } else { c[c.len() / 2] };
                let spread = c.iter().map(|x| (x / median - 1.0).abs()).fold(0.0, f64::max);
                let res = results(&[("max_identity_error", identity), ("median_constant", median), ("max_relative_spread", spread)]);
                Ok(Output { reports, results: res, ..Default::default() })
            });
            ("polarize", job)
        }
    })
}
