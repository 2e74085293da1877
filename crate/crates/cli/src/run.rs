//! Run directories: `<out>/<timestamp>-seed<seed>/` with report.csv, verb-specific CSVs
//! and manifest.txt.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use s1s2_core::report::{format_key_values, reports_to_csv, EstimateReport};

use crate::params::Params;
use crate::{verbs, Cli, CliError};

/// What a verb hands back for writing.
#[derive(Default)]
pub struct Output {
    pub reports: Vec<EstimateReport>,
    /// Extra CSV files (name, body).
    pub files: Vec<(String, String)>,
    pub results: BTreeMap<String, String>,
}

pub fn execute(cli: Cli) -> Result<PathBuf, CliError> {
    let mut params = Params::new(cli.config.as_deref())?;
    let seed = params.get("seed", cli.seed, 7u64)?;
    let (verb, job) = verbs::prepare(&cli.verb, &mut params, seed)?;
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;

    let started = chrono::Utc::now();
    let clock = Instant::now();
    let output = job(&pool)?;
    let runtime_ms = clock.elapsed().as_millis();

    let dir = create_run_dir(&cli.out, &started.format("%Y%m%dT%H%M%S%.3fZ").to_string(), seed)?;
    write(&dir.join("report.csv"), &reports_to_csv(&output.reports))?;
    for (name, body) in &output.files {
        write(&dir.join(name), body)?;
    }

    let mut manifest = BTreeMap::new();
    manifest.insert("verb".to_string(), verb.to_string());
    manifest.insert("seed".to_string(), seed.to_string());
    manifest.insert("timestamp".to_string(), started.to_rfc3339());
    manifest.insert("runtime_ms".to_string(), runtime_ms.to_string());
    manifest.insert("workers".to_string(), workers.to_string());
    manifest.insert("version.s1s2".to_string(), env!("CARGO_PKG_VERSION").to_string());
    manifest.insert("version.s1s2-core".to_string(), s1s2_core::VERSION.to_string());
    for (k, v) in &params.resolved {
        manifest.insert(format!("param.{k}"), v.clone());
    }
    for (k, v) in &output.results {
        manifest.insert(format!("result.{k}"), v.clone());
    }
    write(&dir.join("manifest.txt"), &format_key_values(&manifest))?;
    Ok(dir)
}

fn create_run_dir(out: &Path, stamp: &str, seed: u64) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("creating {}: {e}", out.display())))?;
    for k in 0u32.. {
        let name = if k == 0 { format!("{stamp}-seed{seed}") } else { format!("{stamp}-seed{seed}-{k}") };
        let dir = out.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::Io(format!("creating {}: {e}", dir.display()))),
        }
    }
    unreachable!()
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
