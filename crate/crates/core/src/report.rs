//! Estimate reports and their CSV form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which estimate a report measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimateId {
    Count,
    ExpSum,
    ExpSumMixed,
    Sector,
    Cluster,
    Trilinear,
    L6,
    OffDiagonal,
    SupNorm,
    V2,
    FifthDifferential,
    Polarization,
}

impl EstimateId {
    pub const ALL: [EstimateId; 12] = [
        EstimateId::Count,
        EstimateId::ExpSum,
        EstimateId::ExpSumMixed,
        EstimateId::Sector,
        EstimateId::Cluster,
        EstimateId::Trilinear,
        EstimateId::L6,
        EstimateId::OffDiagonal,
        EstimateId::SupNorm,
        EstimateId::V2,
        EstimateId::FifthDifferential,
        EstimateId::Polarization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimateId::Count => "count",
            EstimateId::ExpSum => "expsum",
            EstimateId::ExpSumMixed => "expsum_mixed",
            EstimateId::Sector => "sector",
            EstimateId::Cluster => "cluster",
            EstimateId::Trilinear => "trilinear",
            EstimateId::L6 => "l6",
            EstimateId::OffDiagonal => "offdiag",
            EstimateId::SupNorm => "supnorm",
            EstimateId::V2 => "v2",
            EstimateId::FifthDifferential => "d5check",
            EstimateId::Polarization => "polarize",
        }
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EstimateId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown estimate id `{s}`")))
    }
}

/// One measured estimate instance.
///
/// `ratio` is always `lhs / rhs_bound`; the constructor enforces it.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate_id: EstimateId,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs_bound: f64,
    pub ratio: f64,
    pub trials: u64,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl EstimateReport {
    pub fn new(
        estimate_id: EstimateId,
        params: &[(&str, f64)],
        lhs: f64,
        rhs_bound: f64,
        trials: u64,
        seed: u64,
    ) -> Self {
        debug_assert!(lhs.is_finite() && lhs >= 0.0, "lhs = {lhs}");
        debug_assert!(rhs_bound.is_finite() && rhs_bound > 0.0, "rhs = {rhs_bound}");
        EstimateReport {
            estimate_id,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs_bound,
            ratio: lhs / rhs_bound,
            trials,
            seed,
            runtime_ms: 0,
        }
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn with_runtime(mut self, ms: u64) -> Self {
        self.runtime_ms = ms;
        self
    }
}

pub const REPORT_HEADER: &str = "estimate_id,params,lhs,rhs_bound,ratio,trials,seed,runtime_ms";

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
}

impl EstimateReport {
    /// Params are packed as `key=value` pairs joined by `;` in key order.
    pub fn to_csv_row(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt_f64(*v)))
            .collect();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.estimate_id,
            params.join(";"),
            fmt_f64(self.lhs),
            fmt_f64(self.rhs_bound),
            fmt_f64(self.ratio),
            self.trials,
            self.seed,
            self.runtime_ms
        )
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let cols: Vec<&str> = row.trim_end().split(',').collect();
        if cols.len() != 8 {
            return Err(Error::Parse(format!("expected 8 columns, got {}", cols.len())));
        }
        let mut params = BTreeMap::new();
        if !cols[1].is_empty() {
            for kv in cols[1].split(';') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad param `{kv}`")))?;
                params.insert(k.to_string(), parse_f64(v)?);
            }
        }
        Ok(EstimateReport {
            estimate_id: cols[0].parse()?,
            params,
            lhs: parse_f64(cols[2])?,
            rhs_bound: parse_f64(cols[3])?,
            ratio: parse_f64(cols[4])?,
            trials: parse_u64(cols[5])?,
            seed: parse_u64(cols[6])?,
            runtime_ms: parse_u64(cols[7])?,
        })
    }
}

/// Header plus rows, sorted into canonical parameter order.
pub fn reports_to_csv(reports: &[EstimateReport]) -> String {
    let mut rows: Vec<&EstimateReport> = reports.iter().collect();
    rows.sort_by(|a, b| {
        a.estimate_id.cmp(&b.estimate_id).then_with(|| {
            let ka: Vec<(&String, f64)> = a.params.iter().map(|(k, v)| (k, *v)).collect();
            let kb: Vec<(&String, f64)> = b.params.iter().map(|(k, v)| (k, *v)).collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

pub fn reports_from_csv(text: &str) -> Result<Vec<EstimateReport>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == REPORT_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(EstimateReport::from_csv_row)
        .collect()
}

/// Flat `key = value` text, `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn format_key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ratio_is_lhs_over_rhs() {
        let r = EstimateReport::new(EstimateId::L6, &[("N", 4.0)], 3.0, 2.0, 5, 7);
        assert_eq!(r.ratio, 1.5);
        assert_eq!(r.param("N"), Some(4.0));
    }

    #[test]
    fn header_mismatch_is_rejected() {
        assert!(reports_from_csv("a,b\n").is_err());
    }

    #[test]
    fn key_values_skip_comments() {
        let m = parse_key_values("# grid\nseed = 7\n\ntrials=50 # inline\n").unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["trials"], "50");
        assert!(parse_key_values("novalue\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_row_round_trips(lhs in 0.0f64..1e6, rhs in 1e-6f64..1e6, n in 1u32..1024,
                               trials in 0u64..1000, seed in any::<u64>()) {
            let r = EstimateReport::new(EstimateId::Trilinear,
                &[("N1", n as f64), ("p", 6.0), ("eps", 0.1)], lhs, rhs, trials, seed);
            let back = EstimateReport::from_csv_row(&r.to_csv_row()).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
