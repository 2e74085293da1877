//! Parameter resolution: built-in defaults < config file < command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use s1s2_core::report::parse_key_values;

use crate::CliError;

/// Resolved parameters of one invocation, recorded verbatim in the manifest.
pub struct Params {
    file: BTreeMap<String, String>,
    pub resolved: BTreeMap<String, String>,
}

impl Params {
    pub fn new(config: Option<&std::path::Path>) -> Result<Self, CliError> {
        let file = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
                parse_key_values(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        Ok(Params { file, resolved: BTreeMap::new() })
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("config key `{key}` = `{v}`: {e}"))))
            .transpose()
    }

    fn record<T: Display>(&mut self, key: &str, v: &T) {
        self.resolved.insert(key.to_string(), v.to_string());
    }

    pub fn get<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn required<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self
                .from_file(key)?
                .ok_or_else(|| CliError::Usage(format!("missing required parameter --{key}")))?,
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<String>, default: &[T]) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        let text = flag.or_else(|| self.file.get(key).cloned());
        let v = match text {
            Some(t) => parse_list(key, &t)?,
            None => default.to_vec(),
        };
        let shown: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.resolved.insert(key.to_string(), shown.join(","));
        Ok(v)
    }

    /// Comma-separated list without a default; `shown` is recorded when absent.
    pub fn opt_list<T: FromStr + Display>(&mut self, key: &str, flag: Option<String>, shown: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: Display,
    {
        let text = flag.or_else(|| self.file.get(key).cloned());
        let v = text.map(|t| parse_list::<T>(key, &t)).transpose()?;
        let rec = match &v {
            Some(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            None => shown.to_string(),
        };
        self.resolved.insert(key.to_string(), rec);
        Ok(v)
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = flag || self.from_file::<bool>(key)?.unwrap_or(false);
        self.record(key, &v);
        Ok(v)
    }
}

pub fn parse_list<T: FromStr>(key: &str, text: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    let v: Vec<T> = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| CliError::Usage(format!("--{key}: `{s}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(CliError::Usage(format!("--{key} must not be empty")));
    }
    Ok(v)
}

/// Dyadic values 1, 2, 4, … up to `top`.
pub fn dyadic_up_to(top: u64) -> Vec<u64> {
    (0..63).map(|k| 1u64 << k).take_while(|&b| b <= top).collect()
}

pub fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Usage(msg.into()))
    }
}

pub fn ensure_dyadic(key: &str, values: &[u64]) -> Result<(), CliError> {
    for &v in values {
        ensure(s1s2_core::spectrum::is_dyadic(v), format!("--{key}: {v} is not a power of two"))?;
    }
    Ok(())
}
