//! Flat key=value configuration files and the flag > file > default
//! precedence chain. `#` starts a comment; values for list keys are
//! comma-separated.

use std::collections::HashMap;
use std::path::Path;

use crate::args::{CalibrationArg, FormatArg, ModelArg, ProcedureArg};
use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct ConfigMap {
    entries: HashMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "config line {}: expected key=value, got {raw:?}",
                    idx + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                CliError::config(format!("config key {key}: cannot parse {v:?}"))
            }),
        }
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.parsed(key)
    }

    pub fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.parsed(key)
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.parsed(key)
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    pub fn flag(&self, key: &str) -> CliResult<Option<bool>> {
        self.parsed(key)
    }

    pub fn f64_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|piece| {
                    piece.trim().parse::<f64>().map_err(|_| {
                        CliError::config(format!("config key {key}: cannot parse {piece:?}"))
                    })
                })
                .collect::<CliResult<Vec<f64>>>()
                .map(Some),
        }
    }

    pub fn calibration(&self, key: &str) -> CliResult<Option<CalibrationArg>> {
        self.variant(key, &[
            ("bonferroni", CalibrationArg::Bonferroni),
            ("independent", CalibrationArg::Independent),
        ])
    }

    pub fn format(&self, key: &str) -> CliResult<Option<FormatArg>> {
        self.variant(key, &[
            ("table", FormatArg::Table),
            ("json", FormatArg::Json),
            ("csv", FormatArg::Csv),
        ])
    }

    pub fn model(&self, key: &str) -> CliResult<Option<ModelArg>> {
        self.variant(key, &[
            ("gaussian", ModelArg::Gaussian),
            ("nested", ModelArg::Nested),
        ])
    }

    pub fn procedure(&self, key: &str) -> CliResult<Option<ProcedureArg>> {
        self.variant(key, &[
            ("single-step", ProcedureArg::SingleStep),
            ("closure", ProcedureArg::Closure),
        ])
    }

    fn variant<T: Copy>(&self, key: &str, table: &[(&str, T)]) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => table
                .iter()
                .find(|(name, _)| *name == v)
                .map(|&(_, value)| Some(value))
                .ok_or_else(|| {
                    CliError::config(format!("config key {key}: unknown value {v:?}"))
                }),
        }
    }
}

/// Seed resolution: flag, then config file, then TRIADIC_SEED, then 0.
pub fn resolve_seed(flag: Option<u64>, config: &ConfigMap) -> CliResult<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Some(seed) = config.u64("seed")? {
        return Ok(seed);
    }
    match std::env::var("TRIADIC_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| CliError::config(format!("TRIADIC_SEED: cannot parse {v:?}"))),
        Err(_) => Ok(0),
    }
}
