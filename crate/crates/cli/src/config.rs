//! Plain-text `key = value` configuration files.
//!
//! Keys are the long flag names (`t-max`, `dt-sample`, ...); underscores are
//! accepted in place of hyphens. Blank lines and lines starting with `#` are
//! skipped.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "config line {}: expected key=value, got {line:?}",
                    k + 1
                ))
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::usage(format!("config line {}: empty key", k + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Rejects keys outside `allowed`, so typos do not pass silently.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(key) => Err(CliError::usage(format!("unknown config key {key:?}"))),
            None => Ok(()),
        }
    }

    /// The flag value if given, otherwise the parsed config entry.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::usage(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    pub fn pick_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|v| {
                T::from_str(v, true).map_err(|e| CliError::usage(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    pub fn pick_list<T: ValueEnum>(
        &self,
        flag: Option<Vec<T>>,
        key: &str,
    ) -> CliResult<Option<Vec<T>>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        T::from_str(item.trim(), true)
                            .map_err(|e| CliError::usage(format!("config key {key}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}
