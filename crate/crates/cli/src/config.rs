//! Optional `key = value` config file standing in for flags.
//!
//! Keys are the long flag names (`t0`, `dim`, `min-count`, ...). Flags
//! always override file values. List-valued keys (`measure`,
//! `aggregation`) take comma-separated values.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected `key = value`, got {line:?}",
                    path.display(),
                    idx + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn parse<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.values
            .get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|e| anyhow::anyhow!("config key {key:?}: {e}"))
            })
            .transpose()
    }

    pub fn parse_list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.values
            .get(key)
            .map(|raw| {
                raw.split(',')
                    .map(str::trim)
                    .filter(|part| !part.is_empty())
                    .map(|part| {
                        part.parse()
                            .map_err(|e| anyhow::anyhow!("config key {key:?}: {e}"))
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Flag value, then config value, then a required-flag error.
pub fn required<T>(flag: Option<T>, config: &FileConfig, key: &str) -> Result<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    match flag {
        Some(value) => Ok(value),
        None => config
            .parse(key)?
            .with_context(|| format!("missing --{key} (flag or config file)")),
    }
}

/// Flag value, then config value; absent is fine.
pub fn optional<T>(flag: Option<T>, config: &FileConfig, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    match flag {
        Some(value) => Ok(Some(value)),
        None => config.parse(key),
    }
}

/// Flag value, then config value, then the default.
pub fn or_default<T>(flag: Option<T>, config: &FileConfig, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    Ok(match flag {
        Some(value) => value,
        None => config.parse(key)?.unwrap_or(default),
    })
}

/// Repeatable flag, then comma-separated config list, then the default.
pub fn list_or_default<T>(
    flags: &[String],
    config: &FileConfig,
    key: &str,
    default: Vec<T>,
) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if !flags.is_empty() {
        return flags
            .iter()
            .map(|raw| {
                raw.parse()
                    .map_err(|e| anyhow::anyhow!("--{key} {raw:?}: {e}"))
            })
            .collect();
    }
    Ok(config.parse_list(key)?.unwrap_or(default))
}
