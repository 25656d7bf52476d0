//! Flat `key = value` configuration files with dotted section keys.
//!
//! Every lookup records the resolved value (including defaults) so the run
//! manifest lists exactly the parameters that were used, and keys that no
//! command consumed are reported as errors.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::CliError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug)]
pub struct Config {
    entries: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(
                    format!("line {}", n + 1),
                    "expected `key = value`",
                ));
            };
            let key = key.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_')
            {
                return Err(CliError::config(
                    format!("line {}", n + 1),
                    format!("malformed key `{key}`"),
                ));
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::config(key, "given more than once"));
            }
        }
        Ok(Config {
            entries,
            resolved: RefCell::new(BTreeMap::new()),
        })
    }

    /// Overrides (or adds) a key, as for command-line flags.
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    fn parse_value<T: FromStr>(key: &str, text: &str) -> Result<T>
    where
        T::Err: Display,
    {
        text.parse::<T>()
            .map_err(|e| CliError::config(key, format!("cannot parse `{text}`: {e}")))
    }

    pub fn get<T: FromStr + Display>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let text = self
            .entries
            .get(key)
            .ok_or_else(|| CliError::config(key, "required key is missing"))?;
        let v = Self::parse_value(key, text)?;
        self.record(key, text.clone());
        Ok(v)
    }

    pub fn get_or<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        if self.has(key) {
            self.get(key)
        } else {
            self.record(key, default.to_string());
            Ok(default)
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let text = self
            .entries
            .get(key)
            .ok_or_else(|| CliError::config(key, "required key is missing"))?;
        let items = text
            .split(',')
            .map(|s| Self::parse_value(key, s.trim()))
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(CliError::config(key, "list is empty"));
        }
        self.record(key, text.clone());
        Ok(items)
    }

    pub fn list_or<T: FromStr + Display>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        if self.has(key) {
            self.list(key)
        } else {
            let text = default
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            self.record(key, text);
            Ok(default)
        }
    }

    /// Fails on keys present in the file but never looked up.
    pub fn reject_unused(&self) -> Result<()> {
        let resolved = self.resolved.borrow();
        match self.entries.keys().find(|k| !resolved.contains_key(*k)) {
            Some(k) => Err(CliError::config(k, "unknown key for this command")),
            None => Ok(()),
        }
    }

    /// Resolved parameters in key order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.resolved
            .borrow()
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}
