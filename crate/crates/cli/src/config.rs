//! Run configuration: a flat `key = value` set merged from a config file and
//! command-line flags, and the JSON manifest recording what a run resolved.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::CliError;

/// Settings from a config file plus everything resolved so far.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    /// Loads a `key = value` file, or the `config` object of a previous
    /// run's JSON manifest.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let file = if text.trim_start().starts_with('{') {
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad manifest {}: {e}", path.display())))?;
            let cfg = doc
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| CliError::Config(format!("manifest {} has no config object", path.display())))?;
            cfg.iter()
                .map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string)))
                .collect()
        } else {
            parse_config(&text)?
        };
        Ok(Self { file, resolved: BTreeMap::new() })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.file.get(key).map(String::as_str)
    }

    /// Flag, else config file, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Flag, else config file, else nothing.
    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.raw(key) {
                Some(s) => Some(s.parse::<T>().map_err(|e| CliError::Config(format!("{key} = {s}: {e}")))?),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    /// A boolean switch: the flag when given, else the config file, else false.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        self.get(key, flag.then_some(true), false)
    }

    /// Comma-separated list.
    pub fn list<T>(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let text = self.get(key, flag, default.to_string())?;
        parse_list(key, &text)
    }

    /// Comma-separated list with no default.
    pub fn opt_list<T>(&mut self, key: &str, flag: Option<String>) -> Result<Option<Vec<T>>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(key, flag)?.map(|t: String| parse_list(key, &t)).transpose()
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

pub fn parse_list<T>(key: &str, text: &str) -> Result<Vec<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| CliError::Config(format!("{key}: '{s}': {e}"))))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

/// Written next to the outputs of every run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    /// Every setting the run resolved, in `key = value` form.
    pub config: &'a BTreeMap<String, String>,
    pub outputs: &'a [String],
    pub exit_code: i32,
}
