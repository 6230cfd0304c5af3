//! Merging command-line flags with an optional `key=value` config file.
//!
//! Keys are long flag names without the leading dashes (`lr`, `sigma-low`;
//! underscores are accepted for dashes). Blank lines and lines starting with
//! `#` are ignored. Flags given on the command line take precedence. A key the
//! subcommand does not understand is an error.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::Failure;

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("config line {}: expected key=value", n + 1)))?;
            let key = normalize(k);
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Failure::Config(format!("config line {}: duplicate key {key:?}", n + 1)));
            }
        }
        Ok(ConfigFile {
            values,
            used: BTreeSet::new(),
        })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Io(format!("cannot read config {}: {e}", p.display())))?;
                ConfigFile::parse(&text)
            }
        }
    }

    /// The flag's value if given, otherwise the file's value for `key`.
    pub fn pick<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Failure::Config(format!("config key {key}: {e}"))),
        }
    }

    pub fn pick_or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }

    /// A boolean switch: set by the flag, or by `key=true` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, Failure> {
        Ok(flag || self.pick::<bool>(key, None)?.unwrap_or(false))
    }

    /// Fails on keys that no `pick` asked for.
    pub fn finish_ref(&self) -> Result<(), Failure> {
        let unknown: Vec<&String> = self.values.keys().filter(|k| !self.used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Failure::Config(format!("unknown config keys: {unknown:?}")))
        }
    }
}
