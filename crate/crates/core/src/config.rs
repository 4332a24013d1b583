//! Flat `key = value` configuration files with optional `[section]` blocks.
//!
//! ```text
//! # global keys
//! sizes = 50,100,250
//! replications = 20
//!
//! [ar1]
//! a = 0.6
//! ```
//!
//! Run manifests are written in the same format, so a manifest can be fed back
//! through `--config` to reproduce a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// An ordered set of key/value pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    pub name: String,
    entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Sets `key`, replacing an existing value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    /// Parses `key` if present.
    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| Error::Parse {
                location: self.location(key),
                message: format!("cannot parse '{raw}'"),
            }),
        }
    }

    /// Parses a comma-separated list under `key` if present.
    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>().map_err(|_| Error::Parse {
                        location: self.location(key),
                        message: format!("cannot parse list item '{s}'"),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Fails on the first key outside `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!("unknown key '{k}' in {}", self.describe()))),
            None => Ok(()),
        }
    }

    fn describe(&self) -> String {
        if self.name.is_empty() {
            "global section".into()
        } else {
            format!("section [{}]", self.name)
        }
    }

    fn location(&self, key: &str) -> String {
        format!("{} key '{key}'", self.describe())
    }
}

/// A parsed configuration: the unnamed global section plus named sections in
/// file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvConfig {
    pub global: Section,
    pub sections: Vec<Section>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = KvConfig::default();
        let mut current: Option<Section> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Parse {
                        location: format!("line {}", i + 1),
                        message: "empty section name".into(),
                    });
                }
                if let Some(done) = current.take() {
                    cfg.sections.push(done);
                }
                current = Some(Section::new(name));
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    location: format!("line {}", i + 1),
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    location: format!("line {}", i + 1),
                    message: "empty key".into(),
                });
            }
            let target = current.as_mut().unwrap_or(&mut cfg.global);
            target.set(key, value.trim());
        }
        if let Some(done) = current {
            cfg.sections.push(done);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.global.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}]", s.name);
            for (k, v) in s.entries() {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    /// Key/value view of the global section.
    pub fn global_map(&self) -> BTreeMap<&str, &str> {
        self.global
            .entries()
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }
}
