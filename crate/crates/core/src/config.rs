//! `key = value` configuration text with `#` comments.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        KeyValues::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on the first key not in `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(Error::Parse(format!(
                "unknown key {k:?} (expected one of {})",
                known.join(", ")
            ))),
            None => Ok(()),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Parse(format!("key {key:?}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Parse(format!("missing required key {key:?}")))
    }

    /// Comma- or whitespace-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|e| Error::Parse(format!("key {key:?}: cannot parse {s:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}
