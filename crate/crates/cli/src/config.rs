//! Flat `key = value` configuration files.
//!
//! `#` starts a comment, blank lines are ignored, and `-` and `_` are
//! interchangeable in keys. Every error names the offending line.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{parse_error, Result};

#[derive(Debug)]
pub struct KeyValues {
    origin: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn empty() -> Self {
        KeyValues { origin: String::new(), entries: BTreeMap::new() }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_error(origin, line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(parse_error(origin, line, "empty key"));
            }
            if let Some((first, _)) = entries.insert(key.clone(), (line, value.trim().to_string())) {
                return Err(parse_error(origin, line, format!("`{key}` already set on line {first}")));
            }
        }
        Ok(KeyValues { origin: origin.to_string(), entries })
    }

    /// Removes and parses `key`.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|e| parse_error(&self.origin, line, format!("invalid value `{value}` for `{key}`: {e}"))),
        }
    }

    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(Some(true)),
                "false" | "no" | "0" | "off" => Ok(Some(false)),
                _ => Err(parse_error(&self.origin, line, format!("`{key}` expects true or false, got `{value}`"))),
            },
        }
    }

    /// Comma-separated list.
    pub fn take_list<T>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => value
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse()
                        .map_err(|e| parse_error(&self.origin, line, format!("invalid item `{item}` in `{key}`: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// Fails on the first key nobody asked for.
    pub fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((key, (line, _))) => Err(parse_error(&self.origin, *line, format!("unknown key `{key}`"))),
        }
    }
}
