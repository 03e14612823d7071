//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! fit_mode = arcfit
//! class.tertiary.lanes_left = 1
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: u32, message: String },
    #[error("config key `{key}` (line {line}): {message}")]
    Value { key: String, line: u32, message: String },
    #[error("unknown config key `{key}` (line {line})")]
    UnknownKey { key: String, line: u32 },
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<KeyValues, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx as u32 + 1;
            let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") })?;
            let key = k.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax { line, message: format!("invalid key `{key}`") });
            }
            let value = v.trim().to_string();
            if let Some(prev) = entries.insert(key.to_string(), Entry { value, line }) {
                return Err(ConfigError::Syntax { line, message: format!("`{key}` already set on line {}", prev.line) });
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn line(&self, key: &str) -> u32 {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parsed value of `key`, or `None` when absent.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| ConfigError::Value {
                key: key.to_string(),
                line: e.line,
                message: format!("cannot parse `{}`: {err}", e.value),
            }),
        }
    }

    /// Overwrites `slot` when `key` is present.
    pub fn set<T: FromStr>(&self, key: &str, slot: &mut T) -> Result<(), ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.parsed(key)? {
            *slot = v;
        }
        Ok(())
    }

    pub fn value_error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value { key: key.to_string(), line: self.line(key), message: message.into() }
    }

    /// Fails on the first key not accepted by `known`.
    pub fn reject_unknown(&self, known: impl Fn(&str) -> bool) -> Result<(), ConfigError> {
        match self.entries.iter().find(|(k, _)| !known(k)) {
            Some((k, e)) => Err(ConfigError::UnknownKey { key: k.clone(), line: e.line }),
            None => Ok(()),
        }
    }
}
