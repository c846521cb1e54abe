//! Flat `key=value` configuration files.
//!
//! Keys are the long flag names without dashes. Blank lines and lines
//! starting with `#` are skipped.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
        Self::parse(&text).with_context(|| format!("{}: bad config", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
            let key = k.trim().trim_start_matches("--").to_string();
            if key.is_empty() {
                bail!("line {}: empty key", i + 1);
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Flag value if given, else the config entry, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow!("config key {key}: cannot parse {raw:?}: {e}")),
            None => Ok(default),
        }
    }

    pub fn pick_flag(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        self.pick(None, key, false)
    }
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse().map_err(|e| anyhow!("cannot parse {s:?} in list {raw:?}: {e}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let c = Config::parse("# comment\nalpha = 100\n\n--temp=77\n").unwrap();
        assert_eq!(c.pick(Some(5.0), "alpha", 150.0).unwrap(), 5.0);
        assert_eq!(c.pick(None, "alpha", 150.0).unwrap(), 100.0);
        assert_eq!(c.pick(None, "temp", 300.0).unwrap(), 77.0);
        assert_eq!(c.pick(None, "window", 1.0).unwrap(), 1.0);
        assert!(Config::parse("novalue").is_err());
        assert!(c.pick::<u32>(None, "alpha", 1).is_ok());
        let bad = Config::parse("alpha=fast").unwrap();
        assert!(bad.pick::<f64>(None, "alpha", 1.0).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u32>("10, 10").unwrap(), vec![10, 10]);
        assert!(parse_list::<u32>("1,x").is_err());
    }
}
