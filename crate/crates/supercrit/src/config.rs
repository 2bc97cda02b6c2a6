//! Flat key-value run configuration.
//!
//! A config file is plain text: one `key = value` pair per line, `#` starts
//! a comment, blank lines are ignored.  Keys mirror the long flag names
//! one-to-one (including dashes).  Resolution order per key is flag, then
//! config file, then built-in default; the fully resolved values are echoed
//! into every report under `"config"` so artifacts are self-describing.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Parsed config file contents.
#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// An empty configuration (no file given).
    #[must_use]
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; rejects malformed or duplicate keys.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::validation(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(CliError::validation(format!(
                    "config line {}: empty key",
                    lineno + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(CliError::validation(format!(
                    "config line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Loads a config file, or returns the empty configuration.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::empty()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::validation(format!(
                        "cannot read config file {}: {e}",
                        p.display()
                    ))
                })?;
                Self::parse(&text)
            }
        }
    }

    /// Raw lookup.
    #[must_use]
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Per-run resolver: answers each parameter query from flag, config file, or
/// default, and records the resolved value for the report echo.
#[derive(Debug)]
pub struct Resolver<'a> {
    cfg: &'a ConfigMap,
    echo: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    /// Starts a resolution pass over `cfg`.
    #[must_use]
    pub fn new(cfg: &'a ConfigMap) -> Self {
        Self {
            cfg,
            echo: BTreeMap::new(),
        }
    }

    fn record<T: Display>(&mut self, key: &str, value: &T) {
        self.echo.insert(key.to_string(), value.to_string());
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.cfg.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::validation(format!(
                    "config key `{key}`: cannot parse `{raw}`"
                ))
            }),
        }
    }

    /// Resolves a scalar parameter.
    pub fn scalar<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError> {
        let value = match flag {
            Some(v) => v,
            None => self.from_file::<T>(key)?.unwrap_or(default),
        };
        self.record(key, &value);
        Ok(value)
    }

    /// Resolves an optional parameter (no default; absent stays absent).
    pub fn optional<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, CliError> {
        let value = match flag {
            Some(v) => Some(v),
            None => self.from_file::<T>(key)?,
        };
        match &value {
            Some(v) => self.record(key, v),
            None => self.record(key, &"auto"),
        }
        Ok(value)
    }

    /// Resolves a comma-separated coordinate vector.
    pub fn vector(
        &mut self,
        key: &str,
        flag: Option<String>,
        default: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        let raw = match flag {
            Some(v) => Some(v),
            None => self.cfg.get(key).map(str::to_string),
        };
        let value = match raw {
            None => default.to_vec(),
            Some(text) => parse_vector(key, &text)?,
        };
        let rendered: Vec<String> = value.iter().map(f64::to_string).collect();
        self.echo.insert(key.to_string(), rendered.join(","));
        Ok(value)
    }

    /// Finishes the pass, yielding the echo map for the report.
    #[must_use]
    pub fn into_echo(self) -> BTreeMap<String, String> {
        self.echo
    }
}

/// Parses a comma-separated list of floats.
pub fn parse_vector(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                CliError::validation(format!(
                    "`{key}`: cannot parse `{part}` as a number"
                ))
            })
        })
        .collect()
}

/// Parses a semicolon-separated list of comma-separated rows.
pub fn parse_rows(key: &str, text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .map(|row| parse_vector(key, row))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_pairs() {
        let cfg = ConfigMap::parse(
            "# header\n\n r-min = 0.05  # inline\n field = u.json\n",
        )
        .unwrap();
        assert_eq!(cfg.get("r-min"), Some("0.05"));
        assert_eq!(cfg.get("field"), Some("u.json"));
        assert_eq!(cfg.get("missing"), None);
    }

    #[test]
    fn rejects_malformed_lines_and_duplicates() {
        assert!(ConfigMap::parse("just words\n").is_err());
        assert!(ConfigMap::parse("= 3\n").is_err());
        assert!(ConfigMap::parse("a = 1\na = 2\n").is_err());
    }

    #[test]
    fn flags_beat_file_beats_default() {
        let cfg = ConfigMap::parse("r = 0.25\n").unwrap();
        let mut res = Resolver::new(&cfg);
        assert_eq!(res.scalar("r", Some(0.5), 1.0).unwrap(), 0.5);
        assert_eq!(res.scalar("k", None::<usize>, 2).unwrap(), 2);
        let mut res2 = Resolver::new(&cfg);
        assert_eq!(res2.scalar("r", None, 1.0).unwrap(), 0.25);
        let echo = res2.into_echo();
        assert_eq!(echo.get("r").map(String::as_str), Some("0.25"));
    }

    #[test]
    fn vectors_render_back_into_the_echo() {
        let cfg = ConfigMap::empty();
        let mut res = Resolver::new(&cfg);
        let v = res
            .vector("center", Some("0.5, -1, 2".to_string()), &[0.0])
            .unwrap();
        assert_eq!(v, vec![0.5, -1.0, 2.0]);
        assert_eq!(
            res.into_echo().get("center").map(String::as_str),
            Some("0.5,-1,2")
        );
    }
}
