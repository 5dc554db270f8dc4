//! Flat key=value experiment configuration with `[section]` headers.
//!
//! The format is deliberately minimal: one `key = value` per line, `#`
//! comments, no nesting, no quoting. Errors carry the full `section.key`
//! field path. A parsed config can re-emit itself in canonical form, which
//! the commands copy into their output directory for provenance.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// `section.key` or `line N`.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config {}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parsed sections, keys, and raw values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::from("global");
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(format!("line {}", ln + 1), "unclosed section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(ConfigError::new(format!("line {}", ln + 1), "empty section name"));
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("line {}", ln + 1), "expected key = value")
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::new(format!("line {}", ln + 1), "empty key"));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), value).is_some() {
                return Err(ConfigError::new(
                    format!("{current}.{key}"),
                    "duplicate key",
                ));
            }
        }
        Ok(Config { sections })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new(path.display().to_string(), format!("cannot read: {e}"))
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|v| v.as_str())
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value);
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get(section, key)
            .ok_or_else(|| ConfigError::new(format!("{section}.{key}"), "missing required key"))
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                ConfigError::new(format!("{section}.{key}"), format!("not a number: '{v}'"))
            }),
        }
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                ConfigError::new(format!("{section}.{key}"), format!("not an integer: '{v}'"))
            }),
        }
    }

    pub fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(ConfigError::new(
                format!("{section}.{key}"),
                format!("not a boolean: '{v}'"),
            )),
        }
    }

    pub fn str_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.get(section, key).unwrap_or(default)
    }

    /// Comma- or whitespace-separated list of integers.
    pub fn usize_list(&self, section: &str, key: &str) -> Result<Option<Vec<usize>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => parse_list(v)
                .map(Some)
                .map_err(|msg| ConfigError::new(format!("{section}.{key}"), msg)),
        }
    }

    pub fn u64_list(&self, section: &str, key: &str) -> Result<Option<Vec<u64>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => parse_list(v)
                .map(Some)
                .map_err(|msg| ConfigError::new(format!("{section}.{key}"), msg)),
        }
    }

    /// `lo hi` pair.
    pub fn range_or(
        &self,
        section: &str,
        key: &str,
        default: (f64, f64),
    ) -> Result<(f64, f64), ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                let bad =
                    || ConfigError::new(format!("{section}.{key}"), format!("expected 'lo hi': '{v}'"));
                if parts.len() != 2 {
                    return Err(bad());
                }
                let lo: f64 = parts[0].parse().map_err(|_| bad())?;
                let hi: f64 = parts[1].parse().map_err(|_| bad())?;
                if !(hi > lo) {
                    return Err(bad());
                }
                Ok((lo, hi))
            }
        }
    }

    /// Canonical re-emission: sections and keys in sorted order.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (section, entries) in &self.sections {
            out.push_str(&format!("[{section}]\n"));
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
            out.push('\n');
        }
        out
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    let items: Vec<&str> = v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err("empty list".to_string());
    }
    items
        .iter()
        .map(|s| s.parse().map_err(|_| format!("bad list item '{s}'")))
        .collect()
}

/// Parses a `--seed-list 1,2,3` style argument.
pub fn parse_seed_list(v: &str) -> Result<Vec<u64>, ConfigError> {
    parse_list(v).map_err(|msg| ConfigError::new("--seed-list", msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
[experiment]
kind = rate
target = target1d

[rate]
n_list = 16, 32, 64, 128
seeds = 1 2 3
";

    #[test]
    fn parse_and_get() {
        let cfg = Config::parse(SAMPLE).unwrap();
        assert_eq!(cfg.get("experiment", "kind"), Some("rate"));
        assert_eq!(cfg.usize_list("rate", "n_list").unwrap().unwrap(), vec![16, 32, 64, 128]);
        assert_eq!(cfg.u64_list("rate", "seeds").unwrap().unwrap(), vec![1, 2, 3]);
        assert_eq!(cfg.get("rate", "missing"), None);
    }

    #[test]
    fn errors_carry_field_paths() {
        let cfg = Config::parse(SAMPLE).unwrap();
        let err = cfg.require("rate", "weight").unwrap_err();
        assert_eq!(err.path, "rate.weight");
        let err = Config::parse("[a]\nkey = 1\nkey = 2\n").unwrap_err();
        assert_eq!(err.path, "a.key");
        let err = Config::parse("loose line\n").unwrap_err();
        assert!(err.path.starts_with("line "));
    }

    #[test]
    fn typed_getters_validate() {
        let cfg = Config::parse("[s]\nx = notanumber\n").unwrap();
        assert!(cfg.f64_or("s", "x", 0.0).is_err());
        assert_eq!(cfg.f64_or("s", "absent", 2.5).unwrap(), 2.5);
        let cfg = Config::parse("[s]\nbox = -3 3\n").unwrap();
        assert_eq!(cfg.range_or("s", "box", (0.0, 1.0)).unwrap(), (-3.0, 3.0));
        assert!(Config::parse("[s]\nbox = 3 -3\n")
            .unwrap()
            .range_or("s", "box", (0.0, 1.0))
            .is_err());
    }

    #[test]
    fn echo_is_stable_and_reparseable() {
        let cfg = Config::parse(SAMPLE).unwrap();
        let echoed = cfg.echo();
        let back = Config::parse(&echoed).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(echoed, back.echo());
    }
}
