//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! suites = n4, zhu
//! mu = 0, 1/3
//! cutoff.zhu = 4
//! cache_dir = /tmp/voalab
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use voalab_core::lattice::{parse_q, q, qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    N4,
    Zhu,
    Modules,
    A2,
    Coset,
    Characters,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::N4, Suite::Zhu, Suite::Modules, Suite::A2, Suite::Coset, Suite::Characters];

    pub fn name(self) -> &'static str {
        match self {
            Suite::N4 => "n4",
            Suite::Zhu => "zhu",
            Suite::Modules => "modules",
            Suite::A2 => "a2",
            Suite::Coset => "coset",
            Suite::Characters => "characters",
        }
    }

    /// Weight cutoff used when none is configured.
    pub fn default_cutoff(self) -> Q {
        match self {
            Suite::N4 => q(5, 2),
            Suite::Zhu => qi(4),
            Suite::Modules => q(7, 2),
            Suite::A2 => qi(3),
            Suite::Coset => qi(4),
            Suite::Characters => q(7, 2),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown suite `{s}` (expected n4, zhu, modules, a2, coset, characters or all)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(ConfigError(format!("unknown format `{s}`"))),
        }
    }
}

/// Anything that maps to exit status 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub suites: Vec<Suite>,
    pub cutoffs: BTreeMap<Suite, Q>,
    pub r: Vec<Q>,
    pub mu: Vec<Q>,
    pub lambda: Vec<Q>,
    pub window: i64,
    pub samples: usize,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub timings: bool,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suites: Vec::new(),
            cutoffs: BTreeMap::new(),
            r: vec![q(1, 2)],
            mu: vec![q(1, 3)],
            lambda: vec![Q::from_integer(0)],
            window: 6,
            samples: 20,
            cache_dir: None,
            output: None,
            format: Format::Json,
            timings: false,
            jobs: 0,
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Q, ConfigError> {
    parse_q(s.trim()).map_err(|e| ConfigError(format!("bad rational `{}`: {e}", s.trim())))
}

fn parse_list(v: &str) -> Result<Vec<Q>, ConfigError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(parse_rational).collect()
}

pub fn parse_suites(v: &str) -> Result<Vec<Suite>, ConfigError> {
    let mut out = Vec::new();
    for s in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if s == "all" {
            out.extend(Suite::ALL);
        } else {
            out.push(s.parse()?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn parse_bool(v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError(format!("bad boolean `{v}`"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError(format!("line {}: expected `key = value`", no + 1)));
            };
            c.set(k.trim(), v.trim()).map_err(|e| ConfigError(format!("line {}: {e}", no + 1)))?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let int = |v: &str| v.parse::<i64>().map_err(|_| ConfigError(format!("bad integer `{v}`")));
        match key {
            "suites" => self.suites = parse_suites(v)?,
            "r" => self.r = parse_list(v)?,
            "mu" => self.mu = parse_list(v)?,
            "lambda" => self.lambda = parse_list(v)?,
            "window" => self.window = int(v)?,
            "samples" => self.samples = int(v)?.max(0) as usize,
            "cache_dir" => self.cache_dir = Some(PathBuf::from(v)),
            "output" => self.output = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            "timings" => self.timings = parse_bool(v)?,
            "jobs" => self.jobs = int(v)?.max(0) as usize,
            _ => {
                let Some(s) = key.strip_prefix("cutoff.") else {
                    return Err(ConfigError(format!("unknown key `{key}`")));
                };
                self.cutoffs.insert(s.parse()?, parse_rational(v)?);
            }
        }
        Ok(())
    }

    pub fn cutoff(&self, s: Suite) -> Q {
        self.cutoffs.get(&s).copied().unwrap_or_else(|| s.default_cutoff())
    }

    /// Cutoffs are positive half-integers; sample values must satisfy the
    /// hypotheses of the suites that use them.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let half = q(1, 2);
        for s in &self.suites {
            let c = self.cutoff(*s);
            if c <= Q::from_integer(0) || !(c * 2).is_integer() {
                return Err(ConfigError(format!("cutoff for {s} must be a positive half-integer, got {c}")));
            }
        }
        if self.window < 0 {
            return Err(ConfigError("window must be non-negative".into()));
        }
        let uses = |x: &[Suite]| self.suites.iter().any(|s| x.contains(s));
        if uses(&[Suite::Zhu, Suite::Modules, Suite::A2]) {
            for m in &self.mu {
                if (*m - half).is_integer() {
                    return Err(ConfigError(format!("mu = {m} violates mu + Z != 1/2 + Z")));
                }
            }
        }
        if uses(&[Suite::Modules, Suite::A2, Suite::Characters]) {
            for r in &self.r {
                if r.is_integer() {
                    return Err(ConfigError(format!("r = {r} must not be an integer")));
                }
            }
        }
        if uses(&[Suite::Modules, Suite::A2]) {
            for r in &self.r {
                for m in &self.mu {
                    if (*r - *m).is_integer() {
                        return Err(ConfigError(format!("r - mu = {} must not be an integer", *r - *m)));
                    }
                }
            }
        }
        if self.suites.contains(&Suite::Coset) && self.cutoff(Suite::Coset) > qi(6) {
            return Err(ConfigError("coset cutoff above 6 is refused".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let c = RunConfig::parse("# x\nsuites = n4, zhu\nmu = 0, 1/3\ncutoff.zhu = 3\nwindow = 4\n").unwrap();
        assert_eq!(c.suites, vec![Suite::N4, Suite::Zhu]);
        assert_eq!(c.mu, vec![qi(0), q(1, 3)]);
        assert_eq!(c.cutoff(Suite::Zhu), qi(3));
        assert_eq!(c.cutoff(Suite::N4), q(5, 2));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("nonsense").is_err());
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("suites = everything").is_err());
        let c = RunConfig::parse("suites = zhu\nmu = 1/2").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse("suites = zhu\ncutoff.zhu = 1/3").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn all_expands() {
        assert_eq!(parse_suites("all").unwrap().len(), 6);
    }
}
