//! Run configuration: a flat `key = value` file merged with command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use gl2dual::{QuadConfig, C64};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    Value { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Theorem1,
    Example2f1,
    Selberg,
    Asymptotics,
    Operators,
    Solutions,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Example2f1 => "example2f1",
            Suite::Selberg => "selberg",
            Suite::Asymptotics => "asymptotics",
            Suite::Operators => "operators",
            Suite::Solutions => "solutions",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Suite as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Every setting that may come from the file or from flags. Unset fields fall
/// back to the defaults of the selected suite.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Settings {
    pub suite: Option<Suite>,
    pub m1: Option<C64>,
    pub m2: Option<i64>,
    pub l2: Option<i64>,
    pub kappa: Option<f64>,
    pub z: Option<C64>,
    pub mu: Option<C64>,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub rel_tol: Option<f64>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Option<Format>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value { key: key.into(), value: value.into() })
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "suite" => self.suite = Some(parse(key, value)?),
            "m1" => self.m1 = Some(parse(key, value)?),
            "m2" => self.m2 = Some(parse(key, value)?),
            "l2" => self.l2 = Some(parse(key, value)?),
            "kappa" => self.kappa = Some(parse(key, value)?),
            "z" => self.z = Some(parse(key, value)?),
            "mu" => self.mu = Some(parse(key, value)?),
            "a" => self.a = Some(parse(key, value)?),
            "b" => self.b = Some(parse(key, value)?),
            "rel_tol" | "rel-tol" => self.rel_tol = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(parse(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            }
            s.set(key, value)?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Settings::parse_text(&text)
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overridden_by(self, flags: Settings) -> Settings {
        Settings {
            suite: flags.suite.or(self.suite),
            m1: flags.m1.or(self.m1),
            m2: flags.m2.or(self.m2),
            l2: flags.l2.or(self.l2),
            kappa: flags.kappa.or(self.kappa),
            z: flags.z.or(self.z),
            mu: flags.mu.or(self.mu),
            a: flags.a.or(self.a),
            b: flags.b.or(self.b),
            rel_tol: flags.rel_tol.or(self.rel_tol),
            seed: flags.seed.or(self.seed),
            out: flags.out.or(self.out),
            format: flags.format.or(self.format),
        }
    }

    /// True if any of the point coordinates was given.
    pub fn has_point(&self) -> bool {
        self.m1.is_some() || self.kappa.is_some() || self.z.is_some() || self.mu.is_some()
    }

    /// Quadrature settings; `default` applies when no tolerance was given.
    pub fn quad_or(&self, default: f64) -> Result<QuadConfig, ConfigError> {
        let q = QuadConfig::with_rel_tol(self.rel_tol.unwrap_or(default));
        q.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(q)
    }

    /// Sanity checks that do not depend on the suite.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(k) = self.kappa {
            if !(k.is_finite() && k > 0.0) {
                return Err(ConfigError::Invalid(format!("kappa must be positive, got {k}")));
            }
        }
        for (name, v) in [("m2", self.m2), ("l2", self.l2)] {
            if matches!(v, Some(n) if n < 0) {
                return Err(ConfigError::Invalid(format!("{name} must be nonnegative")));
            }
        }
        self.quad_or(1e-8).map(|_| ())
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
