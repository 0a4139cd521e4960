//! Flag values merged with an optional `key=value` config file.
//!
//! Keys in the file are the long flag names without the leading dashes
//! (`eps`, `z-grid`, `lambda`, ...). Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use szego_core::{Complex, Rotation};

use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "eps", "k", "alpha", "z-grid", "n", "method", "lambda", "coeffs", "seed", "out", "svg",
    "grid", "tol", "threshold", "ladder",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Reads `path` (if any) and overlays the command-line values.
    pub fn resolve(
        config: Option<&Path>,
        flags: impl IntoIterator<Item = (&'static str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut settings = match config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        for (key, value) in flags {
            if let Some(v) = value {
                settings.values.insert(key.to_string(), v);
            }
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim().trim_start_matches("--");
            if !KEYS.contains(&key) {
                return Err(CliError::config(format!(
                    "config line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse(v).ok_or_else(|| CliError::config(format!("invalid value for --{key}: '{v}'"))),
        }
    }

    pub fn eps(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let eps = self.parsed("eps", default.to_vec(), parse_real_list)?;
        if eps.is_empty() {
            return Err(CliError::config("--eps: empty epsilon list"));
        }
        if let Some(bad) = eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(CliError::config(format!("--eps: {bad} is outside (0, 1)")));
        }
        Ok(eps)
    }

    pub fn k(&self, default: i64) -> Result<i64, CliError> {
        let k = self.parsed("k", default, |v| v.parse().ok())?;
        if k == 0 {
            return Err(CliError::config("--k must be nonzero"));
        }
        Ok(k)
    }

    pub fn rotation(&self) -> Result<Rotation, CliError> {
        match self.raw("alpha") {
            None | Some("golden") => Ok(Rotation::golden()),
            Some(v) => {
                let alpha: f64 = v
                    .parse()
                    .map_err(|_| CliError::config(format!("invalid value for --alpha: '{v}'")))?;
                Rotation::new(alpha).map_err(|e| CliError::config(e.to_string()))
            }
        }
    }

    pub fn count(&self, key: &str, default: usize, min: usize) -> Result<usize, CliError> {
        let v = self.parsed(key, default, |v| v.parse().ok())?;
        if v < min {
            return Err(CliError::config(format!("--{key} must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    pub fn real(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.parsed(key, default, |v| v.parse().ok().filter(|x: &f64| x.is_finite()))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parsed("seed", 0, |v| v.parse().ok())
    }

    pub fn lambda(&self) -> Result<Option<Complex>, CliError> {
        match self.raw("lambda") {
            None => Ok(None),
            Some(v) => parse_complex(v)
                .map(Some)
                .ok_or_else(|| CliError::config(format!("invalid value for --lambda: '{v}'"))),
        }
    }

    pub fn coeffs(&self) -> Result<Option<Vec<Complex>>, CliError> {
        match self.raw("coeffs") {
            None => Ok(None),
            Some(v) => parse_complex_list(v)
                .map(Some)
                .ok_or_else(|| CliError::config(format!("invalid value for --coeffs: '{v}'"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }
}

pub fn parse_real_list(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect()
}

/// `re,im` or a bare real.
pub fn parse_complex(s: &str) -> Option<Complex> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let (re, im) = match parts.as_slice() {
        [re] => (re.parse().ok()?, 0.0),
        [re, im] => (re.parse().ok()?, im.parse().ok()?),
        _ => return None,
    };
    let z = Complex::new(re, im);
    z.is_finite().then_some(z)
}

/// Pairs `re,im` separated by `;` or whitespace.
pub fn parse_complex_list(s: &str) -> Option<Vec<Complex>> {
    s.split(|c: char| c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_complex)
        .collect()
}
