use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::model::{validate_params, ChannelParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location(pub Option<(PathBuf, usize)>);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some((path, line)) if path.as_os_str().is_empty() => write!(f, "line {line}: "),
            Some((path, line)) => write!(f, "{}:{line}: ", path.display()),
            None => write!(f, "command line: "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{location}expected `key = value`, got `{text}`")]
    Syntax { location: Location, text: String },

    #[error("{location}field `{field}`: {message}")]
    Field {
        location: Location,
        field: String,
        message: String,
    },

    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Denoisers selectable in `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    ExactBf,
    Gibbs,
    Dude,
    BfpExact,
    BfpEmpirical,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ExactBf,
        Algorithm::Gibbs,
        Algorithm::Dude,
        Algorithm::BfpExact,
        Algorithm::BfpEmpirical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::ExactBf => "exact_bf",
            Algorithm::Gibbs => "gibbs",
            Algorithm::Dude => "dude",
            Algorithm::BfpExact => "bfp_exact",
            Algorithm::BfpEmpirical => "bfp_empirical",
        }
    }

    /// Whether the algorithm takes a context length and is swept over `k`.
    pub fn uses_context(self) -> bool {
        matches!(self, Algorithm::Dude | Algorithm::BfpEmpirical)
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters shared by every subcommand. Unused fields are ignored by a
/// command but still recorded in its output header.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: f64,
    pub epsilon: f64,
    /// Explicit `(p, ε)` cells; empty means the single cell `(p, ε)`.
    pub grid: Vec<ChannelParams>,
    pub n: usize,
    pub seeds: Vec<u64>,
    /// Fixed context length; `None` sweeps `1..=k_max`.
    pub k: Option<usize>,
    pub k_max: usize,
    pub depth: usize,
    pub tol: f64,
    /// Largest word length enumerated by `probs`.
    pub length: usize,
    /// Prefixes sampled per `n` by `decay`.
    pub samples: usize,
    /// Largest `n` examined by `decay`.
    pub max_n: usize,
    /// Number of windows scored by `gfun`.
    pub windows: usize,
    pub algorithms: Vec<Algorithm>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 0.2,
            epsilon: 0.1,
            grid: Vec::new(),
            n: 1_000_000,
            seeds: vec![1],
            k: None,
            k_max: 8,
            depth: 200,
            tol: 1e-10,
            length: 10,
            samples: 4096,
            max_n: 30,
            windows: 100,
            algorithms: vec![Algorithm::ExactBf, Algorithm::Gibbs, Algorithm::Dude],
            input: None,
            out: None,
        }
    }
}

pub const KNOWN_KEYS: [&str; 17] = [
    "p",
    "eps",
    "grid",
    "grid_file",
    "n",
    "seed",
    "k",
    "k_max",
    "depth",
    "tol",
    "length",
    "samples",
    "max_n",
    "windows",
    "algorithms",
    "input",
    "out",
];

fn field_error(location: &Location, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        location: location.clone(),
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(location: &Location, field: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| field_error(location, field, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: FromStr>(location: &Location, field: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(location, field, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(field_error(location, field, "list must not be empty"));
    }
    Ok(items)
}

fn parse_cell(location: &Location, field: &str, text: &str) -> Result<ChannelParams, ConfigError> {
    let parts: Vec<&str> = text
        .split(|c: char| c == ':' || c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.len() != 2 {
        return Err(field_error(location, field, format!("expected `p:eps`, got `{text}`")));
    }
    let p: f64 = parse_value(location, field, parts[0])?;
    let e: f64 = parse_value(location, field, parts[1])?;
    validate_params(p, e).map_err(|err| field_error(location, field, err.to_string()))
}

/// Reads a grid file: one `p eps` (or `p,eps` / `p:eps`) pair per line,
/// `#` starting a comment.
pub fn read_grid_file(path: &Path) -> Result<Vec<ChannelParams>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut cells = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let location = Location(Some((path.to_path_buf(), i + 1)));
        cells.push(parse_cell(&location, "grid", line)?);
    }
    if cells.is_empty() {
        return Err(field_error(&Location(Some((path.to_path_buf(), 0))), "grid", "grid file has no cells"));
    }
    Ok(cells)
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str, location: &Location) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "p" => self.p = parse_value(location, key, value)?,
            "eps" | "epsilon" => self.epsilon = parse_value(location, key, value)?,
            "grid" => {
                self.grid = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|c| parse_cell(location, key, c))
                    .collect::<Result<_, _>>()?;
                if self.grid.is_empty() {
                    return Err(field_error(location, key, "grid must not be empty"));
                }
            }
            "grid_file" => self.grid = read_grid_file(Path::new(value))?,
            "n" => self.n = parse_value(location, key, value)?,
            "seed" | "seeds" => self.seeds = parse_list(location, key, value)?,
            "k" => self.k = Some(parse_value(location, key, value)?),
            "k_max" => self.k_max = parse_value(location, key, value)?,
            "depth" => self.depth = parse_value(location, key, value)?,
            "tol" => self.tol = parse_value(location, key, value)?,
            "length" => self.length = parse_value(location, key, value)?,
            "samples" => self.samples = parse_value(location, key, value)?,
            "max_n" => self.max_n = parse_value(location, key, value)?,
            "windows" => self.windows = parse_value(location, key, value)?,
            "algorithms" => self.algorithms = parse_list(location, key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => {
                return Err(field_error(
                    location,
                    key,
                    format!("unknown key; expected one of {}", KNOWN_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Applies every assignment in a config file.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        self.apply_text(&text, Some(path))
    }

    pub fn apply_text(&mut self, text: &str, path: Option<&Path>) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let location = Location(Some((path.map(Path::to_path_buf).unwrap_or_default(), i + 1)));
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                location: location.clone(),
                text: line.to_string(),
            })?;
            self.set(key.trim(), value, &location)?;
        }
        Ok(())
    }

    /// Checks cross-field invariants once all sources have been applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let here = Location(None);
        validate_params(self.p, self.epsilon).map_err(|e| field_error(&here, "p/eps", e.to_string()))?;
        if self.seeds.is_empty() {
            return Err(field_error(&here, "seed", "seed list must not be empty"));
        }
        if self.n == 0 {
            return Err(field_error(&here, "n", "must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(field_error(&here, "tol", "must be positive"));
        }
        if self.k == Some(0) || self.k_max == 0 {
            return Err(field_error(&here, "k", "context length must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(field_error(&here, "algorithms", "must not be empty"));
        }
        Ok(())
    }

    /// Grid cells, or the single cell `(p, ε)`.
    pub fn cells(&self) -> Vec<ChannelParams> {
        if self.grid.is_empty() {
            vec![validate_params(self.p, self.epsilon).expect("validated config")]
        } else {
            self.grid.clone()
        }
    }

    /// Context lengths swept by context-based denoisers.
    pub fn context_lengths(&self) -> Vec<usize> {
        match self.k {
            Some(k) => vec![k],
            None => (1..=self.k_max).collect(),
        }
    }

    /// Effective settings as ordered `(key, value)` pairs for output headers.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        let grid = self
            .cells()
            .iter()
            .map(|c| format!("{}:{}", c.p(), c.epsilon()))
            .collect::<Vec<_>>()
            .join(";");
        let mut pairs = vec![
            ("p", self.p.to_string()),
            ("eps", self.epsilon.to_string()),
            ("grid", grid),
            ("n", self.n.to_string()),
            ("seed", join(self.seeds.iter().map(u64::to_string).collect())),
            ("k", self.k.map_or_else(|| "sweep".to_string(), |k| k.to_string())),
            ("k_max", self.k_max.to_string()),
            ("depth", self.depth.to_string()),
            ("tol", self.tol.to_string()),
            ("length", self.length.to_string()),
            ("samples", self.samples.to_string()),
            ("max_n", self.max_n.to_string()),
            ("windows", self.windows.to_string()),
            ("algorithms", join(self.algorithms.iter().map(|a| a.to_string()).collect())),
        ];
        if let Some(input) = &self.input {
            pairs.push(("input", input.display().to_string()));
        }
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
