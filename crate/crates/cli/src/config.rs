//! `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Keys are case-insensitive.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `kind` | `chain` or `lattice` (only read by `berry`) | `chain` |
//! | `L` | chain lengths, list | `4, 6, 8` (`4` for `berry`) |
//! | `Lx`, `Ly` | lattice size | `4`, `4` |
//! | `J1` | strong coupling | `1` |
//! | `J2` | list `a, b, c` or range `start:stop:step` | `0.2:1.8:0.2` |
//! | `T` | loop period | `20` |
//! | `N` | Trotter steps, list | `200` (1D), `100, 200, 300` (2D) |
//! | `shots` | ancilla samples | `100000` |
//! | `seed` | master seed | `0` |
//! | `path` | driven slots, e.g. `+1-2` | `+1` (chain), `+1-2` (lattice) |
//! | `plaquette` | `I`, `II` or corner `x,y` | `I` |
//! | `twisted_bond` | chain bond carrying the twist | `0` |
//! | `profile` | `linear` or `smooth` ramp | `linear` |
//! | `mode` | `circuit`, `oracle` or `both` | `both` |
//! | `out` | output directory | `results` |
//! | `jobs` | worker threads | all cores |
//! | `guard` | abort evolutions through a closing gap | `true` |
//! | `loop_points` | initial Wilson-loop resolution | `64` |
//! | `timing` | record wall time (off gives byte-stable CSV) | `true` |
//! | `plot` | write SVG next to the CSV | `true` |
//! | `spectrum_points` | grid size of the `spectrum` scan | `64` |
//!
//! A `J2` range leaves out the degenerate point `J2 = J1`; list it
//! explicitly to force it.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use berryloop::{parse_path, Plaquette, RampProfile};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    Circuit,
    Oracle,
    #[default]
    Both,
}

impl Mode {
    pub fn circuit(self) -> bool {
        matches!(self, Mode::Circuit | Mode::Both)
    }

    pub fn oracle(self) -> bool {
        matches!(self, Mode::Oracle | Mode::Both)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "circuit" => Ok(Mode::Circuit),
            "oracle" => Ok(Mode::Oracle),
            "both" => Ok(Mode::Both),
            other => Err(format!("expected circuit, oracle or both, got `{other}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Circuit => "circuit",
            Mode::Oracle => "oracle",
            Mode::Both => "both",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kind {
    #[default]
    Chain,
    Lattice,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Chain => "chain",
            Kind::Lattice => "lattice",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub kind: Option<Kind>,
    pub lengths: Option<Vec<usize>>,
    pub lx: usize,
    pub ly: usize,
    pub j1: f64,
    pub j2: Option<Vec<f64>>,
    pub total_time: f64,
    pub steps: Option<Vec<usize>>,
    pub shots: u64,
    pub seed: u64,
    pub path: Option<String>,
    pub plaquette: Plaquette,
    pub twisted_bond: usize,
    pub profile: RampProfile,
    pub mode: Mode,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub guard: bool,
    pub loop_points: usize,
    pub timing: bool,
    pub plot: bool,
    pub spectrum_points: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            kind: None,
            lengths: None,
            lx: 4,
            ly: 4,
            j1: 1.0,
            j2: None,
            total_time: 20.0,
            steps: None,
            shots: 100_000,
            seed: 0,
            path: None,
            plaquette: Plaquette::type_i(),
            twisted_bond: 0,
            profile: RampProfile::Linear,
            mode: Mode::Both,
            out: PathBuf::from("results"),
            jobs: None,
            guard: true,
            loop_points: 64,
            timing: true,
            plot: true,
            spectrum_points: 64,
        }
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let out: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(key, e))?;
    if out.is_empty() {
        return Err(bad(key, "empty list"));
    }
    Ok(out)
}

fn bad(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn one<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, e))
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(bad(key, format!("expected a boolean, got `{other}`"))),
    }
}

/// Parses `start:stop:step` (inclusive, skipping `skip`) or a comma list.
fn j2_values(value: &str, skip: f64) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h): (f64, f64, f64) =
                (one("J2", start)?, one("J2", stop)?, one("J2", step)?);
            if h.is_nan() || h <= 0.0 || b < a {
                return Err(bad("J2", "range needs start <= stop and a positive step"));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=count)
                .map(|k| {
                    // round to the step's decimal grid so 0.2·3 prints as 0.6
                    let x = a + h * k as f64;
                    (x * 1e9).round() / 1e9
                })
                .filter(|x| (x - skip).abs() > 1e-9)
                .collect())
        }
        [_] => list("J2", value),
        _ => Err(bad("J2", "expected a list or start:stop:step")),
    }
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        // J2 ranges depend on J1, so they are resolved after everything else
        let mut j2 = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: n + 1 })?;
            if key.trim().eq_ignore_ascii_case("j2") {
                j2 = Some(value.trim().to_string());
            } else {
                self.set(key, value)?;
            }
        }
        if let Some(v) = j2 {
            self.set("J2", &v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim();
        let value = value.trim();
        match key.to_ascii_lowercase().as_str() {
            "kind" => {
                self.kind = Some(match value.to_ascii_lowercase().as_str() {
                    "chain" => Kind::Chain,
                    "lattice" => Kind::Lattice,
                    other => {
                        return Err(bad(
                            key,
                            format!("expected chain or lattice, got `{other}`"),
                        ))
                    }
                })
            }
            "l" => self.lengths = Some(list(key, value)?),
            "lx" => self.lx = one(key, value)?,
            "ly" => self.ly = one(key, value)?,
            "j1" => self.j1 = one(key, value)?,
            "j2" => self.j2 = Some(j2_values(value, self.j1)?),
            "t" => self.total_time = one(key, value)?,
            "n" => self.steps = Some(list(key, value)?),
            "shots" => self.shots = one(key, value)?,
            "seed" => self.seed = one(key, value)?,
            "path" => {
                parse_path(value).map_err(|e| bad(key, e))?;
                self.path = Some(value.to_string());
            }
            "plaquette" => self.plaquette = parse_plaquette(value).map_err(|e| bad(key, e))?,
            "twisted_bond" => self.twisted_bond = one(key, value)?,
            "profile" => self.profile = one(key, value)?,
            "mode" => self.mode = one(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = Some(one(key, value)?),
            "guard" => self.guard = flag(key, value)?,
            "loop_points" => self.loop_points = one(key, value)?,
            "timing" => self.timing = flag(key, value)?,
            "plot" => self.plot = flag(key, value)?,
            "spectrum_points" => self.spectrum_points = one(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// `J2` values, defaulting to `0.2 … 1.8` without `J1`.
    pub fn j2_grid(&self) -> Vec<f64> {
        self.j2
            .clone()
            .unwrap_or_else(|| j2_values("0.2:1.8:0.2", self.j1).expect("default grid parses"))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.total_time <= 0.0 || !self.total_time.is_finite() {
            return invalid(format!("T must be positive, got {}", self.total_time));
        }
        if !self.j1.is_finite() {
            return invalid("J1 must be finite".into());
        }
        if let Some(steps) = &self.steps {
            if let Some(n) = steps.iter().find(|&&n| n == 0 || n % 2 != 0) {
                return invalid(format!("N must be even and positive, got {n}"));
            }
        }
        if self.shots == 0 {
            return invalid("shots must be at least 1".into());
        }
        if self.loop_points < 16 {
            return invalid(format!(
                "loop_points must be at least 16, got {}",
                self.loop_points
            ));
        }
        if self.spectrum_points == 0 {
            return invalid("spectrum_points must be positive".into());
        }
        if self.jobs == Some(0) {
            return invalid("jobs must be at least 1".into());
        }
        if let Some(j2) = &self.j2 {
            if j2.is_empty() {
                return invalid("J2 grid is empty".into());
            }
            if j2.iter().any(|x| !x.is_finite()) {
                return invalid("J2 values must be finite".into());
            }
        }
        Ok(())
    }
}

fn parse_plaquette(value: &str) -> Result<Plaquette, String> {
    match value.to_ascii_uppercase().as_str() {
        "I" => Ok(Plaquette::type_i()),
        "II" => Ok(Plaquette::type_ii()),
        _ => {
            let (x, y) = value
                .split_once(',')
                .ok_or_else(|| format!("expected I, II or x,y, got `{value}`"))?;
            let x = x.trim().parse::<usize>().map_err(|e| e.to_string())?;
            let y = y.trim().parse::<usize>().map_err(|e| e.to_string())?;
            Ok(Plaquette::new(x, y))
        }
    }
}
