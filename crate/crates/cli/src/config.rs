//! Flat `key = value` configuration with command-line overrides.
//!
//! Every key has a default. A config file is applied first, then `--set`
//! overrides in order, so the last writer wins. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use jjreadout_core::dephasing::CircuitNoise;
use jjreadout_core::observables::GridSpec;
use jjreadout_core::ode::Tolerances;
use jjreadout_core::{Mode, PhysicalInputs};

use crate::CliError;

/// Default value and one-line description of every key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("e_j", "0.86", "qubit Josephson energy, k_B K"),
    ("e_c", "0.68", "qubit charging energy, k_B K (metadata only)"),
    ("e_c0", "0.0037", "readout-junction charging energy, k_B K"),
    ("e_j0", "18.4", "readout-junction Josephson energy, k_B K"),
    ("bias_ratio", "0.97", "bias energy over E_J0; empty to unset"),
    ("bias_current", "", "bias current in A; empty to unset"),
    ("mode", "irreversible", "reversible | irreversible | both"),
    ("t_max", "2T0", "end of the time grid, with unit ns or T0"),
    ("samples", "401", "number of time samples, >= 2"),
    ("time", "16.932ns", "snapshot time for the wigner command"),
    ("grid_gamma", "401", "surface points along the phase"),
    ("grid_n", "401", "surface points along the charge"),
    ("rtol", "1e-10", "relative tolerance of the ODE integrator"),
    ("atol", "1e-12", "absolute tolerance of the ODE integrator"),
    ("format", "csv", "csv | tsv"),
    ("r1", "50", "noise source resistance, ohm"),
    ("r2", "3500", "input resistance, ohm"),
    ("temperature", "4.2", "noise temperature, K"),
    ("bandwidth", "2e8", "noise bandwidth, Hz"),
    ("duration", "0.05T0", "pulse duration for the sweep observable"),
    ("sweep.bias_ratio", "", "sweep range start:stop:count or list a,b,c"),
    ("sweep.e_j", "", "sweep range for the qubit Josephson energy"),
    ("sweep.duration", "", "sweep range for the pulse duration, with units"),
    ("sweep_cap", "10000", "largest allowed number of sweep points"),
    ("output_dir", ".", "directory receiving the output files"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Ns,
    T0,
}

/// A time given either in nanoseconds or in units of `T0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeValue {
    pub value: f64,
    pub unit: TimeUnit,
}

impl TimeValue {
    pub fn seconds(&self, t0: f64) -> f64 {
        match self.unit {
            TimeUnit::Ns => self.value * 1e-9,
            TimeUnit::T0 => self.value * t0,
        }
    }
}

impl FromStr for TimeValue {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.trim().to_ascii_lowercase();
        let (num, unit) = if let Some(n) = lower.strip_suffix("ns") {
            (n, TimeUnit::Ns)
        } else if let Some(n) = lower.strip_suffix("t0") {
            (n, TimeUnit::T0)
        } else {
            return Err(format!("`{s}` needs a unit suffix: ns or T0"));
        };
        let value: f64 = num.trim().parse().map_err(|_| format!("`{s}` is not a number followed by a unit"))?;
        if !value.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(Self { value, unit })
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            TimeUnit::Ns => write!(f, "{}ns", self.value),
            TimeUnit::T0 => write!(f, "{}T0", self.value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }
}

/// Values of one swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    BiasRatio(Vec<f64>),
    QubitCoupling(Vec<f64>),
    Duration(Vec<TimeValue>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::BiasRatio(v) | SweepAxis::QubitCoupling(v) => v.len(),
            SweepAxis::Duration(v) => v.len(),
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: PhysicalInputs,
    pub modes: Vec<Mode>,
    pub t_max: TimeValue,
    pub samples: usize,
    pub time: TimeValue,
    pub grid: GridSpec,
    pub tol: Tolerances,
    pub format: Format,
    pub noise: CircuitNoise,
    pub duration: TimeValue,
    pub sweep: Vec<SweepAxis>,
    pub sweep_cap: usize,
    pub output_dir: PathBuf,
    /// Resolved `key = value` pairs echoed into every output file.
    pub resolved: BTreeMap<String, String>,
}

/// Raw key-value store that remembers where each value came from.
#[derive(Debug, Clone)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, String)>,
}

impl Default for RawConfig {
    fn default() -> Self {
        let entries = KEYS.iter().map(|(k, v, _)| (k.to_string(), (v.to_string(), "default".to_string()))).collect();
        Self { entries }
    }
}

impl RawConfig {
    fn set(&mut self, key: &str, value: &str, origin: String) -> Result<(), CliError> {
        match self.entries.get_mut(key) {
            Some(slot) => {
                *slot = (value.to_string(), origin);
                Ok(())
            }
            None => Err(CliError::Config(format!("{origin}: unknown key `{key}`"))),
        }
    }

    /// Applies a config file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = format!("{source}:{}", i + 1);
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}: expected `key = value`, got `{line}`")))?;
            self.set(k.trim(), v.trim(), origin)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), CliError> {
        let origin = format!("--set {pair}");
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{origin}: expected key=value")))?;
        self.set(k.trim(), v.trim(), origin)
    }

    pub fn set_output_dir(&mut self, dir: &Path) {
        self.entries.insert("output_dir".into(), (dir.display().to_string(), "--out".into()));
    }

    fn raw(&self, key: &str) -> (&str, &str) {
        let (v, o) = &self.entries[key];
        (v.as_str(), o.as_str())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let (v, origin) = self.raw(key);
        v.parse::<T>().map_err(|e| CliError::Config(format!("{origin}: key `{key}`: cannot parse `{v}`: {e}")))
    }

    fn optional(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.raw(key).0.is_empty() {
            Ok(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    fn fail(&self, key: &str, why: &str) -> CliError {
        let (v, origin) = self.raw(key);
        CliError::Config(format!("{origin}: key `{key}` = `{v}`: {why}"))
    }

    fn sweep_values<T: FromStr + Copy>(&self, key: &str, lerp: impl Fn(T, T, f64) -> Result<T, String>) -> Result<Vec<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        let (v, _) = self.raw(key);
        let parse_one = |s: &str| s.trim().parse::<T>().map_err(|e| self.fail(key, &e.to_string()));
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() == 3 {
            let (a, b) = (parse_one(parts[0])?, parse_one(parts[1])?);
            let n: usize = parts[2].trim().parse().map_err(|_| self.fail(key, "count must be an integer"))?;
            if n == 0 {
                return Err(self.fail(key, "count must be positive"));
            }
            (0..n)
                .map(|i| {
                    let x = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    lerp(a, b, x).map_err(|e| self.fail(key, &e))
                })
                .collect()
        } else if parts.len() == 1 {
            v.split(',').map(parse_one).collect()
        } else {
            Err(self.fail(key, "expected start:stop:count or a comma list"))
        }
    }

    /// Typed configuration with all invariants checked.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let inputs = PhysicalInputs {
            e_j: self.parse("e_j")?,
            e_c: self.parse("e_c")?,
            e_c0: self.parse("e_c0")?,
            e_j0: self.parse("e_j0")?,
            bias_ratio: self.optional("bias_ratio")?,
            bias_current: self.optional("bias_current")?,
        };
        let modes = match self.raw("mode").0.to_ascii_lowercase().as_str() {
            "both" => vec![Mode::Reversible, Mode::Irreversible],
            _ => vec![self.parse::<Mode>("mode")?],
        };
        let t_max: TimeValue = self.parse("t_max")?;
        if !(t_max.value > 0.0) {
            return Err(self.fail("t_max", "must be positive"));
        }
        let samples: usize = self.parse("samples")?;
        if samples < 2 {
            return Err(self.fail("samples", "need at least 2 samples"));
        }
        let time: TimeValue = self.parse("time")?;
        if time.value < 0.0 {
            return Err(self.fail("time", "must be non-negative"));
        }
        let grid = GridSpec { n_gamma: self.parse("grid_gamma")?, n_n: self.parse("grid_n")?, window: None };
        if grid.n_gamma < 2 || grid.n_n < 2 {
            return Err(self.fail("grid_gamma", "surface grids need at least 2 points per axis"));
        }
        let tol = Tolerances { rtol: self.parse("rtol")?, atol: self.parse("atol")?, ..Tolerances::default() };
        if !(tol.rtol > 0.0 && tol.atol > 0.0) {
            return Err(self.fail("rtol", "tolerances must be positive"));
        }
        let format = match self.raw("format").0 {
            "csv" => Format::Csv,
            "tsv" => Format::Tsv,
            _ => return Err(self.fail("format", "expected csv or tsv")),
        };
        let noise = CircuitNoise {
            r1: self.parse("r1")?,
            r2: self.parse("r2")?,
            temperature: self.parse("temperature")?,
            bandwidth: self.parse("bandwidth")?,
        };
        if !noise.is_valid() {
            return Err(self.fail("r1", "noise inputs r1, r2, temperature, bandwidth must be positive"));
        }
        let duration: TimeValue = self.parse("duration")?;

        let lerp_f = |a: f64, b: f64, x: f64| Ok(a + (b - a) * x);
        let lerp_t = |a: TimeValue, b: TimeValue, x: f64| {
            if a.unit != b.unit {
                return Err("range endpoints must use the same unit".to_string());
            }
            Ok(TimeValue { value: a.value + (b.value - a.value) * x, unit: a.unit })
        };
        let mut sweep = Vec::new();
        if !self.raw("sweep.bias_ratio").0.is_empty() {
            sweep.push(SweepAxis::BiasRatio(self.sweep_values("sweep.bias_ratio", lerp_f)?));
        }
        if !self.raw("sweep.e_j").0.is_empty() {
            sweep.push(SweepAxis::QubitCoupling(self.sweep_values("sweep.e_j", lerp_f)?));
        }
        if !self.raw("sweep.duration").0.is_empty() {
            sweep.push(SweepAxis::Duration(self.sweep_values("sweep.duration", lerp_t)?));
        }
        let sweep_cap: usize = self.parse("sweep_cap")?;

        let output_dir = PathBuf::from(self.raw("output_dir").0);
        let resolved = self
            .entries
            .iter()
            .filter(|(k, _)| k.as_str() != "output_dir")
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect();

        Ok(RunConfig {
            inputs,
            modes,
            t_max,
            samples,
            time,
            grid,
            tol,
            format,
            noise,
            duration,
            sweep,
            sweep_cap,
            output_dir,
            resolved,
        })
    }
}

impl RunConfig {
    /// Creates the output directory and checks that it accepts files.
    pub fn ensure_output_dir(&self) -> Result<(), CliError> {
        let dir = &self.output_dir;
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("output directory {}: {e}", dir.display())))?;
        let probe = dir.join(".jjreadout-write-probe");
        std::fs::write(&probe, b"")
            .and_then(|_| std::fs::remove_file(&probe))
            .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", dir.display())))
    }
}
