//! Flat `key = value` run configuration and per-command key schemas.

use std::fmt;
use std::path::Path;

use crate::error::CliError;
use crate::format::float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Formfactor,
    Angular,
    Simulate,
    Temperature,
    Discriminate,
}

impl CommandKind {
    pub const ALL: [CommandKind; 6] = [
        CommandKind::Spectrum,
        CommandKind::Formfactor,
        CommandKind::Angular,
        CommandKind::Simulate,
        CommandKind::Temperature,
        CommandKind::Discriminate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Formfactor => "formfactor",
            CommandKind::Angular => "angular",
            CommandKind::Simulate => "simulate",
            CommandKind::Temperature => "temperature",
            CommandKind::Discriminate => "discriminate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn about(self) -> &'static str {
        match self {
            CommandKind::Spectrum => {
                "Per-mode |β|², squeezing and effective temperature over a frequency grid"
            }
            CommandKind::Formfactor => "Finite-bubble form factor S(q) on a wavenumber grid",
            CommandKind::Angular => {
                "Histogram of back-to-back deviation angles for equal-momentum pairs"
            }
            CommandKind::Simulate => {
                "Monte Carlo photon counts at two detectors and the N_a − N_b variance test"
            }
            CommandKind::Temperature => {
                "Adiabatic effective temperature of a refractive-index transition"
            }
            CommandKind::Discriminate => "Variance test on a recorded `flash,n_a,n_b` event file",
        }
    }

    pub fn keys(self) -> &'static [Key] {
        match self {
            CommandKind::Spectrum => SPECTRUM,
            CommandKind::Formfactor => FORMFACTOR,
            CommandKind::Angular => ANGULAR,
            CommandKind::Simulate => SIMULATE,
            CommandKind::Temperature => TEMPERATURE,
            CommandKind::Discriminate => DISCRIMINATE,
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Count,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub enum Fallback {
    /// Must be supplied.
    Required,
    /// May be left out entirely.
    Optional,
    Fixed(&'static str),
    /// Computed from other keys when the command resolves its inputs.
    Derived,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub unit: &'static str,
    pub default: Fallback,
    pub help: &'static str,
}

const fn key(
    name: &'static str,
    kind: Kind,
    unit: &'static str,
    default: Fallback,
    help: &'static str,
) -> Key {
    Key {
        name,
        kind,
        unit,
        default,
        help,
    }
}

const N_IN: Key = key(
    "n_in",
    Kind::Float,
    "1",
    Fallback::Fixed("1"),
    "refractive index before the transition",
);
const N_OUT: Key = key(
    "n_out",
    Kind::Float,
    "1",
    Fallback::Fixed("1.3"),
    "refractive index after the transition",
);
const T0: Key = key(
    "t0_s",
    Kind::Float,
    "s",
    Fallback::Fixed("1e-15"),
    "time scale of the index change",
);
const RADIUS: Key = key(
    "radius_m",
    Kind::Float,
    "m",
    Fallback::Fixed("1e-6"),
    "bubble radius R",
);
const POINTS: Key = key(
    "points",
    Kind::Count,
    "1",
    Fallback::Fixed("400"),
    "number of grid points",
);
const SEED: Key = key(
    "seed",
    Kind::Count,
    "1",
    Fallback::Fixed("1"),
    "64-bit random seed",
);
const ETA_A: Key = key(
    "eta_a",
    Kind::Float,
    "1",
    Fallback::Fixed("1"),
    "detector A efficiency in [0, 1]",
);
const ETA_B: Key = key(
    "eta_b",
    Kind::Float,
    "1",
    Fallback::Fixed("1"),
    "detector B efficiency in [0, 1]",
);

static SPECTRUM: &[Key] = &[
    N_IN,
    N_OUT,
    T0,
    key(
        "omega_min",
        Kind::Float,
        "rad/s",
        Fallback::Derived,
        "lowest out-medium frequency (default: ckτ = 1e-4)",
    ),
    key(
        "omega_max",
        Kind::Float,
        "rad/s",
        Fallback::Derived,
        "highest out-medium frequency (default: ckτ = 30)",
    ),
    POINTS,
    key(
        "windows",
        Kind::Text,
        "ckτ",
        Fallback::Fixed("5:20,1e-4:1e-2"),
        "comma-separated lo:hi ranges of ckτ for the κ spread",
    ),
];

static FORMFACTOR: &[Key] = &[
    RADIUS,
    key(
        "q_min",
        Kind::Float,
        "1/m",
        Fallback::Fixed("0"),
        "smallest wavenumber mismatch",
    ),
    key(
        "q_max",
        Kind::Float,
        "1/m",
        Fallback::Derived,
        "largest wavenumber mismatch (default: 20/R)",
    ),
    key(
        "points",
        Kind::Count,
        "1",
        Fallback::Fixed("401"),
        "number of grid points",
    ),
];

static ANGULAR: &[Key] = &[
    key(
        "k",
        Kind::Float,
        "1/m",
        Fallback::Fixed("1e7"),
        "photon wavenumber |k₁| = |k₂|",
    ),
    RADIUS,
    key(
        "samples",
        Kind::Count,
        "1",
        Fallback::Fixed("1000000"),
        "number of sampled pairs",
    ),
    SEED,
    key(
        "bins",
        Kind::Count,
        "1",
        Fallback::Fixed("50"),
        "histogram bins",
    ),
    key(
        "theta_max",
        Kind::Float,
        "rad",
        Fallback::Derived,
        "upper histogram edge (default: π)",
    ),
];

static SIMULATE: &[Key] = &[
    key(
        "source",
        Kind::Text,
        "",
        Fallback::Required,
        "thermal or squeezed",
    ),
    key(
        "zeta",
        Kind::Float,
        "1",
        Fallback::Optional,
        "squeezing parameter (squeezed source)",
    ),
    key(
        "nbar_a",
        Kind::Float,
        "1",
        Fallback::Optional,
        "mean occupation of mode A (thermal source)",
    ),
    key(
        "nbar_b",
        Kind::Float,
        "1",
        Fallback::Optional,
        "mean occupation of mode B (thermal source)",
    ),
    ETA_A,
    ETA_B,
    key(
        "flashes",
        Kind::Count,
        "1",
        Fallback::Fixed("1000000"),
        "number of simulated flashes",
    ),
    SEED,
    key(
        "events",
        Kind::Text,
        "path",
        Fallback::Optional,
        "write per-flash counts to this CSV file",
    ),
];

static TEMPERATURE: &[Key] = &[N_IN, N_OUT, T0];

static DISCRIMINATE: &[Key] = &[
    key(
        "events",
        Kind::Text,
        "path",
        Fallback::Required,
        "CSV file with header flash,n_a,n_b",
    ),
    ETA_A,
    ETA_B,
];

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Float(f64),
    Count(u64),
    Text(String),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Float(x) => f.write_str(&float(*x)),
            Param::Count(n) => write!(f, "{n}"),
            Param::Text(s) => f.write_str(s),
        }
    }
}

fn parse_value(key: &Key, raw: &str) -> Result<Param, CliError> {
    let bad = |what: &str| CliError::config(key.name, format!("expected {what}, got `{raw}`"));
    match key.kind {
        Kind::Float => raw
            .parse::<f64>()
            .map(Param::Float)
            .map_err(|_| bad("a number")),
        Kind::Count => {
            if let Ok(n) = raw.parse::<u64>() {
                return Ok(Param::Count(n));
            }
            // allow 1e6 and friends
            match raw.parse::<f64>() {
                Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15 => {
                    Ok(Param::Count(x as u64))
                }
                _ => Err(bad("a non-negative integer")),
            }
        }
        Kind::Text => Ok(Param::Text(raw.to_string())),
    }
}

/// A command plus the keys set explicitly by file or flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub natural_units: bool,
    values: Vec<(&'static str, Param)>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            natural_units: false,
            values: Vec::new(),
        }
    }

    fn schema_key(&self, name: &str) -> Result<&'static Key, CliError> {
        self.command
            .keys()
            .iter()
            .find(|k| k.name == name)
            .ok_or_else(|| CliError::config(name, format!("unknown key for `{}`", self.command)))
    }

    /// Set `name` from its textual value, replacing any earlier setting.
    pub fn set(&mut self, name: &str, raw: &str) -> Result<(), CliError> {
        if name == "natural_units" {
            self.natural_units = match raw {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => {
                    return Err(CliError::config(
                        name,
                        format!("expected true or false, got `{raw}`"),
                    ))
                }
            };
            return Ok(());
        }
        let key = self.schema_key(name)?;
        let value = parse_value(key, raw)?;
        match self.values.iter_mut().find(|(k, _)| *k == name) {
            Some(slot) => slot.1 = value,
            None => self.values.push((key.name, value)),
        }
        Ok(())
    }

    /// Read `key = value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::config(
                    "config",
                    format!("line {}: expected `key = value`", lineno + 1),
                )
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        self.merge_text(&text)
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.values.iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }

    pub fn is_set(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    fn fixed_default(&self, name: &str) -> Option<Param> {
        let key = self.schema_key(name).ok()?;
        match key.default {
            Fallback::Fixed(raw) => parse_value(key, raw).ok(),
            _ => None,
        }
    }

    fn lookup(&self, name: &str) -> Result<Param, CliError> {
        if let Some(v) = self.get(name) {
            return Ok(v.clone());
        }
        self.fixed_default(name)
            .ok_or_else(|| CliError::config(name, "required key is missing"))
    }

    pub fn float(&self, name: &str) -> Result<f64, CliError> {
        match self.lookup(name)? {
            Param::Float(x) => Ok(x),
            other => Err(CliError::config(name, format!("not a number: {other}"))),
        }
    }

    pub fn float_or(&self, name: &str, derived: f64) -> Result<f64, CliError> {
        if self.is_set(name) {
            self.float(name)
        } else {
            Ok(derived)
        }
    }

    pub fn optional_float(&self, name: &str) -> Result<Option<f64>, CliError> {
        if self.is_set(name) {
            self.float(name).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn count(&self, name: &str) -> Result<u64, CliError> {
        match self.lookup(name)? {
            Param::Count(n) => Ok(n),
            other => Err(CliError::config(name, format!("not an integer: {other}"))),
        }
    }

    pub fn text(&self, name: &str) -> Result<String, CliError> {
        match self.lookup(name)? {
            Param::Text(s) => Ok(s),
            other => Ok(other.to_string()),
        }
    }

    pub fn optional_text(&self, name: &str) -> Option<String> {
        self.get(name).map(|p| p.to_string())
    }

    /// The config as file text, one key per line in schema order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.natural_units {
            out.push_str("natural_units = true\n");
        }
        for key in self.command.keys() {
            if let Some(v) = self.get(key.name) {
                out.push_str(&format!("{} = {v}\n", key.name));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax_and_comments() {
        let mut c = RunConfig::new(CommandKind::Temperature);
        c.merge_text("# profile\nn_in = 1.5   # glass-ish\n\n t0_s=2e-15\n")
            .unwrap();
        assert_eq!(c.float("n_in").unwrap(), 1.5);
        assert_eq!(c.float("t0_s").unwrap(), 2e-15);
        assert_eq!(c.float("n_out").unwrap(), 1.3);
    }

    #[test]
    fn later_settings_win() {
        let mut c = RunConfig::new(CommandKind::Temperature);
        c.merge_text("n_in = 1.5").unwrap();
        c.set("n_in", "2").unwrap();
        assert_eq!(c.float("n_in").unwrap(), 2.0);
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        let mut c = RunConfig::new(CommandKind::Temperature);
        let err = c.merge_text("zeta = 1").unwrap_err();
        assert!(err.to_string().contains("zeta"));
        let err = c.merge_text("n_in 1").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = c.set("n_in", "one").unwrap_err();
        assert!(err.to_string().contains("n_in"));
    }

    #[test]
    fn counts_accept_exponent_notation() {
        let mut c = RunConfig::new(CommandKind::Simulate);
        c.set("flashes", "1e6").unwrap();
        assert_eq!(c.count("flashes").unwrap(), 1_000_000);
        assert!(c.set("flashes", "2.5").is_err());
        assert!(c.set("flashes", "-3").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::new(CommandKind::Simulate);
        c.merge_text("source = thermal\nnbar_a = 0.1\nnbar_b = 1\nseed = 7\nnatural_units = true")
            .unwrap();
        let mut d = RunConfig::new(CommandKind::Simulate);
        d.merge_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn missing_required_key_names_it() {
        let c = RunConfig::new(CommandKind::Simulate);
        assert!(c.text("source").unwrap_err().to_string().contains("source"));
    }
}
