//! Run configuration: a flat `key = value` text format with `#` comments and
//! `[command]` sections.
//!
//! ```text
//! system = 2
//! n = 32
//! tau = 0.75
//!
//! [resolvent-scan]
//! points = 48
//! ```

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::evolve::Method;
use crate::grid::Grid;
use crate::params::{ModelParams, SystemId};
use crate::probe::ProbeId;
use crate::regionmap::{cube_lattice, Check};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }

    fn from_model(key: &str, e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, .. } => Self::new(name, e.to_string()),
            other => Self::new(key, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Spectrum,
    ResolventScan,
    Probe,
    Simulate,
    RegionMap,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Verify,
        Command::Spectrum,
        Command::ResolventScan,
        Command::Probe,
        Command::Simulate,
        Command::RegionMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::ResolventScan => "resolvent-scan",
            Command::Probe => "probe",
            Command::Simulate => "simulate",
            Command::RegionMap => "region-map",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Random states for the dissipativity identity.
    pub states: usize,
    /// Random right-hand sides for the stationary problem.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lambda_min: f64,
    /// `None` scans up to the resolved band.
    pub lambda_max: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Empty selects every probe applicable to the system and exponents.
    pub probes: Vec<ProbeId>,
    pub lambda_min: f64,
    pub lambda_max: Option<f64>,
    pub points: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub t_end: f64,
    pub steps: usize,
    pub method: Method,
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub lattice: Vec<[f64; 3]>,
    pub checks: Vec<Check>,
    pub lambda_min: f64,
    pub scan_points: usize,
    pub probe_points: usize,
    pub probe_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemId,
    pub n: usize,
    pub length: f64,
    pub seed: u64,
    pub params: ModelParams<f64>,
    pub verify: VerifyConfig,
    pub scan: ScanConfig,
    pub probe: ProbeConfig,
    pub simulate: SimulateConfig,
    pub region: RegionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemId::System1,
            n: 64,
            length: std::f64::consts::PI,
            seed: 42,
            params: ModelParams::unit(0.5, 0.5, 0.5),
            verify: VerifyConfig { states: 100, samples: 16 },
            scan: ScanConfig {
                lambda_min: 1.0,
                lambda_max: None,
                points: 40,
            },
            probe: ProbeConfig {
                probes: Vec::new(),
                lambda_min: 1.0,
                lambda_max: None,
                points: 16,
                samples: 16,
            },
            simulate: SimulateConfig {
                t_end: 10.0,
                steps: 1000,
                method: Method::ImplicitMidpoint,
                tail_fraction: 0.5,
            },
            region: RegionConfig {
                lattice: cube_lattice(&[0.25, 0.5, 0.75]),
                checks: vec![Check::Abscissa],
                lambda_min: 1.0,
                scan_points: 40,
                probe_points: 16,
                probe_samples: 16,
            },
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// `a b c; d e f` into triples.
fn parse_points(key: &str, value: &str) -> Result<Vec<[f64; 3]>, ConfigError> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|triple| {
            let v: Vec<f64> = triple
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| parse_num(key, s))
                .collect::<Result<_, _>>()?;
            <[f64; 3]>::try_from(v).map_err(|_| ConfigError::new(key, format!("{triple:?} is not a triple")))
        })
        .collect()
}

fn parse_lambda_max(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value == "resolved" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

impl RunConfig {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<Command> = None;
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                section = Some(
                    Command::ALL
                        .into_iter()
                        .find(|c| c.name() == name)
                        .ok_or_else(|| ConfigError::new(format!("[{name}]"), "unknown section"))?,
                );
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(line, format!("line {} is not `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let qualified = match section {
                Some(c) => format!("{}.{key}", c.name()),
                None => key.to_string(),
            };
            if !seen.insert(qualified.clone()) {
                return Err(ConfigError::new(qualified, "duplicate key"));
            }
            cfg.set(section, key, value, &qualified)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, section: Option<Command>, key: &str, value: &str, q: &str) -> Result<(), ConfigError> {
        let unknown = || Err(ConfigError::new(q, "unknown key"));
        let p = &mut self.params;
        match section {
            None => match key {
                "system" => {
                    self.system = SystemId::from_number(parse_num(q, value)?)
                        .ok_or_else(|| ConfigError::new(q, "must be 1 or 2"))?
                }
                "n" => self.n = parse_num(q, value)?,
                "length" => self.length = parse_num(q, value)?,
                "seed" => self.seed = parse_num(q, value)?,
                "rho1" => p.rho1 = parse_num(q, value)?,
                "rho2" => p.rho2 = parse_num(q, value)?,
                "rho3" => p.rho3 = parse_num(q, value)?,
                "kappa" => p.kappa = parse_num(q, value)?,
                "b" => p.b = parse_num(q, value)?,
                "delta" => p.delta = parse_num(q, value)?,
                "beta" => p.beta = parse_num(q, value)?,
                "gamma" => p.gamma = parse_num(q, value)?,
                "mu" => p.mu = parse_num(q, value)?,
                "mu1" => p.mu1 = parse_num(q, value)?,
                "mu2" => p.mu2 = parse_num(q, value)?,
                "K" => p.big_k = parse_num(q, value)?,
                "tau" => p.tau = parse_num(q, value)?,
                "sigma" => p.sigma = parse_num(q, value)?,
                "xi" => p.xi = parse_num(q, value)?,
                _ => return unknown(),
            },
            Some(Command::Verify) => match key {
                "states" => self.verify.states = parse_num(q, value)?,
                "samples" => self.verify.samples = parse_num(q, value)?,
                _ => return unknown(),
            },
            Some(Command::Spectrum) => return unknown(),
            Some(Command::ResolventScan) => match key {
                "lambda_min" => self.scan.lambda_min = parse_num(q, value)?,
                "lambda_max" => self.scan.lambda_max = parse_lambda_max(q, value)?,
                "points" => self.scan.points = parse_num(q, value)?,
                _ => return unknown(),
            },
            Some(Command::Probe) => match key {
                "probes" => self.probe.probes = parse_list(q, value)?,
                "lambda_min" => self.probe.lambda_min = parse_num(q, value)?,
                "lambda_max" => self.probe.lambda_max = parse_lambda_max(q, value)?,
                "points" => self.probe.points = parse_num(q, value)?,
                "samples" => self.probe.samples = parse_num(q, value)?,
                _ => return unknown(),
            },
            Some(Command::Simulate) => match key {
                "t_end" => self.simulate.t_end = parse_num(q, value)?,
                "steps" => self.simulate.steps = parse_num(q, value)?,
                "method" => self.simulate.method = parse_num(q, value)?,
                "tail_fraction" => self.simulate.tail_fraction = parse_num(q, value)?,
                _ => return unknown(),
            },
            Some(Command::RegionMap) => match key {
                "lattice" => self.region.lattice = cube_lattice(&parse_list::<f64>(q, value)?),
                "points" => self.region.lattice = parse_points(q, value)?,
                "checks" => self.region.checks = parse_list(q, value)?,
                "lambda_min" => self.region.lambda_min = parse_num(q, value)?,
                "scan_points" => self.region.scan_points = parse_num(q, value)?,
                "probe_points" => self.region.probe_points = parse_num(q, value)?,
                "probe_samples" => self.region.probe_samples = parse_num(q, value)?,
                _ => return unknown(),
            },
        }
        Ok(())
    }

    /// Checks every precondition `command` relies on before any numerics.
    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        Grid::<f64>::new(self.n, self.length).map_err(|e| {
            let key = if matches!(e, Error::InvalidGridSize(_)) { "n" } else { "length" };
            ConfigError::new(key, e.to_string())
        })?;
        self.params
            .validate(self.system)
            .map_err(|e| ConfigError::from_model("params", e))?;
        let p = &self.params;
        let positive = |key: &str, v: usize| {
            if v == 0 {
                Err(ConfigError::new(key, "must be >= 1"))
            } else {
                Ok(())
            }
        };
        let band = |key: &str, lo: f64, hi: Option<f64>| {
            if !(lo > 0.0 && lo.is_finite()) {
                return Err(ConfigError::new(format!("{key}.lambda_min"), "must be positive"));
            }
            match hi {
                Some(h) if !(h > lo && h.is_finite()) => {
                    Err(ConfigError::new(format!("{key}.lambda_max"), "must exceed lambda_min"))
                }
                _ => Ok(()),
            }
        };
        match command {
            Command::Verify => {
                positive("verify.states", self.verify.states)?;
                positive("verify.samples", self.verify.samples)?;
            }
            Command::Spectrum => {}
            Command::ResolventScan => {
                band("resolvent-scan", self.scan.lambda_min, self.scan.lambda_max)?;
                if self.scan.points < 8 {
                    return Err(ConfigError::new("resolvent-scan.points", "must be >= 8"));
                }
            }
            Command::Probe => {
                band("probe", self.probe.lambda_min, self.probe.lambda_max)?;
                positive("probe.points", self.probe.points)?;
                positive("probe.samples", self.probe.samples)?;
                for probe in &self.probe.probes {
                    probe
                        .check_applicable(self.system, p.tau, p.sigma, p.xi)
                        .map_err(|e| ConfigError::new("probe.probes", e.to_string()))?;
                }
                if self.probes().is_empty() {
                    return Err(ConfigError::new("probe.probes", "no probe applies to this system and exponents"));
                }
            }
            Command::Simulate => {
                let s = &self.simulate;
                if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
                    return Err(ConfigError::new("simulate.t_end", "must be finite and >= 0"));
                }
                positive("simulate.steps", s.steps)?;
                if !(s.tail_fraction > 0.0 && s.tail_fraction <= 1.0) {
                    return Err(ConfigError::new("simulate.tail_fraction", "must lie in (0, 1]"));
                }
            }
            Command::RegionMap => {
                let r = &self.region;
                if r.lattice.is_empty() {
                    return Err(ConfigError::new("region-map.lattice", "lattice is empty"));
                }
                if r.lattice.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(ConfigError::new("region-map.lattice", "exponents must lie in [0, 1]"));
                }
                band("region-map", r.lambda_min, None)?;
                if r.checks.contains(&Check::Scan) && r.scan_points < 8 {
                    return Err(ConfigError::new("region-map.scan_points", "must be >= 8"));
                }
                if r.checks.contains(&Check::Probes) {
                    positive("region-map.probe_points", r.probe_points)?;
                    positive("region-map.probe_samples", r.probe_samples)?;
                }
            }
        }
        Ok(())
    }

    /// Probes selected for the probe command.
    pub fn probes(&self) -> Vec<ProbeId> {
        if self.probe.probes.is_empty() {
            let p = &self.params;
            ProbeId::applicable(self.system, p.tau, p.sigma, p.xi)
        } else {
            self.probe.probes.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.system, SystemId::System1);
        assert_eq!(c.n, 64);
        assert_eq!(c.seed, 42);
        assert_eq!(c.length, std::f64::consts::PI);
        for cmd in Command::ALL {
            c.validate(cmd).unwrap();
        }
    }

    #[test]
    fn parses_sections_and_comments() {
        let text = "
            # global
            system = 2   # trailing
            n = 16
            tau = 0.75
            K = 2.5

            [resolvent-scan]
            points = 12
            lambda_max = 30

            [region-map]
            points = 0.5 0.5 0.5; 1 1 1
            checks = abscissa, scan

            [probe]
            probes = L12, L13i
        ";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.system, SystemId::System2);
        assert_eq!(c.n, 16);
        assert_eq!(c.params.tau, 0.75);
        assert_eq!(c.params.big_k, 2.5);
        assert_eq!(c.scan.points, 12);
        assert_eq!(c.scan.lambda_max, Some(30.0));
        assert_eq!(c.region.lattice, vec![[0.5; 3], [1.0; 3]]);
        assert_eq!(c.region.checks, vec![Check::Abscissa, Check::Scan]);
        assert_eq!(c.probe.probes, vec![ProbeId::L12, ProbeId::L13i]);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::parse("n = 8\nbogus = 1").unwrap_err();
        assert_eq!(e.key, "bogus");
        let e = RunConfig::parse("[verify]\nstates = x").unwrap_err();
        assert_eq!(e.key, "verify.states");
        let e = RunConfig::parse("[spectrum]\npoints = 3").unwrap_err();
        assert_eq!(e.key, "spectrum.points");
        let e = RunConfig::parse("[nope]").unwrap_err();
        assert_eq!(e.key, "[nope]");
        let e = RunConfig::parse("n = 8\nn = 10").unwrap_err();
        assert_eq!(e.message, "duplicate key");
        assert!(RunConfig::parse("just words").is_err());
        assert_eq!(RunConfig::parse("system = 3").unwrap_err().key, "system");
    }

    #[test]
    fn validation_names_the_key() {
        let c = RunConfig::parse("n = 7").unwrap();
        assert_eq!(c.validate(Command::Spectrum).unwrap_err().key, "n");
        let c = RunConfig::parse("kappa = -1").unwrap();
        assert_eq!(c.validate(Command::Spectrum).unwrap_err().key, "kappa");
        let c = RunConfig::parse("[region-map]\nlattice =").unwrap();
        assert_eq!(c.validate(Command::RegionMap).unwrap_err().key, "region-map.lattice");
        c.validate(Command::Spectrum).unwrap();
        let c = RunConfig::parse("[probe]\nprobes = L12").unwrap();
        assert_eq!(c.validate(Command::Probe).unwrap_err().key, "probe.probes");
        let c = RunConfig::parse("[simulate]\ntail_fraction = 0").unwrap();
        assert_eq!(c.validate(Command::Simulate).unwrap_err().key, "simulate.tail_fraction");
    }
}
