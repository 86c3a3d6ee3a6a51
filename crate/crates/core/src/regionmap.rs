//! Predicted regularity class over the exponent cube, with optional measured
//! checks per lattice point.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::grid::Grid;
use crate::params::{ModelParams, SystemId};
use crate::probe::{lemma_probe, summarize, ProbeId, ProbeSummary, EQUALITY_TOL};
use crate::resolvent::{lambda_max_resolved, log_spaced, predicted_eta, sample_seed, scan_with_band};
use crate::spectrum::spectral_abscissa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    StableOnly,
    Gevrey,
    Analytic,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::StableOnly => "stable-only",
            Label::Gevrey => "gevrey",
            Label::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    /// 1 for analytic points, `2r/(r+1)` otherwise.
    pub eta_pred: f64,
    /// `2r/(r+1)` at every point; continuous over the cube.
    pub eta_gevrey: f64,
}

pub fn classify(tau: f64, sigma: f64, xi: f64, system: SystemId) -> Result<Classification> {
    let eta_gevrey = predicted_eta(tau, sigma, xi)?;
    let r = tau.min(sigma).min(xi);
    let analytic = r >= 0.5
        && match system {
            SystemId::System1 => true,
            SystemId::System2 => (tau - xi).abs() <= EQUALITY_TOL,
        };
    let (label, eta_pred) = if analytic {
        (Label::Analytic, 1.0)
    } else if r > 0.0 {
        (Label::Gevrey, eta_gevrey)
    } else {
        (Label::StableOnly, eta_gevrey)
    };
    Ok(Classification {
        label,
        eta_pred,
        eta_gevrey,
    })
}

/// All triples of `values`, tau slowest.
pub fn cube_lattice(values: &[f64]) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(values.len().pow(3));
    for &t in values {
        for &s in values {
            for &x in values {
                out.push([t, s, x]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Scan,
    Abscissa,
    Probes,
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "scan" => Ok(Check::Scan),
            "abscissa" => Ok(Check::Abscissa),
            "probes" => Ok(Check::Probes),
            other => Err(Error::InvalidScan(format!("unknown check {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub system: SystemId,
    pub base: ModelParams<f64>,
    pub n: usize,
    pub length: f64,
    pub lattice: Vec<[f64; 3]>,
    pub checks: Vec<Check>,
    pub lambda_min: f64,
    pub scan_points: usize,
    pub probe_points: usize,
    pub probe_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub tau: f64,
    pub sigma: f64,
    pub xi: f64,
    pub system: SystemId,
    pub predicted: Label,
    pub eta_pred: f64,
    pub eta_gevrey: f64,
    pub eta_fit: Option<f64>,
    pub abscissa: Option<f64>,
    pub probes: Vec<ProbeSummary>,
    /// `None` when probes were not requested.
    pub probes_passed: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub spec: SweepSpec,
    pub points: Vec<RegionPoint>,
}

/// Evaluates every lattice point. Points are independent and distributed
/// over `jobs` threads; the report order follows the lattice. A failing
/// point records its error and the sweep continues.
pub fn sweep(spec: &SweepSpec, jobs: usize) -> Result<RegionReport> {
    if spec.lattice.is_empty() {
        return Err(Error::InvalidScan("empty lattice".into()));
    }
    for p in &spec.lattice {
        predicted_eta(p[0], p[1], p[2])?;
    }
    let grid = if spec.checks.is_empty() {
        None
    } else {
        Some(Grid::new(spec.n, spec.length)?)
    };
    let jobs = jobs.clamp(1, spec.lattice.len());
    let mut slots: Vec<Option<RegionPoint>> = vec![None; spec.lattice.len()];
    std::thread::scope(|scope| {
        let chunk = spec.lattice.len().div_ceil(jobs);
        for (c, out) in slots.chunks_mut(chunk).enumerate() {
            let grid = grid.as_ref();
            scope.spawn(move || {
                for (k, slot) in out.iter_mut().enumerate() {
                    let index = c * chunk + k;
                    *slot = Some(evaluate(spec, grid, index));
                }
            });
        }
    });
    Ok(RegionReport {
        spec: spec.clone(),
        points: slots.into_iter().map(|p| p.expect("every slot filled")).collect(),
    })
}

fn evaluate(spec: &SweepSpec, grid: Option<&Grid<f64>>, index: usize) -> RegionPoint {
    let [tau, sigma, xi] = spec.lattice[index];
    let class = classify(tau, sigma, xi, spec.system).expect("lattice validated");
    let mut point = RegionPoint {
        tau,
        sigma,
        xi,
        system: spec.system,
        predicted: class.label,
        eta_pred: class.eta_pred,
        eta_gevrey: class.eta_gevrey,
        eta_fit: None,
        abscissa: None,
        probes: Vec::new(),
        probes_passed: None,
        error: None,
    };
    if let Some(grid) = grid {
        if let Err(e) = measure(spec, grid, index, &mut point) {
            point.error = Some(e.to_string());
        }
    }
    point
}

fn measure(spec: &SweepSpec, grid: &Grid<f64>, index: usize, point: &mut RegionPoint) -> Result<()> {
    let params = spec.base.clone().with_exponents(point.tau, point.sigma, point.xi);
    let gen = Generator::assemble(&params, grid, spec.system)?;
    if spec.checks.contains(&Check::Abscissa) {
        point.abscissa = Some(spectral_abscissa(&gen)?);
    }
    let wants_band = spec.checks.contains(&Check::Scan) || spec.checks.contains(&Check::Probes);
    if !wants_band {
        return Ok(());
    }
    let band = lambda_max_resolved(&gen)?;
    if spec.checks.contains(&Check::Scan) {
        let report = scan_with_band(&gen, spec.lambda_min, band, spec.scan_points, band)?;
        point.eta_fit = report.eta_fit.map(|f| f.eta);
    }
    if spec.checks.contains(&Check::Probes) {
        let lambdas = log_spaced(spec.lambda_min, band, spec.probe_points);
        let seed = sample_seed(spec.seed, index, usize::MAX);
        for probe in ProbeId::applicable(spec.system, point.tau, point.sigma, point.xi) {
            let ratios = lemma_probe(&gen, probe, &lambdas, spec.probe_samples, seed)?;
            point.probes.push(summarize(probe, &lambdas, &ratios));
        }
        point.probes_passed = Some(point.probes.iter().all(|s| s.bounded));
    }
    Ok(())
}
