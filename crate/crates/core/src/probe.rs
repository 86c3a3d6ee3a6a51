//! Frequency-domain inequalities evaluated as bounded-ratio probes.
//!
//! Each probe draws random right-hand sides `F` of unit energy norm, solves
//! `(i lambda I - B) U = F` and evaluates `lhs / (||F|| ||U||)` for one of the
//! a-priori estimates. The estimates claim a lambda-independent constant, so
//! the per-lambda maximum must stay bounded as lambda grows. Norms inside the
//! probes use the continuous problem's literal energy coefficients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::params::{literal_weights, SystemId};
use crate::resolvent::{factor, sample_seed};
use crate::state::StateVector;

/// Tolerance for the `tau = xi` condition; lattice values are exact binary
/// fractions.
pub const EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbeId {
    /// Bounded resolvent, system 1.
    L3,
    /// Potential/kinetic balance for the beam fields, system 1.
    L4i,
    /// Potential/kinetic balance for the thermal field, system 1.
    L4ii,
    /// `|lambda| ||Phi||²`, needs `tau >= 1/2`.
    L10i,
    /// `|lambda| ||Psi||²`, needs `sigma >= 1/2`.
    L10ii,
    /// `|lambda| ||Theta||²`, needs `xi >= 1/2`.
    L10iii,
    /// Bounded resolvent, system 2.
    L12,
    L13i,
    L13ii,
    /// `|lambda| (||Phi||² + ||Theta||²)`, needs `1/2 <= tau = xi`.
    L15i,
    /// `|lambda| ||Psi||²`, needs `sigma >= 1/2`.
    L15ii,
}

impl ProbeId {
    pub const ALL: [ProbeId; 11] = [
        ProbeId::L3,
        ProbeId::L4i,
        ProbeId::L4ii,
        ProbeId::L10i,
        ProbeId::L10ii,
        ProbeId::L10iii,
        ProbeId::L12,
        ProbeId::L13i,
        ProbeId::L13ii,
        ProbeId::L15i,
        ProbeId::L15ii,
    ];

    pub fn system(self) -> SystemId {
        use ProbeId::*;
        match self {
            L3 | L4i | L4ii | L10i | L10ii | L10iii => SystemId::System1,
            L12 | L13i | L13ii | L15i | L15ii => SystemId::System2,
        }
    }

    pub fn name(self) -> &'static str {
        use ProbeId::*;
        match self {
            L3 => "L3",
            L4i => "L4i",
            L4ii => "L4ii",
            L10i => "L10i",
            L10ii => "L10ii",
            L10iii => "L10iii",
            L12 => "L12",
            L13i => "L13i",
            L13ii => "L13ii",
            L15i => "L15i",
            L15ii => "L15ii",
        }
    }

    /// Checks system and exponent-range preconditions.
    pub fn check_applicable(self, system: SystemId, tau: f64, sigma: f64, xi: f64) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::ProbeNotApplicable {
                probe: self.name().into(),
                reason,
            })
        };
        if self.system() != system {
            return fail(format!("belongs to {}, generator is {system}", self.system()));
        }
        let half = 0.5;
        use ProbeId::*;
        match self {
            L10i if tau < half => fail(format!("needs tau >= 1/2, got {tau}")),
            L10ii | L15ii if sigma < half => fail(format!("needs sigma >= 1/2, got {sigma}")),
            L10iii if xi < half => fail(format!("needs xi >= 1/2, got {xi}")),
            L15i if (tau - xi).abs() > EQUALITY_TOL => fail(format!("needs tau = xi, got {tau} and {xi}")),
            L15i if tau < half => fail(format!("needs tau = xi >= 1/2, got {tau}")),
            _ => Ok(()),
        }
    }

    pub fn applicable(system: SystemId, tau: f64, sigma: f64, xi: f64) -> Vec<ProbeId> {
        Self::ALL
            .into_iter()
            .filter(|p| p.check_applicable(system, tau, sigma, xi).is_ok())
            .collect()
    }
}

impl fmt::Display for ProbeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProbeId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::ProbeNotApplicable {
                probe: s.into(),
                reason: "unknown probe id".into(),
            })
    }
}

/// Squared norms of the six energy coordinates.
struct Coordinates {
    phi_vel: f64,
    psi_vel: f64,
    shear: f64,
    bend: f64,
    theta_grad: f64,
    theta_vel: f64,
}

impl Coordinates {
    fn of(gen: &Generator<f64>, u: &StateVector<f64>) -> Result<Self> {
        let c = gen.energy_coordinates(u)?;
        Ok(Self {
            phi_vel: c[0].norm_squared(),
            psi_vel: c[1].norm_squared(),
            shear: c[2].norm_squared(),
            bend: c[3].norm_squared(),
            theta_grad: c[4].norm_squared(),
            theta_vel: c[5].norm_squared(),
        })
    }

    fn literal_norm(&self, gen: &Generator<f64>) -> f64 {
        let w = literal_weights(gen.params(), gen.system());
        (w.phi_vel * self.phi_vel
            + w.psi_vel * self.psi_vel
            + w.shear * self.shear
            + w.bend * self.bend
            + w.theta_grad * self.theta_grad
            + w.theta_vel * self.theta_vel)
            .sqrt()
    }
}

/// Left-hand side of the probed estimate; deficit probes are clamped at zero.
fn probe_lhs(probe: ProbeId, gen: &Generator<f64>, lambda: f64, u: &Coordinates, u_norm: f64) -> f64 {
    let p = gen.params();
    let l = lambda.abs();
    use ProbeId::*;
    match probe {
        L3 | L12 => u_norm * u_norm,
        L4i => {
            let bg = p.beta * p.gamma;
            let potential = l * bg * (p.kappa * u.shear + p.b * u.bend);
            let kinetic = l * bg * (p.rho1 * u.phi_vel + p.rho2 * u.psi_vel);
            (potential - kinetic).max(0.0)
        }
        L4ii => {
            let bk = p.beta * p.kappa;
            (bk * p.delta * l * u.theta_grad - bk * p.rho3 * l * u.theta_vel).max(0.0)
        }
        L10i => l * u.phi_vel,
        L10ii | L15ii => l * u.psi_vel,
        L10iii => l * u.theta_vel,
        // The unnamed constant in front of ||Theta||² is taken as rho3.
        L13i => {
            let potential = l * (p.kappa * u.shear + p.b * u.bend);
            let kinetic = l * (p.rho1 * u.phi_vel + p.rho2 * u.psi_vel + p.rho3 * u.theta_vel);
            (potential - kinetic).max(0.0)
        }
        L13ii => (p.delta * l * u.theta_grad - p.rho3 * l * (u.theta_vel + u.phi_vel)).max(0.0),
        L15i => l * (u.phi_vel + u.theta_vel),
    }
}

/// Per-lambda maximum of the probe ratio over `samples` random unit `F`.
pub fn lemma_probe(
    gen: &Generator<f64>,
    probe: ProbeId,
    lambdas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let p = gen.params();
    probe.check_applicable(gen.system(), p.tau, p.sigma, p.xi)?;
    let mut out = Vec::with_capacity(lambdas.len());
    for (li, &lambda) in lambdas.iter().enumerate() {
        let lu = factor(gen, lambda)?;
        let mut worst = 0.0f64;
        for k in 0..samples {
            let f = gen.random_state(sample_seed(seed, li, k));
            let u = StateVector::from_vector(gen.n(), dense::solve(&lu, f.as_vector()))?;
            let uc = Coordinates::of(gen, &u)?;
            let u_norm = uc.literal_norm(gen);
            let f_norm = Coordinates::of(gen, &f)?.literal_norm(gen);
            let denom = f_norm * u_norm;
            let ratio = if denom > 0.0 {
                probe_lhs(probe, gen, lambda, &uc, u_norm) / denom
            } else {
                0.0
            };
            worst = worst.max(ratio);
        }
        out.push(worst);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub probe: ProbeId,
    pub top_decade_max: f64,
    pub median: f64,
    pub bounded: bool,
}

/// Boundedness verdict: the maximum over the top lambda decade must stay
/// below twice the median over the whole grid. An identically vanishing
/// deficit counts as bounded.
pub fn summarize(probe: ProbeId, lambdas: &[f64], ratios: &[f64]) -> ProbeSummary {
    let top = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top_decade_max = lambdas
        .iter()
        .zip(ratios)
        .filter(|(l, _)| **l >= top / 10.0)
        .map(|(_, r)| *r)
        .fold(0.0, f64::max);
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let bounded = top_decade_max < 2.0 * median || top_decade_max == 0.0;
    ProbeSummary {
        probe,
        top_decade_max,
        median,
        bounded,
    }
}
