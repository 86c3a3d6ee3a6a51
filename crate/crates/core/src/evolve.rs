//! Time-domain propagation of `U' = BU` with energy monitoring.
//!
//! Both integrators work in the energy coordinates `y = C U`, where the
//! energy is `|y|² / 2` and the generator becomes `C B C^{-1}`.

use faer::{c64, Mat};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::generator::{real_mul_complex, Generator};
use crate::state::{Block, StateVector};

/// Relative reconstruction error above which an eigenbasis counts as
/// defective.
pub const DEFECTIVE_TOL: f64 = 1e-8;

/// Energies below this are dropped from decay fits.
pub const ENERGY_FLOOR: f64 = 1e-300;

pub const MIN_TAIL_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    EigenExact,
    ImplicitMidpoint,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::EigenExact => "eigen-exact",
            Method::ImplicitMidpoint => "implicit-midpoint",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "eigen-exact" => Ok(Method::EigenExact),
            "implicit-midpoint" => Ok(Method::ImplicitMidpoint),
            other => Err(Error::InvalidPropagation(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector<f64>>,
    pub energies: Vec<f64>,
    /// Method actually used, after any fallback.
    pub method: Method,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector<f64> {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Smoothness ratio of every stored state, see [`smoothness_ratio`].
    pub fn smoothness(&self, gen: &Generator<f64>) -> Result<Vec<f64>> {
        self.states.iter().map(|u| smoothness_ratio(gen, u)).collect()
    }
}

/// `||A^{1/2}`-applied blocks of `U|| / ||U||` in the Euclidean norm.
///
/// Large for rough states, decreasing as high modes are damped out.
pub fn smoothness_ratio(gen: &Generator<f64>, u: &StateVector<f64>) -> Result<f64> {
    let norm = u.euclidean_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for b in Block::ALL {
        let x = gen.grid().frac_power_apply_complex(0.5, &u.block(b).clone_owned())?;
        acc += x.norm_squared();
    }
    Ok(acc.sqrt() / norm)
}

struct EnergyFrame {
    chol_inv: DMatrix<f64>,
}

impl EnergyFrame {
    fn new(gen: &Generator<f64>) -> Result<Self> {
        let dim = gen.dim();
        let chol_inv = gen
            .chol()
            .solve_upper_triangular(&DMatrix::identity(dim, dim))
            .ok_or(Error::GramNotPositiveDefinite)?;
        Ok(Self { chol_inv })
    }

    fn state(&self, gen: &Generator<f64>, y: &DVector<Complex<f64>>) -> Result<StateVector<f64>> {
        StateVector::from_vector(gen.n(), real_mul_complex(&self.chol_inv, y))
    }
}

/// Propagates `U0` over `[0, t_end]` in `steps` equal steps.
///
/// `t_end = 0` is accepted and returns copies of `U0`. An eigendecomposition
/// that fails or is numerically defective switches to the midpoint scheme and
/// records a warning.
pub fn propagate(
    gen: &Generator<f64>,
    u0: &StateVector<f64>,
    t_end: f64,
    steps: usize,
    method: Method,
) -> Result<Trajectory> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidPropagation(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    if steps == 0 {
        return Err(Error::InvalidPropagation("steps must be >= 1".into()));
    }
    if u0.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: u0.len(),
        });
    }
    let dt = t_end / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let y0 = real_mul_complex(gen.chol(), u0.as_vector());
    let mut warnings = Vec::new();

    let (ys, used) = match method {
        Method::EigenExact => match eigen_exact(gen, &y0, &times) {
            Ok(ys) => (ys, Method::EigenExact),
            Err(reason) => {
                warnings.push(format!("eigen-exact unavailable ({reason}); using implicit-midpoint"));
                (midpoint(gen, &y0, dt, steps)?, Method::ImplicitMidpoint)
            }
        },
        Method::ImplicitMidpoint => (midpoint(gen, &y0, dt, steps)?, Method::ImplicitMidpoint),
    };

    let frame = EnergyFrame::new(gen)?;
    let energies = ys.iter().map(|y| 0.5 * y.norm_squared()).collect();
    let states = ys.iter().map(|y| frame.state(gen, y)).collect::<Result<_>>()?;
    Ok(Trajectory {
        times,
        states,
        energies,
        method: used,
        warnings,
    })
}

fn eigen_exact(gen: &Generator<f64>, y0: &DVector<Complex<f64>>, times: &[f64]) -> std::result::Result<Vec<DVector<Complex<f64>>>, String> {
    let m = dense::to_faer(gen.energy_similar());
    let evd = m.eigen().map_err(|e| format!("{e:?}"))?;
    let v = evd.U().to_owned();
    let lam: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let dim = m.nrows();

    let lu = v.partial_piv_lu();
    let coeffs = dense::from_column(&faer::linalg::solvers::Solve::solve(&lu, dense::column(y0)));

    // Reconstruction test on the eigenpairs themselves and on the expansion
    // of the initial datum.
    let mv = dense::to_faer_complex(gen.energy_similar()) * &v;
    let mut residual = 0.0f64;
    for j in 0..dim {
        for i in 0..dim {
            residual = residual.max((mv[(i, j)] - v[(i, j)] * lam[j]).norm());
        }
    }
    let scale = m.norm_max().max(f64::MIN_POSITIVE);
    let back = dense::mul(&v, &coeffs);
    let expansion = (back - y0).norm() / y0.norm().max(f64::MIN_POSITIVE);
    if !(residual <= DEFECTIVE_TOL * scale) || !(expansion <= DEFECTIVE_TOL) || coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(format!("defective eigenbasis (pair residual {residual:.3e}, expansion error {expansion:.3e})"));
    }

    Ok(times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return y0.clone();
            }
            let scaled = DVector::from_fn(dim, |i, _| coeffs[i] * (lam[i] * t).exp());
            dense::mul(&v, &scaled)
        })
        .collect())
}

fn midpoint(gen: &Generator<f64>, y0: &DVector<Complex<f64>>, dt: f64, steps: usize) -> Result<Vec<DVector<Complex<f64>>>> {
    let m = gen.energy_similar();
    let dim = m.nrows();
    let half = 0.5 * dt;
    let lhs = Mat::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 } - half * m[(i, j)]);
    let lu = lhs.partial_piv_lu();
    if (0..dim).any(|i| lu.U()[(i, i)] == 0.0) {
        return Err(Error::InvalidPropagation("midpoint step matrix is singular".into()));
    }
    let mut ys = Vec::with_capacity(steps + 1);
    ys.push(y0.clone());
    let mut y = y0.clone();
    for _ in 0..steps {
        let my = real_mul_complex(m, &y);
        let rhs = Mat::from_fn(dim, 2, |i, c| {
            let z = y[i] + my[i] * half;
            if c == 0 {
                z.re
            } else {
                z.im
            }
        });
        let sol = faer::linalg::solvers::Solve::solve(&lu, rhs);
        y = DVector::from_fn(dim, |i, _| Complex::new(sol[(i, 0)], sol[(i, 1)]));
        ys.push(y.clone());
    }
    Ok(ys)
}

/// Exponential rate of the state from the energy tail: half the
/// least-squares slope of `ln E(t)` over the last `tail_fraction` of samples.
///
/// The window stops at the first energy below [`ENERGY_FLOOR`].
pub fn fit_decay_rate(traj: &Trajectory, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::DegenerateFit(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let len = traj.times.len();
    let start = len - ((tail_fraction * len as f64).ceil() as usize).min(len);
    let (t, e): (Vec<f64>, Vec<f64>) = traj.times[start..]
        .iter()
        .zip(&traj.energies[start..])
        .take_while(|(_, e)| **e >= ENERGY_FLOOR)
        .map(|(t, e)| (*t, e.ln()))
        .unzip();
    if t.len() < MIN_TAIL_SAMPLES {
        return Err(Error::DegenerateFit(format!(
            "{} usable tail samples, need {MIN_TAIL_SAMPLES}",
            t.len()
        )));
    }
    let k = t.len() as f64;
    let tm = t.iter().sum::<f64>() / k;
    let em = e.iter().sum::<f64>() / k;
    let sxx: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    let sxy: f64 = t.iter().zip(&e).map(|(x, y)| (x - tm) * (y - em)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("tail samples share one time".into()));
    }
    Ok(0.5 * sxy / sxx)
}
