//! Resolvent solves, energy-norm resolvent norms along the imaginary axis and
//! the scaling-exponent fit used to read off Gevrey/analytic behaviour.

use faer::c64;
use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::generator::{real_mul_complex, Generator};
use crate::spectrum;
use crate::state::StateVector;

/// Above this state dimension the smallest singular value is found by
/// inverse iteration instead of a full dense SVD.
pub const DENSE_SVD_LIMIT: usize = 1500;

/// Decades of the resolved band used by the default exponent fit.
pub const FIT_DECADES: f64 = 1.5;

/// Minimum number of scan points inside a fit window.
pub const MIN_FIT_POINTS: usize = 6;

/// Solves `(i lambda I - B) U = F`.
pub fn resolve(gen: &Generator<f64>, lambda: f64, f: &StateVector<f64>) -> Result<StateVector<f64>> {
    if f.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: f.len(),
        });
    }
    let lu = factor(gen, lambda)?;
    let u = dense::solve(&lu, f.as_vector());
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularResolvent { lambda });
    }
    StateVector::from_vector(gen.n(), u)
}

pub(crate) fn factor(gen: &Generator<f64>, lambda: f64) -> Result<faer::linalg::solvers::PartialPivLu<c64>> {
    let m = dense::shifted(gen.matrix(), c64::new(0.0, lambda));
    let lu = m.partial_piv_lu();
    let singular = (0..m.nrows()).any(|i| {
        let u = lu.U()[(i, i)];
        u.norm() == 0.0 || !u.re.is_finite() || !u.im.is_finite()
    });
    if singular {
        return Err(Error::SingularResolvent { lambda });
    }
    Ok(lu)
}

/// `||(i lambda I - B) U - F||`, Euclidean.
pub fn residual(gen: &Generator<f64>, lambda: f64, u: &StateVector<f64>, f: &StateVector<f64>) -> f64 {
    let bu = real_mul_complex(gen.matrix(), u.as_vector());
    let shift = Complex::new(0.0, lambda);
    let r = u.as_vector().map(|z| z * shift) - bu - f.as_vector();
    r.norm()
}

/// Smallest singular value of `C (i lambda I - B) C^{-1}` by dense SVD.
pub fn sigma_min_svd(gen: &Generator<f64>, lambda: f64) -> Result<f64> {
    let m = dense::shifted(gen.energy_similar(), c64::new(0.0, lambda));
    let s = m.singular_values().map_err(|e| Error::Svd(format!("{e:?}")))?;
    s.last().copied().ok_or_else(|| Error::Svd("empty matrix".into()))
}

/// Smallest singular value of `C (i lambda I - B) C^{-1}` by inverse
/// iteration on `(M^H M)^{-1}` with one LU factorization.
pub fn sigma_min_inverse_iteration(gen: &Generator<f64>, lambda: f64) -> Result<f64> {
    let m = dense::shifted(gen.energy_similar(), c64::new(0.0, lambda));
    let lu = m.partial_piv_lu();
    let dim = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ lambda.to_bits());
    let mut v = DVector::from_fn(dim, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    v /= Complex::new(v.norm(), 0.0);
    let mut estimate = 0.0f64;
    for _ in 0..2000 {
        let w = dense::solve(&lu, &v);
        let rayleigh = w.norm_squared();
        if !rayleigh.is_finite() || rayleigh == 0.0 {
            return Err(Error::SingularResolvent { lambda });
        }
        let z = dense::solve_adjoint(&lu, &w);
        let zn = z.norm();
        v = z / Complex::new(zn, 0.0);
        if (rayleigh - estimate).abs() <= 1e-15 * rayleigh {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
    }
    Ok(1.0 / estimate.sqrt())
}

/// Operator norm of `(i lambda I - B)^{-1}` in the energy norm.
pub fn resolvent_norm(gen: &Generator<f64>, lambda: f64) -> Result<f64> {
    let smin = if gen.dim() <= DENSE_SVD_LIMIT {
        sigma_min_svd(gen, lambda)?
    } else {
        sigma_min_inverse_iteration(gen, lambda)?
    };
    if smin <= 0.0 || !smin.is_finite() {
        return Err(Error::SingularResolvent { lambda });
    }
    Ok(1.0 / smin)
}

/// Half the largest frequency of the undamped generator.
///
/// Beyond the discrete spectrum's frequency extent every matrix resolvent
/// decays like `1/lambda`; scans are confined below this bound. The undamped
/// generator is used so the band does not collapse when strong damping
/// makes all high modes overdamped.
pub fn lambda_max_resolved(gen: &Generator<f64>) -> Result<f64> {
    let system = gen.system();
    let conservative = Generator::assemble(&gen.params().conservative(system), gen.grid(), system)?;
    let eig = spectrum::eigenvalues(&conservative)?;
    let extent = eig.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    Ok(0.5 * extent)
}

/// `2r/(r+1)` with `r = min(tau, sigma, xi)`.
pub fn predicted_eta(tau: f64, sigma: f64, xi: f64) -> Result<f64> {
    for (name, v) in [("tau", tau), ("sigma", sigma), ("xi", xi)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter {
                name,
                value: format!("{v}"),
                reason: "must lie in [0, 1]",
            });
        }
    }
    let r = tau.min(sigma).min(xi);
    Ok(2.0 * r / (r + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaFit {
    pub eta: f64,
    /// RMS deviation of `log norm` from the fitted line.
    pub residual: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub points: usize,
}

/// Least-squares slope of `log norm` against `log lambda` over `[lo, hi]`;
/// returns the negated slope.
pub fn fit_eta(lambdas: &[f64], norms: &[f64], window: (f64, f64)) -> Result<EtaFit> {
    if lambdas.len() != norms.len() {
        return Err(Error::DimensionMismatch {
            expected: lambdas.len(),
            got: norms.len(),
        });
    }
    let (lo, hi) = window;
    let tol = 1e-12;
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(norms)
        .filter(|(l, _)| **l >= lo * (1.0 - tol) && **l <= hi * (1.0 + tol))
        .map(|(l, v)| (l.ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "window [{lo}, {hi}] holds {} points, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all lambdas coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(EtaFit {
        eta: -slope,
        residual,
        window_lo: lo,
        window_hi: hi,
        points: pts.len(),
    })
}

/// Top [`FIT_DECADES`] decades below `lambda_max`.
pub fn default_fit_window(lambda_max: f64) -> (f64, f64) {
    (lambda_max / 10f64.powf(FIT_DECADES), lambda_max)
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k + 1 == count {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    pub eta_fit: Option<EtaFit>,
    pub eta_predicted: f64,
    pub lambda_max_resolved: f64,
    /// Set when part of the scan lies beyond the resolved band.
    pub flagged: bool,
    pub warnings: Vec<String>,
}

impl ScanReport {
    /// Refits over a different window.
    pub fn refit(&self, window: (f64, f64)) -> Result<EtaFit> {
        fit_eta(&self.lambdas, &self.norms, window)
    }
}

/// Resolvent norms on `count` log-spaced points of `[lambda_min, lambda_max]`
/// and an exponent fit over the top decades of that range.
pub fn scan(gen: &Generator<f64>, lambda_min: f64, lambda_max: f64, count: usize) -> Result<ScanReport> {
    let resolved = lambda_max_resolved(gen)?;
    scan_with_band(gen, lambda_min, lambda_max, count, resolved)
}

/// [`scan`] with a precomputed resolved band.
pub fn scan_with_band(
    gen: &Generator<f64>,
    lambda_min: f64,
    lambda_max: f64,
    count: usize,
    resolved: f64,
) -> Result<ScanReport> {
    if !(lambda_min > 0.0 && lambda_min < lambda_max && lambda_max.is_finite()) {
        return Err(Error::InvalidScan(format!(
            "need 0 < lambda_min < lambda_max, got [{lambda_min}, {lambda_max}]"
        )));
    }
    if count < 8 {
        return Err(Error::InvalidScan(format!("count {count} < 8")));
    }
    let p = gen.params();
    let mut warnings = Vec::new();
    let flagged = lambda_max > resolved * (1.0 + 1e-12);
    if flagged {
        warnings.push(format!(
            "lambda_max {lambda_max} exceeds the resolved band {resolved}; high-frequency values reflect the discretization"
        ));
    }
    let lambdas = log_spaced(lambda_min, lambda_max, count);
    let norms = lambdas
        .iter()
        .map(|&l| resolvent_norm(gen, l))
        .collect::<Result<Vec<_>>>()?;
    let window = default_fit_window(lambda_max);
    let eta_fit = match fit_eta(&lambdas, &norms, window) {
        Ok(fit) => Some(fit),
        Err(e) => {
            warnings.push(format!("no exponent fit: {e}"));
            None
        }
    };
    Ok(ScanReport {
        lambdas,
        norms,
        eta_fit,
        eta_predicted: predicted_eta(p.tau, p.sigma, p.xi)?,
        lambda_max_resolved: resolved,
        flagged,
        warnings,
    })
}

/// Largest amplification `||U||_G / ||F||_G` of `-BU = F` over random unit
/// right-hand sides.
pub fn stationary_check(gen: &Generator<f64>, samples: usize, seed: u64) -> Result<f64> {
    let lu = factor(gen, 0.0)?;
    let mut worst = 0.0f64;
    for k in 0..samples {
        let f = gen.random_state(sample_seed(seed, 0, k));
        let u = StateVector::from_vector(gen.n(), dense::solve(&lu, f.as_vector()))?;
        let ratio = (gen.norm_sq(&u)? / gen.norm_sq(&f)?).sqrt();
        if !ratio.is_finite() {
            return Err(Error::SingularResolvent { lambda: 0.0 });
        }
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// Per-sample seed derived from the run seed, the lambda index and the
/// sample index, so results do not depend on evaluation order.
pub fn sample_seed(seed: u64, lambda_index: usize, sample: usize) -> u64 {
    let mut x = seed
        ^ (lambda_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (sample as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
