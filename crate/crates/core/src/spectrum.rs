//! Eigenvalues of the generator, spectral abscissa and distance of the
//! spectrum from the imaginary axis.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::generator::Generator;

/// Largest state dimension handed to the dense eigensolver.
pub const MAX_DENSE_DIM: usize = 3000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex<f64>>,
    pub abscissa: f64,
    pub axis_gap: f64,
}

/// All `6n` eigenvalues, sorted by decreasing real part then imaginary part.
///
/// Computed on `C B C^{-1}`, which has the same spectrum as `B` but is
/// better conditioned in the energy geometry.
pub fn eigenvalues(gen: &Generator<f64>) -> Result<Vec<Complex<f64>>> {
    if gen.dim() > MAX_DENSE_DIM {
        return Err(Error::Eigensolver(format!(
            "dimension {} exceeds the dense limit {MAX_DENSE_DIM}",
            gen.dim()
        )));
    }
    let m = dense::to_faer(gen.energy_similar());
    let mut eig = m
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(eig)
}

pub fn spectral_abscissa(gen: &Generator<f64>) -> Result<f64> {
    Ok(abscissa_of(&eigenvalues(gen)?))
}

pub fn axis_gap(gen: &Generator<f64>) -> Result<f64> {
    Ok(axis_gap_of(&eigenvalues(gen)?))
}

pub fn abscissa_of(eig: &[Complex<f64>]) -> f64 {
    eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

pub fn axis_gap_of(eig: &[Complex<f64>]) -> f64 {
    eig.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min)
}

pub fn report(gen: &Generator<f64>) -> Result<SpectrumReport> {
    let eigenvalues = eigenvalues(gen)?;
    Ok(SpectrumReport {
        abscissa: abscissa_of(&eigenvalues),
        axis_gap: axis_gap_of(&eigenvalues),
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::params::{ModelParams, SystemId};
    use crate::resolvent::resolvent_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gen(system: SystemId, n: usize, p: ModelParams<f64>) -> Generator<f64> {
        Generator::assemble(&p, &Grid::new(n, PI).unwrap(), system).unwrap()
    }

    fn assert_conjugate_closed(eig: &[Complex<f64>]) {
        for z in eig {
            let best = eig
                .iter()
                .map(|w| (w - z.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-8 * (1.0 + z.norm()), "{z} has no conjugate partner");
        }
    }

    #[test]
    fn conservative_spectrum_is_imaginary() {
        for system in [SystemId::System1, SystemId::System2] {
            let p = ModelParams::unit(0.5, 0.5, 0.5).conservative(system);
            let g = gen(system, 16, p);
            let eig = eigenvalues(&g).unwrap();
            assert_eq!(eig.len(), 96);
            assert!(eig.iter().all(|z| z.re.abs() <= 1e-8 * (1.0 + z.norm())));
            assert!(spectral_abscissa(&g).unwrap().abs() <= 1e-8);
            assert!(axis_gap(&g).unwrap() <= 1e-8);
            assert_conjugate_closed(&eig);
        }
    }

    #[test]
    fn damped_spectrum_left_of_axis() {
        let g = gen(SystemId::System2, 32, ModelParams::unit(1.0, 1.0, 1.0));
        let r = report(&g).unwrap();
        assert_conjugate_closed(&r.eigenvalues);
        assert!(r.abscissa < 0.0);
        assert!(r.axis_gap > 0.0);
        // The rightmost eigenvalue is the one nearest the axis here.
        assert_eq!(r.axis_gap, -r.abscissa);

        let g = gen(SystemId::System1, 32, ModelParams::unit(0.5, 0.5, 0.5));
        assert!(axis_gap(&g).unwrap() > 0.0);
    }

    #[test]
    fn numerical_range_bounds_abscissa() {
        let g = gen(SystemId::System1, 12, ModelParams::unit(0.25, 0.75, 0.5));
        let abscissa = spectral_abscissa(&g).unwrap();
        let mut best = f64::NEG_INFINITY;
        for seed in 0..200 {
            let u = g.random_state(seed);
            best = best.max(g.dissipation_rate(&u).unwrap() / g.norm_sq(&u).unwrap());
        }
        assert!(best <= 0.0);
        // Supremum of the numerical range in the energy geometry: largest
        // eigenvalue of the symmetric part of C B C^{-1}.
        let m = g.energy_similar();
        let sym = (m + m.transpose()) * 0.5;
        let sup = sym.symmetric_eigen().eigenvalues.max();
        assert!(best <= sup + 1e-12);
        assert!(sup <= 1e-10);
        assert!(abscissa <= sup + 1e-8);
    }

    #[test]
    fn resolvent_dominates_inverse_distance() {
        let g = gen(SystemId::System2, 10, ModelParams::unit(0.6, 0.4, 0.8));
        let eig = eigenvalues(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let l: f64 = rng.gen_range(-15.0..15.0);
            let dist = eig
                .iter()
                .map(|z| (Complex::new(0.0, l) - z).norm())
                .fold(f64::INFINITY, f64::min);
            let r = resolvent_norm(&g, l).unwrap();
            assert!(r >= (1.0 / dist) * (1.0 - 1e-6));
        }
    }
}
