//! Block generator `B`, its energy Gram matrix and the associated quadratic
//! forms.
//!
//! The generator is real and acts on stacked states of length `6n`. The Gram
//! matrix is `G = L^T W L`, where `L` maps a state to its energy coordinates
//! `(Phi, Psi, D0 phi + psi, A^½ psi, A^½ theta, Theta)` and `W` carries the
//! derived weights. With those weights every coupling term cancels in
//! `Re <BU, U>_G`, so the discrete generator is exactly dissipative.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{derive_weights, ModelParams, SystemId, WeightSet};
use crate::scalar::Real;
use crate::state::{Block, StateVector};

#[derive(Debug, Clone)]
pub struct Generator<T: Real> {
    system: SystemId,
    params: ModelParams<T>,
    weights: WeightSet<T>,
    grid: Grid<T>,
    b: DMatrix<T>,
    gram: DMatrix<T>,
    chol: DMatrix<T>,
    similar: DMatrix<T>,
}

/// Returns `(G, C)` with `C` upper triangular and `C^T C = G`.
pub fn gram_matrix<T: Real>(weights: &WeightSet<T>, grid: &Grid<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let n = grid.n();
    let l = energy_map(grid);
    let w = weights.as_array();
    let mut wl = l.clone();
    for (k, wk) in w.iter().enumerate() {
        wl.rows_mut(k * n, n).scale_mut(*wk);
    }
    let mut g = l.tr_mul(&wl);
    symmetrize(&mut g);
    let chol = g
        .clone()
        .cholesky()
        .ok_or(Error::GramNotPositiveDefinite)?;
    let upper = chol.l().transpose();
    Ok((g, upper))
}

/// Dense map from a state to its six energy coordinates.
fn energy_map<T: Real>(grid: &Grid<T>) -> DMatrix<T> {
    let n = grid.n();
    let id = DMatrix::<T>::identity(n, n);
    let d0 = grid.centered_difference();
    let a_half = grid.frac_power_matrix(T::lit(0.5));
    let mut l = DMatrix::zeros(6 * n, 6 * n);
    let mut put = |row: usize, col: usize, m: &DMatrix<T>| {
        l.view_mut((row * n, col * n), (n, n)).copy_from(m);
    };
    put(0, 1, &id);
    put(1, 3, &id);
    put(2, 0, &d0);
    put(2, 2, &id);
    put(3, 2, &a_half);
    put(4, 4, &a_half);
    put(5, 5, &id);
    l
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let avg = half * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `M v` for a real matrix and a complex vector.
pub(crate) fn real_mul_complex<T: Real>(m: &DMatrix<T>, v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
    let re = m * v.map(|z| z.re);
    let im = m * v.map(|z| z.im);
    DVector::from_fn(m.nrows(), |i, _| Complex::new(re[i], im[i]))
}

fn assemble_matrix<T: Real>(params: &ModelParams<T>, grid: &Grid<T>, system: SystemId) -> DMatrix<T> {
    let n = grid.n();
    let p = params;
    let id = DMatrix::<T>::identity(n, n);
    let d0 = grid.centered_difference();
    let a = grid.laplacian_matrix();
    let a_tau = grid.frac_power_matrix(p.tau);
    let a_sigma = grid.frac_power_matrix(p.sigma);
    let a_xi = grid.frac_power_matrix(p.xi);

    let mut b = DMatrix::zeros(6 * n, 6 * n);
    let mut put = |row: Block, col: Block, m: DMatrix<T>| {
        let mut v = b.view_mut((row.index() * n, col.index() * n), (n, n));
        v += m;
    };
    use Block::*;
    put(Phi, PhiT, id.clone());
    put(Psi, PsiT, id.clone());
    put(Theta, ThetaT, id.clone());

    // rho1 Phi' = kappa D0 (D0 phi + psi) - mu1 A^tau Phi
    put(PhiT, Phi, &d0 * &d0 * (p.kappa / p.rho1));
    put(PhiT, Psi, &d0 * (p.kappa / p.rho1));
    put(PhiT, PhiT, &a_tau * (-p.mu1 / p.rho1));

    // rho2 Psi' = -b A psi - kappa (D0 phi + psi) - mu2 A^sigma Psi + coupling
    put(PsiT, Psi, &a * (-p.b / p.rho2) - &id * (p.kappa / p.rho2));
    put(PsiT, Phi, &d0 * (-p.kappa / p.rho2));
    put(PsiT, PsiT, &a_sigma * (-p.mu2 / p.rho2));

    put(ThetaT, Theta, &a * (-p.delta / p.rho3));
    match system {
        SystemId::System1 => {
            put(PsiT, ThetaT, &d0 * (-p.beta / p.rho2));
            put(ThetaT, PsiT, &d0 * (-p.gamma / p.rho3));
            put(ThetaT, ThetaT, &a_xi * (-p.big_k / p.rho3));
        }
        SystemId::System2 => {
            put(PhiT, ThetaT, &d0 * (-p.mu / p.rho1));
            put(PsiT, ThetaT, &id * (p.mu / p.rho2));
            put(ThetaT, PhiT, &d0 * (-p.mu / p.rho3));
            put(ThetaT, PsiT, &id * (-p.mu / p.rho3));
            put(ThetaT, ThetaT, &a_xi * (-p.gamma / p.rho3));
        }
    }
    b
}

impl<T: Real> Generator<T> {
    pub fn assemble(params: &ModelParams<T>, grid: &Grid<T>, system: SystemId) -> Result<Self> {
        params.validate(system)?;
        let weights = derive_weights(params, system);
        let (gram, chol) = gram_matrix(&weights, grid)?;
        let b = assemble_matrix(params, grid, system);

        // C B C^{-1}: solve X C = C B for X, i.e. C^T X^T = (C B)^T.
        let cb = &chol * &b;
        let lower = chol.transpose();
        let xt = lower
            .solve_lower_triangular(&cb.transpose())
            .ok_or(Error::GramNotPositiveDefinite)?;
        let similar = xt.transpose();

        Ok(Self {
            system,
            params: params.clone(),
            weights,
            grid: grid.clone(),
            b,
            gram,
            chol,
            similar,
        })
    }

    pub fn system(&self) -> SystemId {
        self.system
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn weights(&self) -> &WeightSet<T> {
        &self.weights
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn dim(&self) -> usize {
        6 * self.grid.n()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// Upper-triangular Cholesky factor `C`, `C^T C = G`.
    pub fn chol(&self) -> &DMatrix<T> {
        &self.chol
    }

    /// `C B C^{-1}`: the generator in coordinates where the energy inner
    /// product is Euclidean.
    pub fn energy_similar(&self) -> &DMatrix<T> {
        &self.similar
    }

    fn check(&self, u: &StateVector<T>) -> Result<()> {
        if u.n() != self.n() || u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `BU`.
    pub fn apply(&self, u: &StateVector<T>) -> Result<StateVector<T>> {
        self.check(u)?;
        StateVector::from_vector(self.n(), real_mul_complex(&self.b, u.as_vector()))
    }

    /// `<U, V>_G = V^H G U`.
    pub fn inner(&self, u: &StateVector<T>, v: &StateVector<T>) -> Result<Complex<T>> {
        self.check(u)?;
        self.check(v)?;
        let gu = real_mul_complex(&self.gram, u.as_vector());
        Ok(v.as_vector().dotc(&gu))
    }

    /// `<U, U>_G`.
    pub fn norm_sq(&self, u: &StateVector<T>) -> Result<T> {
        Ok(self.inner(u, u)?.re)
    }

    /// `Re <BU, U>_G`.
    pub fn dissipation_rate(&self, u: &StateVector<T>) -> Result<T> {
        let bu = self.apply(u)?;
        Ok(self.inner(&bu, u)?.re)
    }

    /// Weighted damping form; equals `-Re <BU, U>_G` exactly in exact
    /// arithmetic.
    pub fn dissipation_form(&self, u: &StateVector<T>) -> Result<T> {
        self.check(u)?;
        let p = &self.params;
        let w = &self.weights;
        let half = T::lit(0.5);
        let grid = &self.grid;
        let term = |block: Block, nu: T| -> Result<T> {
            let v = u.block(block).into_owned();
            let av = grid.frac_power_apply_complex(nu * half, &v)?;
            Ok(av.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()))
        };
        let phi = w.phi_vel * p.mu1 / p.rho1 * term(Block::PhiT, p.tau)?;
        let psi = w.psi_vel * p.mu2 / p.rho2 * term(Block::PsiT, p.sigma)?;
        let theta = w.theta_vel * p.thermal_damping(self.system) / p.rho3 * term(Block::ThetaT, p.xi)?;
        Ok(phi + psi + theta)
    }

    /// `½ <U, U>_G`.
    pub fn energy(&self, u: &StateVector<T>) -> Result<T> {
        Ok(T::lit(0.5) * self.norm_sq(u)?)
    }

    /// The six energy coordinates of `U`; `<U, U>_G` is their weighted sum of
    /// squares.
    pub fn energy_coordinates(&self, u: &StateVector<T>) -> Result<[DVector<Complex<T>>; 6]> {
        self.check(u)?;
        let grid = &self.grid;
        let half = T::lit(0.5);
        let d0 = grid.centered_difference();
        let phi = u.block(Block::Phi).into_owned();
        let psi = u.block(Block::Psi).into_owned();
        let shear = real_mul_complex(&d0, &phi) + &psi;
        Ok([
            u.block(Block::PhiT).into_owned(),
            u.block(Block::PsiT).into_owned(),
            shear,
            grid.frac_power_apply_complex(half, &psi)?,
            grid.frac_power_apply_complex(half, &u.block(Block::Theta).into_owned())?,
            u.block(Block::ThetaT).into_owned(),
        ])
    }

    /// Reproducible pseudo-random complex state of unit energy norm.
    pub fn random_state(&self, seed: u64) -> StateVector<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DVector::from_fn(self.dim(), |_, _| {
            Complex::new(
                T::lit(rng.gen_range(-1.0..1.0)),
                T::lit(rng.gen_range(-1.0..1.0)),
            )
        });
        let u = StateVector::from_vector(self.n(), data).expect("dimension by construction");
        let norm = self.norm_sq(&u).expect("dimension by construction").sqrt();
        u.scaled(T::one() / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gen(system: SystemId, n: usize, p: &ModelParams<f64>) -> Generator<f64> {
        Generator::assemble(p, &Grid::new(n, PI).unwrap(), system).unwrap()
    }

    fn weighted_coordinate_norm(g: &Generator<f64>, u: &StateVector<f64>) -> f64 {
        let coords = g.energy_coordinates(u).unwrap();
        g.weights()
            .as_array()
            .iter()
            .zip(coords.iter())
            .map(|(w, c)| w * c.norm_squared())
            .sum()
    }

    fn mixed_params() -> ModelParams<f64> {
        ModelParams {
            rho1: 1.3,
            rho2: 0.7,
            rho3: 2.1,
            kappa: 1.9,
            b: 0.6,
            delta: 1.4,
            beta: 2.0,
            gamma: 3.0,
            mu: 1.5,
            mu1: 0.8,
            mu2: 1.2,
            big_k: 0.9,
            tau: 0.3,
            sigma: 0.7,
            xi: 0.55,
        }
    }

    #[test]
    fn gram_is_spd_and_matches_coordinates() {
        for system in [SystemId::System1, SystemId::System2] {
            let g = gen(system, 12, &mixed_params());
            let gram = g.gram();
            assert!((gram - gram.transpose()).amax() <= 1e-12 * gram.amax());
            let c = g.chol();
            assert!((c.tr_mul(c) - gram).amax() <= 1e-10 * gram.amax());
            for i in 0..c.nrows() {
                for j in 0..i {
                    assert_eq!(c[(i, j)], 0.0);
                }
            }
            for seed in 0..5 {
                let u = g.random_state(seed);
                let dense = g.norm_sq(&u).unwrap();
                assert!(dense > 0.0);
                assert_relative_eq!(dense, weighted_coordinate_norm(&g, &u), max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn gram_examples() {
        let p = ModelParams::unit(1.0, 1.0, 1.0);
        let g = gen(SystemId::System2, 2, &p);
        let x = DVector::from_vec(vec![0.6, -0.8]);
        let u = StateVector::single_block(2, Block::PhiT, &x).unwrap();
        assert_relative_eq!(g.norm_sq(&u).unwrap(), 1.0, epsilon = 1e-14);

        // Only the shear term sees phi = e1: |D0 e1|² = 0.25 with h = 1.
        let grid = Grid::new(2, 3.0).unwrap();
        let g = Generator::assemble(&p, &grid, SystemId::System2).unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let u = StateVector::single_block(2, Block::Phi, &e1).unwrap();
        assert_relative_eq!(g.norm_sq(&u).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn system2_pure_phi_velocity_dissipation() {
        let p = ModelParams::unit(1.0, 1.0, 1.0);
        let grid = Grid::new(2, 3.0).unwrap();
        let g = Generator::assemble(&p, &grid, SystemId::System2).unwrap();
        let u = StateVector::single_block(2, Block::PhiT, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_relative_eq!(g.dissipation_rate(&u).unwrap(), -2.0, epsilon = 1e-13);
        assert_relative_eq!(g.dissipation_form(&u).unwrap(), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn system2_pure_theta_velocity_frictional() {
        let p = ModelParams::unit(1.0, 1.0, 0.0);
        let grid = Grid::new(2, 3.0).unwrap();
        let g = Generator::assemble(&p, &grid, SystemId::System2).unwrap();
        let u = StateVector::single_block(2, Block::ThetaT, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_relative_eq!(g.dissipation_form(&u).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(g.dissipation_form(&StateVector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn block_sparsity_for_pure_phi() {
        let p = mixed_params();
        let g = gen(SystemId::System1, 8, &p);
        let phi = DVector::from_fn(8, |i, _| (i as f64 * 0.7).sin());
        let u = StateVector::single_block(8, Block::Phi, &phi).unwrap();
        let bu = g.apply(&u).unwrap();
        let d0 = g.grid().centered_difference();
        let phi_t = &d0 * &d0 * &phi * (p.kappa / p.rho1);
        let psi_t = &d0 * &phi * (-p.kappa / p.rho2);
        for b in Block::ALL {
            let v = bu.block(b);
            let expected = match b {
                Block::PhiT => Some(&phi_t),
                Block::PsiT => Some(&psi_t),
                _ => None,
            };
            if let Some(e) = expected {
                for i in 0..8 {
                    assert_relative_eq!(v[i].re, e[i], epsilon = 1e-12);
                    assert_eq!(v[i].im, 0.0);
                }
            } else {
                assert!(v.iter().all(|z| z.norm() == 0.0), "block {b:?}");
            }
        }
    }

    #[test]
    fn exact_dissipativity_both_systems() {
        for p in [ModelParams::unit(0.5, 0.5, 0.5), mixed_params()] {
            for system in [SystemId::System1, SystemId::System2] {
                let g = gen(system, 20, &p);
                for seed in 0..100 {
                    let u = g.random_state(seed);
                    let rate = g.dissipation_rate(&u).unwrap();
                    let form = g.dissipation_form(&u).unwrap();
                    assert!(rate <= 1e-10 * g.norm_sq(&u).unwrap());
                    assert!((rate + form).abs() <= 1e-9 * (1.0 + rate.abs()));
                }
            }
        }
    }

    #[test]
    fn conservative_limit_is_skew_adjoint() {
        for system in [SystemId::System1, SystemId::System2] {
            let p = mixed_params().conservative(system);
            let g = gen(system, 16, &p);
            for seed in 0..20 {
                let u = g.random_state(seed);
                assert!(g.dissipation_rate(&u).unwrap().abs() <= 1e-12 * g.norm_sq(&u).unwrap());
            }
        }
    }

    #[test]
    fn symmetric_part_is_the_damping() {
        for system in [SystemId::System1, SystemId::System2] {
            let p = mixed_params();
            let g = gen(system, 10, &p);
            let n = 10;
            let gb = g.gram() * g.matrix();
            let sym = (&gb + gb.transpose()) * 0.5;
            let grid = g.grid();
            let w = g.weights();
            let mut damping = DMatrix::zeros(6 * n, 6 * n);
            let blocks = [
                (Block::PhiT, w.phi_vel * p.mu1 / p.rho1, p.tau),
                (Block::PsiT, w.psi_vel * p.mu2 / p.rho2, p.sigma),
                (Block::ThetaT, w.theta_vel * p.thermal_damping(system) / p.rho3, p.xi),
            ];
            for (blk, c, nu) in blocks {
                let k = blk.index() * n;
                damping
                    .view_mut((k, k), (n, n))
                    .copy_from(&(grid.frac_power_matrix(nu) * c));
            }
            assert!((sym + &damping).amax() <= 1e-10 * damping.amax());
        }
    }

    #[test]
    fn energy_forms() {
        let g = gen(SystemId::System1, 8, &mixed_params());
        assert_eq!(g.energy(&StateVector::zeros(8)).unwrap(), 0.0);
        let u = g.random_state(3);
        let e = g.energy(&u).unwrap();
        assert_relative_eq!(g.energy(&u.scaled(2.0)).unwrap(), 4.0 * e, max_relative = 1e-13);
        // Dense oracle on the stacked real/imaginary parts.
        let re = u.as_vector().map(|z| z.re);
        let im = u.as_vector().map(|z| z.im);
        let dense = 0.5 * (re.dot(&(g.gram() * &re)) + im.dot(&(g.gram() * &im)));
        assert_relative_eq!(e, dense, max_relative = 1e-12);
        assert_relative_eq!(e, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn random_state_contract() {
        let g = gen(SystemId::System2, 8, &mixed_params());
        let a = g.random_state(11);
        assert_eq!(a, g.random_state(11));
        assert_relative_eq!(g.norm_sq(&a).unwrap(), 1.0, epsilon = 1e-12);
        let b = g.random_state(12);
        assert!(g.inner(&a, &b).unwrap().norm() < 1.0);
    }

    #[test]
    fn energy_similar_is_a_similarity() {
        let g = gen(SystemId::System1, 6, &mixed_params());
        let lhs = g.energy_similar() * g.chol();
        let rhs = g.chol() * g.matrix();
        assert!((lhs - &rhs).amax() <= 1e-10 * rhs.amax());
    }

    #[test]
    fn dimension_checks() {
        let g = gen(SystemId::System1, 4, &mixed_params());
        let wrong = StateVector::<f64>::zeros(6);
        assert!(matches!(g.apply(&wrong), Err(Error::DimensionMismatch { .. })));
        assert!(g.dissipation_form(&wrong).is_err());
        assert!(g.energy(&wrong).is_err());
    }

    #[test]
    fn single_precision_assembly_is_dissipative() {
        let p = ModelParams::<f32>::unit(0.5, 0.5, 0.5);
        let grid = Grid::<f32>::new(8, std::f32::consts::PI).unwrap();
        let g = Generator::assemble(&p, &grid, SystemId::System1).unwrap();
        let u = g.random_state(1);
        let rate = g.dissipation_rate(&u).unwrap();
        let form = g.dissipation_form(&u).unwrap();
        assert!((rate + form).abs() <= 1e-3 * (1.0 + rate.abs()));
    }
}
