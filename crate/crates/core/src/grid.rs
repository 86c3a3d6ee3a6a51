//! Uniform interior grid on `(0, L)` with Dirichlet ends.
//!
//! The three-point Laplacian has the discrete sine vectors as an exact
//! orthonormal eigenbasis, so every power `A^nu` is available in closed form
//! and no iterative eigensolver is needed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Discretization of `A = -d²/dx²` on `n` interior points of `(0, L)`.
#[derive(Debug, Clone)]
pub struct Grid<T: Real> {
    n: usize,
    length: T,
    h: T,
    eigvals: DVector<T>,
    eigbasis: DMatrix<T>,
}

impl<T: Real> Grid<T> {
    /// Builds the grid and its sine eigen-decomposition.
    ///
    /// `n` must be even: the centered first-difference matrix is skew, and a
    /// skew matrix of odd order is singular.
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidGridSize(n));
        }
        let len_f = length.to_f64_lossy();
        if !(len_f > 0.0) || !len_f.is_finite() {
            return Err(Error::InvalidLength(len_f));
        }
        let np1 = T::lit((n + 1) as f64);
        let h = length / np1;
        let pi = T::pi();
        let four_over_h2 = T::lit(4.0) / (h * h);
        let eigvals = DVector::from_fn(n, |k, _| {
            let s = (T::lit((k + 1) as f64) * pi / (T::lit(2.0) * np1)).sin();
            four_over_h2 * s * s
        });
        let scale = (T::lit(2.0) / np1).sqrt();
        let eigbasis = DMatrix::from_fn(n, n, |j, k| {
            scale * (T::lit(((j + 1) * (k + 1)) as f64) * pi / np1).sin()
        });
        Ok(Self {
            n,
            length,
            h,
            eigvals,
            eigbasis,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Eigenvalues of the discrete Laplacian, ascending.
    pub fn eigvals(&self) -> &DVector<T> {
        &self.eigvals
    }

    /// Orthonormal sine eigenvectors, one per column.
    pub fn eigbasis(&self) -> &DMatrix<T> {
        &self.eigbasis
    }

    /// Tridiagonal stencil `(-1, 2, -1) / h²`.
    pub fn laplacian_matrix(&self) -> DMatrix<T> {
        let inv_h2 = T::one() / (self.h * self.h);
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                T::lit(2.0) * inv_h2
            } else if i.abs_diff(j) == 1 {
                -inv_h2
            } else {
                T::zero()
            }
        })
    }

    /// Dense `S diag(eigvals^nu) S^T`.
    pub fn frac_power_matrix(&self, nu: T) -> DMatrix<T> {
        let scaled = DMatrix::from_fn(self.n, self.n, |j, k| {
            self.eigbasis[(j, k)] * self.eigvals[k].powf(nu)
        });
        let mut out = &scaled * self.eigbasis.transpose();
        symmetrize(&mut out);
        out
    }

    /// `A^nu x` through the sine transform: project, scale, synthesize.
    pub fn frac_power_apply(&self, nu: T, x: &DVector<T>) -> Result<DVector<T>> {
        self.check_len(x.len())?;
        let mut coeffs = self.eigbasis.tr_mul(x);
        for (c, lam) in coeffs.iter_mut().zip(self.eigvals.iter()) {
            *c *= lam.powf(nu);
        }
        Ok(&self.eigbasis * coeffs)
    }

    /// Complex-vector variant of [`Grid::frac_power_apply`]; `A^nu` is real so
    /// real and imaginary parts are transformed independently.
    pub fn frac_power_apply_complex(
        &self,
        nu: T,
        x: &DVector<Complex<T>>,
    ) -> Result<DVector<Complex<T>>> {
        self.check_len(x.len())?;
        let re = self.frac_power_apply(nu, &x.map(|z| z.re))?;
        let im = self.frac_power_apply(nu, &x.map(|z| z.im))?;
        Ok(DVector::from_fn(self.n, |i, _| Complex::new(re[i], im[i])))
    }

    /// Skew centered first difference: `+1/(2h)` above, `-1/(2h)` below.
    pub fn centered_difference(&self) -> DMatrix<T> {
        let c = T::one() / (T::lit(2.0) * self.h);
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if j == i + 1 {
                c
            } else if i == j + 1 {
                -c
            } else {
                T::zero()
            }
        })
    }

    /// Shear strain `D0 phi + psi`, applied matrix-free.
    pub fn shear_map(&self, phi: &DVector<T>, psi: &DVector<T>) -> Result<DVector<T>> {
        self.check_len(phi.len())?;
        self.check_len(psi.len())?;
        let c = T::one() / (T::lit(2.0) * self.h);
        Ok(DVector::from_fn(self.n, |i, _| {
            let right = if i + 1 < self.n { phi[i + 1] } else { T::zero() };
            let left = if i > 0 { phi[i - 1] } else { T::zero() };
            c * (right - left) + psi[i]
        }))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = half * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
