//! Stacked state `(phi, Phi, psi, Psi, theta, Theta)` of length `6n`.

use nalgebra::{DVector, DVectorView, DVectorViewMut};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One of the six fields of the state, in stacking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// Transverse displacement `phi`.
    Phi,
    /// Its velocity `Phi = phi_t`.
    PhiT,
    /// Rotation angle `psi`.
    Psi,
    /// `Psi = psi_t`.
    PsiT,
    /// Thermal variable `theta`.
    Theta,
    /// `Theta = theta_t`.
    ThetaT,
}

impl Block {
    pub const ALL: [Block; 6] = [
        Block::Phi,
        Block::PhiT,
        Block::Psi,
        Block::PsiT,
        Block::Theta,
        Block::ThetaT,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    n: usize,
    data: DVector<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: DVector::zeros(6 * n),
        }
    }

    pub fn from_vector(n: usize, data: DVector<Complex<T>>) -> Result<Self> {
        if data.len() != 6 * n {
            return Err(Error::DimensionMismatch {
                expected: 6 * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Embeds a real vector into one block, all other blocks zero.
    pub fn single_block(n: usize, block: Block, values: &DVector<T>) -> Result<Self> {
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
        let mut s = Self::zeros(n);
        for (dst, &v) in s.block_mut(block).iter_mut().zip(values.iter()) {
            *dst = Complex::new(v, T::zero());
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block(&self, block: Block) -> DVectorView<'_, Complex<T>> {
        self.data.rows(block.index() * self.n, self.n)
    }

    pub fn block_mut(&mut self, block: Block) -> DVectorViewMut<'_, Complex<T>> {
        self.data.rows_mut(block.index() * self.n, self.n)
    }

    pub fn as_vector(&self) -> &DVector<Complex<T>> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<Complex<T>> {
        self.data
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            n: self.n,
            data: self.data.map(|z| z * factor),
        }
    }

    /// Euclidean (unweighted) norm of the stacked vector.
    pub fn euclidean_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }
}
