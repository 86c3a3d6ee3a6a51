//! Bridges between the nalgebra storage used for assembly and the faer
//! kernels used for the heavy double-precision decompositions.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub(crate) fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn to_faer_complex(m: &DMatrix<f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// `shift I - m` for a real `m`.
pub(crate) fn shifted(m: &DMatrix<f64>, shift: c64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let v = c64::new(-m[(i, j)], 0.0);
        if i == j {
            v + shift
        } else {
            v
        }
    })
}

pub(crate) fn column(v: &DVector<Complex<f64>>) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub(crate) fn from_column(m: &Mat<c64>) -> DVector<Complex<f64>> {
    DVector::from_fn(m.nrows(), |i, _| m[(i, 0)])
}

pub(crate) fn solve(lu: &PartialPivLu<c64>, rhs: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    from_column(&lu.solve(column(rhs)))
}

pub(crate) fn solve_adjoint(lu: &PartialPivLu<c64>, rhs: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    from_column(&lu.solve_adjoint(column(rhs)))
}

/// `m v` for a faer complex matrix and an nalgebra vector.
pub(crate) fn mul(m: &Mat<c64>, v: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    from_column(&(m * column(v)))
}
