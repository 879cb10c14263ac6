//! Dense complex linear algebra: Hermitian eigendecomposition, unitary
//! exponentials, inner products and phase bookkeeping.
//!
//! All dimensions in this crate are small (charge blocks hold at most `2N`
//! states), so everything is stored densely.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Absolute Hermiticity tolerance, applied relative to `max(1, max |H_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }

    pub fn into_pairs(self) -> Vec<(f64, ComplexVector)> {
        (0..self.dim())
            .map(|k| (self.values[k], self.vectors.column(k).into_owned()))
            .collect()
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let w = f(e);
            for x in scaled.column_mut(k).iter_mut() {
                *x *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{-iHs}` from the stored decomposition.
    pub fn exp(&self, s: f64) -> ComplexMatrix {
        self.apply_fn(|e| C64::from_polar(1.0, -e * s))
    }
}

/// Largest entrywise deviation `|H_ij - conj(H_ji)|`.
pub fn max_asymmetry(h: &ComplexMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs(h: &ComplexMatrix) -> f64 {
    h.iter().fold(0.0f64, |m, x| m.max(x.norm()))
}

pub fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
    }
    if h.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let asym = max_asymmetry(h);
    if asym > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    Ok(())
}

/// Eigendecomposition straight from the solver, eigenvalues ascending.
fn raw_eig(h: &ComplexMatrix) -> Result<Eigen> {
    check_hermitian(h)?;
    let n = h.nrows();
    if n == 1 {
        return Ok(Eigen {
            values: vec![h[(0, 0)].re],
            vectors: ComplexMatrix::identity(1, 1),
        });
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<Eigen> {
    let Eigen { values, vectors: v } = raw_eig(h)?;
    let n = values.len();
    // One Newton–Schulz step, V(3I − V†V)/2, squares the orthonormality
    // error so that long products of exponentials stay unitary.
    let gram = v.adjoint() * &v;
    let vectors = &v * (ComplexMatrix::identity(n, n) * C64::new(1.5, 0.0) - gram * C64::new(0.5, 0.0));
    Ok(Eigen { values, vectors })
}

/// `e^{-iHs}`, via [`hermitian_eig`].
pub fn unitary_exp(h: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.exp(s))
}

/// `unitary_exp(h, s) * v` using matrix-vector products only. The
/// Newton–Schulz correction is applied to the vector rather than to the
/// eigenvector matrix.
pub fn apply_unitary_exp(h: &ComplexMatrix, s: f64, v: &ComplexVector) -> Result<ComplexVector> {
    if h.nrows() != v.len() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: v.len() });
    }
    let eig = raw_eig(h)?;
    let q = &eig.vectors;
    let (a, b) = (C64::new(1.5, 0.0), C64::new(0.5, 0.0));
    // x = Ṽ†v with Ṽ† = (3I − V†V)V†/2.
    let y = q.ad_mul(v);
    let mut x = &y * a - q.ad_mul(&(q * &y)) * b;
    for (xk, &e) in x.iter_mut().zip(&eig.values) {
        *xk *= C64::from_polar(1.0, -e * s);
    }
    // Ṽx with Ṽ = V(3I − V†V)/2.
    let vx = q * &x;
    Ok(&vx * a - q * q.ad_mul(&vx) * b)
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn overlap(u: &ComplexVector, v: &ComplexVector) -> Result<C64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    Ok(u.dotc(v))
}

/// `|⟨u|v⟩|²`.
pub fn fidelity(u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    Ok(overlap(u, v)?.norm_sqr())
}

/// `⟨v|A|v⟩`.
pub fn expectation(a: &ComplexMatrix, v: &ComplexVector) -> Result<C64> {
    if a.ncols() != v.len() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: v.len() });
    }
    Ok(v.dotc(&(a * v)))
}

/// Reduce an angle to `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Largest entry magnitude of a matrix; zero for an empty matrix.
pub fn max_entry(m: &ComplexMatrix) -> f64 {
    max_abs(m)
}
