//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Every spectral quantity in the crate goes through [`hermitian_eigen`], a thin
//! wrapper around nalgebra's Hermitian solver that returns ascending eigenvalues.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(p: Pauli) -> CMatrix {
    let (a, b, c, d) = match p {
        Pauli::I => (ONE, ZERO, ZERO, ONE),
        Pauli::X => (ZERO, ONE, ONE, ZERO),
        Pauli::Y => (ZERO, -I, I, ZERO),
        Pauli::Z => (ONE, ZERO, ZERO, -ONE),
    };
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// Kronecker product of the factors, leftmost factor most significant.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn kron_paulis(ps: &[Pauli]) -> CMatrix {
    ps.iter()
        .fold(CMatrix::identity(1, 1), |acc, &p| acc.kronecker(&pauli(p)))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = CMatrix::zeros(n, m);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Columns `range` of the eigenvector matrix.
    pub fn columns(&self, start: usize, len: usize) -> CMatrix {
        self.vectors.columns(start, len).into_owned()
    }
}

/// Hermitian eigendecomposition. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Largest singular value, from the top eigenvalue of `M^dagger M`.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = m.adjoint() * m;
    let eig = hermitian_eigen(&gram);
    let top = eig.values.last().copied().unwrap_or(0.0);
    Ok(libm::sqrt(top.max(0.0)))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    hermitian_eigen(&gram)
        .values
        .iter()
        .map(|v| libm::sqrt(v.max(0.0)))
        .sum()
}

/// `f(H)` for Hermitian `H` through its eigendecomposition.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let eig = hermitian_eigen(h);
    apply_spectral(&eig, f)
}

pub fn apply_spectral(eig: &HermitianEigen, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let mut scaled = eig.vectors.clone();
    for (k, &v) in eig.values.iter().enumerate() {
        let fk = f(v);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= fk;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_function(h, |e| cis(-e * t))
}

pub fn cis(phase: f64) -> Complex64 {
    Complex64::new(libm::cos(phase), libm::sin(phase))
}

/// Orthonormal columns spanning the same space as `x` via symmetric (Loewdin)
/// orthonormalization, `x (x^dagger x)^{-1/2}`. Also returns the smallest
/// singular value of `x`.
pub fn loewdin(x: &CMatrix) -> (CMatrix, f64) {
    let gram = x.adjoint() * x;
    let eig = hermitian_eigen(&gram);
    let smallest = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let inv_sqrt = apply_spectral(&eig, |v| Complex64::new(1.0 / libm::sqrt(v.max(1e-300)), 0.0));
    (x * inv_sqrt, libm::sqrt(smallest))
}

/// Isometry onto the eigenspace of a Hermitian involution `op` (eigenvalues
/// +-1) restricted to the column space of `basis`.
pub fn involution_eigenspace(basis: &CMatrix, op: &CMatrix, sign: i8) -> CMatrix {
    let reduced = basis.adjoint() * op * basis;
    let eig = hermitian_eigen(&reduced);
    let target = f64::from(sign);
    let keep: Vec<usize> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| (*v - target).abs() < 0.5)
        .map(|(k, _)| k)
        .collect();
    let mut cols = CMatrix::zeros(basis.nrows(), keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        cols.set_column(dst, &(basis * eig.vectors.column(k)));
    }
    cols
}
