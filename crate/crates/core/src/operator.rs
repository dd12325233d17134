//! Dense density-matrix and superoperator algebra.
//!
//! Density matrices are vectorized by stacking columns, so that
//! `vec(A X B) = (B^T kron A) vec(X)`. Every superoperator in the crate acts
//! on vectors in this convention.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for the Hermiticity of density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for the unit trace and the positivity of normalized states.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on the Hermiticity of Hamiltonians passed to [`liouvillian`].
pub const HAMILTONIAN_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest absolute entry of `m - m^dagger`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `|i><j|` on a `dim`-dimensional space.
pub fn basis_op(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Whether a [`DensityMatrix`] is a proper state or a sub-normalized
/// conditional state produced by no-jump evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Normalized,
    Conditional,
}

/// A validated density matrix on a small Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
    kind: StateKind,
}

impl DensityMatrix {
    /// A normalized state: Hermitian, unit trace and positive semidefinite.
    pub fn new(elements: CMatrix) -> Result<Self> {
        ensure_square(&elements)?;
        let dev = hermitian_deviation(&elements);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(&elements).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_eigenvalue(&elements);
        if min_eig < -TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            elements,
            kind: StateKind::Normalized,
        })
    }

    /// A conditional state with trace in `[0, 1]`.
    pub fn conditional(elements: CMatrix) -> Result<Self> {
        ensure_square(&elements)?;
        let dev = hermitian_deviation(&elements);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(&elements).re;
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::InvalidState(format!(
                "conditional trace {tr} outside [0, 1]"
            )));
        }
        Ok(Self {
            elements,
            kind: StateKind::Conditional,
        })
    }

    /// The projector `|level><level|`.
    pub fn basis_state(dim: usize, level: usize) -> Self {
        Self {
            elements: basis_op(dim, level, level),
            kind: StateKind::Normalized,
        }
    }

    /// Rebuild a state from its column-stacked vector.
    pub fn from_vector(v: &CVector, dim: usize, kind: StateKind) -> Result<Self> {
        let m = devectorize(v, dim)?;
        match kind {
            StateKind::Normalized => Self::new(m),
            StateKind::Conditional => Self::conditional(m),
        }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix {
        self.elements
    }

    pub fn trace(&self) -> f64 {
        trace(&self.elements).re
    }

    pub fn population(&self, level: usize) -> f64 {
        self.elements[(level, level)].re
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.elements * &self.elements)).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.elements)
    }

    pub fn vectorize(&self) -> CVector {
        vectorize(&self.elements)
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    // Symmetrize so that rounding in the upper triangle is not ignored.
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    // nalgebra stores matrices column-major.
    CVector::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &CVector, dim: usize) -> Result<CMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Trace of a column-stacked matrix.
pub fn vec_trace(v: &CVector, dim: usize) -> Complex64 {
    (0..dim).map(|i| v[i * dim + i]).sum()
}

/// A linear map on column-stacked `dim x dim` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: CMatrix,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = ensure_square(&matrix)?;
        if n != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: n,
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// `rho -> left * rho * right`.
    pub fn sandwich(left: &CMatrix, right: &CMatrix) -> Result<Self> {
        let dim = ensure_square(left)?;
        let dr = ensure_square(right)?;
        if dim != dr {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: dr,
            });
        }
        Ok(Self {
            dim,
            matrix: right.transpose().kronecker(left),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
            });
        }
        devectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: &self.matrix * &first.matrix,
        }
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &SuperOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul<f64> for &SuperOperator {
    type Output = SuperOperator;
    fn mul(self, rhs: f64) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: &self.matrix * Complex64::new(rhs, 0.0),
        }
    }
}

/// `rho -> {a, rho}`.
pub fn anticommutator_map(a: &CMatrix) -> Result<SuperOperator> {
    let dim = ensure_square(a)?;
    let id = CMatrix::identity(dim, dim);
    Ok(SuperOperator {
        dim,
        matrix: id.kronecker(a) + a.transpose().kronecker(&id),
    })
}

/// `rho -> -i [h, rho]`.
pub fn commutator_map(h: &CMatrix) -> Result<SuperOperator> {
    let dim = ensure_square(h)?;
    let id = CMatrix::identity(dim, dim);
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(SuperOperator {
        dim,
        matrix: (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i,
    })
}

/// Emission superoperator `rho -> L rho L^dagger`.
pub fn jump_superop(l: &CMatrix) -> Result<SuperOperator> {
    ensure_square(l)?;
    SuperOperator::sandwich(l, &l.adjoint())
}

/// Lindblad dissipator `rho -> L rho L^dagger - {L^dagger L, rho}/2`.
pub fn dissipator(l: &CMatrix) -> Result<SuperOperator> {
    let jump = jump_superop(l)?;
    let decay = anticommutator_map(&(l.adjoint() * l))?;
    Ok(&jump - &(&decay * 0.5))
}

/// Lindblad generator `-i[H, .] + sum_k D[L_k]`.
pub fn liouvillian(h: &CMatrix, losses: &[CMatrix]) -> Result<SuperOperator> {
    let dim = ensure_square(h)?;
    let dev = hermitian_deviation(h);
    if dev > HAMILTONIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let mut generator = commutator_map(h)?;
    for l in losses {
        let d = ensure_square(l)?;
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
        generator = &generator + &dissipator(l)?;
    }
    Ok(generator)
}

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
