//! Truncated two-level ⊗ Fock operators.
//!
//! Basis states of the product space are indexed `qd_index * (N + 1) + n`
//! with `qd_index ∈ {0 = g, 1 = e}` as the slow index and the photon number
//! `n ∈ 0..=N` as the fast index.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Dense square complex matrix acting on a (possibly composite) Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<C64>);

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Structural(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Structural("rows must form a square matrix".into()));
        }
        Ok(Self(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0))))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn tensor(&self, right: &Self) -> Self {
        Self(self.0.kronecker(&right.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

/// Cavity annihilation operator truncated at `fock_cutoff` photons.
pub fn annihilation(fock_cutoff: usize) -> Result<OperatorMatrix> {
    if fock_cutoff == 0 {
        return Err(Error::domain("Fock cutoff must be >= 1 to represent a photon"));
    }
    let dim = fock_cutoff + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(OperatorMatrix(m))
}

/// `|g⟩⟨e|` in the basis order (g, e).
pub fn qd_lowering() -> OperatorMatrix {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    OperatorMatrix(m)
}

/// Kronecker product; the left factor carries the slow index.
pub fn tensor(left: &OperatorMatrix, right: &OperatorMatrix) -> OperatorMatrix {
    left.tensor(right)
}

/// The dot and cavity operators lifted to the product space.
#[derive(Debug, Clone)]
pub struct QdCavitySpace {
    pub fock_cutoff: usize,
    /// `I₂ ⊗ a`
    pub a: OperatorMatrix,
    /// `σ ⊗ I_{N+1}`
    pub sigma: OperatorMatrix,
}

impl QdCavitySpace {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        let a = annihilation(fock_cutoff)?;
        let id_f = OperatorMatrix::identity(fock_cutoff + 1);
        Ok(Self {
            fock_cutoff,
            a: tensor(&OperatorMatrix::identity(2), &a),
            sigma: tensor(&qd_lowering(), &id_f),
        })
    }

    /// Infers the cutoff from a product-space dimension `2(N+1)`.
    pub fn for_dim(dim: usize) -> Result<Self> {
        if dim < 4 || dim % 2 != 0 {
            return Err(Error::Structural(format!(
                "dimension {dim} is not 2(N+1) for any N >= 1"
            )));
        }
        Self::new(dim / 2 - 1)
    }

    pub fn dim(&self) -> usize {
        2 * (self.fock_cutoff + 1)
    }

    pub fn basis_index(&self, qd_excited: bool, photons: usize) -> usize {
        (qd_excited as usize) * (self.fock_cutoff + 1) + photons
    }

    pub fn photon_number(&self) -> OperatorMatrix {
        &self.a.adjoint() * &self.a
    }

    pub fn qd_population(&self) -> OperatorMatrix {
        &self.sigma.adjoint() * &self.sigma
    }
}

/// Trace-one positive Hermitian matrix on the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_SLACK: f64 = 1e-8;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Structural("density matrix must be square".into()));
        }
        let herm = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let rho = Self(m);
        let min_eig = rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -Self::POSITIVITY_SLACK {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(rho)
    }

    pub(crate) fn new_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    /// `|ψ⟩⟨ψ|` for a normalised basis state.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self(m)
    }

    /// `|g, 0⟩⟨g, 0|`.
    pub fn ground(fock_cutoff: usize) -> Self {
        Self::basis_state(2 * (fock_cutoff + 1), 0)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn expect(&self, op: &OperatorMatrix) -> C64 {
        (&self.0 * op.matrix()).trace()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }
}
