//! Full `2^N x 2^N` operators.
//!
//! This is the oracle path: every gate-level result in the crate can be
//! reproduced by explicit matrix products here, and operator norms are taken
//! from a full singular value decomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::statevector::{SingleQubitGate, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        if rows == 0 || !rows.is_power_of_two() {
            return Err(Error::InvalidDimension(rows));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_matrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_gate(gate: &SingleQubitGate) -> Self {
        Self {
            matrix: DMatrix::from_fn(2, 2, |r, c| gate.entry(r, c)),
        }
    }

    /// `I ⊗ … ⊗ gate ⊗ … ⊗ I` with the gate on tensor factor `qubit`.
    pub fn single_qubit(gate: &SingleQubitGate, qubit: usize, num_qubits: usize) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(Error::QubitOutOfRange { qubit, num_qubits });
        }
        let factors: Vec<SingleQubitGate> = (0..num_qubits)
            .map(|q| if q == qubit { *gate } else { SingleQubitGate::IDENTITY })
            .collect();
        Ok(Self::kron_all(&factors))
    }

    /// Kronecker product of per-qubit factors, qubit 0 leftmost.
    pub fn kron_all(factors: &[SingleQubitGate]) -> Self {
        factors
            .iter()
            .map(Self::from_gate)
            .reduce(|acc, f| acc.kron(&f))
            .unwrap_or_else(|| Self {
                matrix: DMatrix::identity(1, 1),
            })
    }

    /// Diagonal controlled-Z operator.
    pub fn cz(q1: usize, q2: usize, num_qubits: usize) -> Result<Self> {
        if q1 == q2 || q1 >= num_qubits || q2 >= num_qubits {
            return Err(Error::InvalidQubitPair { q1, q2, num_qubits });
        }
        let mask = (1usize << (num_qubits - 1 - q1)) | (1usize << (num_qubits - 1 - q2));
        let dim = 1usize << num_qubits;
        let diag = DVector::from_fn(dim, |i, _| {
            if i & mask == mask {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        Ok(Self {
            matrix: DMatrix::from_diagonal(&diag),
        })
    }

    /// `CZ · self`, computed by negating the rows where both qubits are set.
    pub fn cz_compose(&self, q1: usize, q2: usize) -> Result<Self> {
        let n = self.dim().trailing_zeros() as usize;
        if q1 == q2 || q1 >= n || q2 >= n {
            return Err(Error::InvalidQubitPair { q1, q2, num_qubits: n });
        }
        let mask = (1usize << (n - 1 - q1)) | (1usize << (n - 1 - q2));
        let mut matrix = self.matrix.clone();
        for i in (0..self.dim()).filter(|i| i & mask == mask) {
            matrix.row_mut(i).neg_mut();
        }
        Ok(Self { matrix })
    }

    /// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
    /// `R`'s diagonal absorbed into `Q`.
    pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let ginibre = random_gaussian(dim, rng);
        Self::from_matrix(phase_fixed_q(ginibre))
    }

    /// A unitary near the identity: the phase-fixed `Q` factor of `I + scale·G`
    /// for complex Gaussian `G`.
    pub fn near_identity_unitary<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let m = DMatrix::identity(dim, dim) + random_gaussian(dim, rng) * Complex64::new(scale, 0.0);
        Self::from_matrix(phase_fixed_q(m))
    }

    /// Matrix with i.i.d. standard complex Gaussian entries.
    pub fn gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        Self::from_matrix(random_gaussian(dim, rng))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other,
            });
        }
        Ok(())
    }

    /// `self · other`
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            matrix: &self.matrix * factor,
        }
    }

    /// Exact matrix-vector product.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_dim(state.dim())?;
        let v = DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        Ok(StateVector::from_raw(state.num_qubits(), out.as_slice().to_vec()))
    }

    /// `⟨phi|self|psi⟩`
    pub fn matrix_element(&self, phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
        let applied = self.apply(psi)?;
        phi.inner_product(&applied)
    }

    /// Largest entrywise deviation of `A† A` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.matrix.adjoint() * &self.matrix;
        let dim = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((p[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        if self.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        let dim = self.dim();
        let m = faer::Mat::<Complex64>::from_fn(dim, dim, |i, j| self.matrix[(i, j)]);
        let singular = m
            .singular_values()
            .map_err(|_| Error::InvalidParameter("singular value decomposition did not converge".into()))?;
        Ok(singular.into_iter().fold(0.0, f64::max))
    }
}

fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

fn phase_fixed_q(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for (c, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        col *= phase;
    }
    q
}
