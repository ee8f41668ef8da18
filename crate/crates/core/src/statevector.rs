//! Dense statevector simulation.
//!
//! Qubit `q` of an `N`-qubit register is the `q`-th tensor factor counted from
//! the left, i.e. it corresponds to bit `N - 1 - q` of the basis index. This
//! keeps `kron(f_0, kron(f_1, ...))` and per-qubit application consistent.

use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;
const GATE_UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2x2 unitary acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[Complex64; 2]; 2]", into = "[[Complex64; 2]; 2]")]
pub struct SingleQubitGate([[Complex64; 2]; 2]);

impl SingleQubitGate {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);
    pub const PAULI_X: Self = Self([[ZERO, ONE], [ONE, ZERO]]);
    pub const PAULI_Y: Self = Self([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const PAULI_Z: Self = Self([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    /// Builds a gate from its entries, rejecting non-unitary input.
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        if entries.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("gate entries"));
        }
        let gate = Self(entries);
        let dev = gate.unitarity_deviation();
        if dev > GATE_UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(gate)
    }

    /// `exp(-i θ X / 2)`
    pub fn rx(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        Self([[c, mis], [mis, c]])
    }

    /// `exp(-i θ Y / 2)`
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    /// `exp(-i θ Z / 2)`
    pub fn rz(theta: f64) -> Self {
        let half = theta / 2.0;
        Self([
            [Complex64::from_polar(1.0, -half), ZERO],
            [ZERO, Complex64::from_polar(1.0, half)],
        ])
    }

    /// `R_x(θ₁) R_z(θ₂) R_x(θ₃)`.
    pub fn euler_xzx(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self::rx(theta1) * Self::rz(theta2) * Self::rx(theta3)
    }

    /// Samples from the Haar measure on SU(2).
    ///
    /// A uniformly random point `(a, b)` on the unit 3-sphere in `C²` maps to
    /// `[[a, -b*], [b, a*]]`; the sphere's uniform measure is the Haar measure.
    pub fn haar_random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let a = Complex64::new(v[0] / norm, v[1] / norm);
            let b = Complex64::new(v[2] / norm, v[3] / norm);
            return Self([[a, -b.conj()], [b, a.conj()]]);
        }
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn determinant(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Largest entrywise deviation of `G† G` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint() * *self;
        let mut dev: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                dev = dev.max((p.0[r][c] - target).norm());
            }
        }
        dev
    }

    /// Largest entrywise distance to another gate.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for SingleQubitGate {
    type Output = SingleQubitGate;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self(std::array::from_fn(|r| {
            std::array::from_fn(|c| a[r][0] * b[0][c] + a[r][1] * b[1][c])
        }))
    }
}

impl TryFrom<[[Complex64; 2]; 2]> for SingleQubitGate {
    type Error = Error;

    fn try_from(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<SingleQubitGate> for [[Complex64; 2]; 2] {
    fn from(gate: SingleQubitGate) -> Self {
        gate.0
    }
}

/// A normalized pure state on `N` qubits.
///
/// Values are immutable; every gate returns a fresh state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "num_qubits must be positive, got {num_qubits}"
            )));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps an amplitude vector, checking length and normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidDimension(dim));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("amplitudes"));
        }
        let norm = norm_of(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Haar-random state on the full `2^N`-dimensional space: a normalized
    /// complex Gaussian vector.
    pub fn haar_random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        let dim = Self::zero(num_qubits)?.dim();
        loop {
            let mut amplitudes: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let norm = norm_of(&amplitudes);
            if norm < 1e-12 {
                continue;
            }
            amplitudes.iter_mut().for_each(|z| *z /= norm);
            return Ok(Self {
                num_qubits,
                amplitudes,
            });
        }
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amplitudes)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_single_qubit(&self, gate: &SingleQubitGate, qubit: usize) -> Result<Self> {
        self.check_qubit(qubit)?;
        let mut out = self.clone();
        out.apply_single_qubit_in_place(gate, qubit);
        Ok(out)
    }

    pub(crate) fn apply_single_qubit_in_place(&mut self, gate: &SingleQubitGate, qubit: usize) {
        let stride = 1usize << (self.num_qubits - 1 - qubit);
        let [[g00, g01], [g10, g11]] = gate.0;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = g00 * x0 + g01 * x1;
                *a1 = g10 * x0 + g11 * x1;
            }
        }
    }

    /// Controlled-Z between two distinct qubits.
    pub fn apply_cz(&self, q1: usize, q2: usize) -> Result<Self> {
        if q1 == q2 || q1 >= self.num_qubits || q2 >= self.num_qubits {
            return Err(Error::InvalidQubitPair {
                q1,
                q2,
                num_qubits: self.num_qubits,
            });
        }
        let mut out = self.clone();
        out.apply_cz_in_place(q1, q2);
        Ok(out)
    }

    pub(crate) fn apply_cz_in_place(&mut self, q1: usize, q2: usize) {
        let mask = (1usize << (self.num_qubits - 1 - q1)) | (1usize << (self.num_qubits - 1 - q2));
        for (idx, amp) in self.amplitudes.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// Largest per-amplitude distance; only meaningful when both states come
    /// from the same gate decomposition (no global-phase freedom).
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn norm_of(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}
