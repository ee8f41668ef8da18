//! Elements of SU(2)^⊗N, Pauli strings, the chain-graph stabilizer generators
//! and the circuit preparing their common fixed point.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::statevector::{SingleQubitGate, StateVector};

/// One unitary per qubit; the represented operator is their tensor product.
///
/// Stored as matrices rather than Euler angles since products of XZX
/// rotations are not XZX rotations with the same angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    factors: Vec<SingleQubitGate>,
}

impl GroupElement {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            factors: vec![SingleQubitGate::IDENTITY; num_qubits],
        }
    }

    pub fn from_factors(factors: Vec<SingleQubitGate>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("group element needs at least one factor".into()));
        }
        Ok(Self { factors })
    }

    /// Per-qubit `R_x(θ₁) R_z(θ₂) R_x(θ₃)` from one angle triple per qubit.
    pub fn from_euler(triples: &[[f64; 3]]) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::InvalidParameter("need at least one Euler triple".into()));
        }
        if triples.iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("Euler angles"));
        }
        Ok(Self {
            factors: triples
                .iter()
                .map(|&[a, b, c]| SingleQubitGate::euler_xzx(a, b, c))
                .collect(),
        })
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        Self {
            factors: p.labels.iter().map(|l| l.gate()).collect(),
        }
    }

    /// N independent Haar-random SU(2) factors.
    pub fn haar_random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        Self {
            factors: (0..num_qubits).map(|_| SingleQubitGate::haar_random(rng)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[SingleQubitGate] {
        &self.factors
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if self.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: n,
            });
        }
        Ok(())
    }

    /// Group product `self · other`, i.e. `D_self D_other`.
    pub fn compose(&self, other: &GroupElement) -> Result<Self> {
        self.check_size(other.num_qubits())?;
        Ok(Self {
            factors: self
                .factors
                .iter()
                .zip(&other.factors)
                .map(|(a, b)| *a * *b)
                .collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            factors: self.factors.iter().map(SingleQubitGate::adjoint).collect(),
        }
    }

    /// `D_g |state⟩` by per-qubit gate application.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_size(state.num_qubits())?;
        let mut out = state.clone();
        self.apply_in_place(&mut out);
        Ok(out)
    }

    pub(crate) fn apply_in_place(&self, state: &mut StateVector) {
        for (q, g) in self.factors.iter().enumerate() {
            state.apply_single_qubit_in_place(g, q);
        }
    }

    /// Full `2^N x 2^N` Kronecker product.
    pub fn to_dense(&self) -> DenseOperator {
        DenseOperator::kron_all(&self.factors)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        self.factors
            .iter()
            .map(SingleQubitGate::unitarity_deviation)
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GroupElement) -> Result<f64> {
        self.check_size(other.num_qubits())?;
        Ok(self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn gate(self) -> SingleQubitGate {
        match self {
            Pauli::I => SingleQubitGate::IDENTITY,
            Pauli::X => SingleQubitGate::PAULI_X,
            Pauli::Y => SingleQubitGate::PAULI_Y,
            Pauli::Z => SingleQubitGate::PAULI_Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("empty Pauli string".into()));
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidParameter(format!("invalid Pauli label {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.labels.iter().try_for_each(|l| write!(f, "{}", l.symbol()))
    }
}

/// Edges of the chain graph on `n` vertices: (0,1), (1,2), …, (n-2,n-1).
fn chain_edges(num_qubits: usize) -> Vec<(usize, usize)> {
    (1..num_qubits).map(|j| (j - 1, j)).collect()
}

/// Stabilizer generators `X_j ⊗ Z_{neighbours}` of a graph state.
fn graph_generators(num_qubits: usize, edges: &[(usize, usize)]) -> Vec<PauliString> {
    (0..num_qubits)
        .map(|j| {
            let mut labels = vec![Pauli::I; num_qubits];
            labels[j] = Pauli::X;
            for &(a, b) in edges {
                if a == j {
                    labels[b] = Pauli::Z;
                } else if b == j {
                    labels[a] = Pauli::Z;
                }
            }
            PauliString { labels }
        })
        .collect()
}

/// The `N` generators of the chain-graph stabilizer group, one per vertex.
pub fn chain_generators(num_qubits: usize) -> Result<Vec<PauliString>> {
    if num_qubits < 2 {
        return Err(Error::InvalidParameter(format!(
            "chain graph needs at least 2 qubits, got {num_qubits}"
        )));
    }
    Ok(graph_generators(num_qubits, &chain_edges(num_qubits)))
}

/// Circuit `∏ CZ_(j,j+1) · ⊗_j R_y(π/2 − θ_j)` acting on `|0…0⟩`.
///
/// With all offsets zero this prepares the chain graph state; nonzero
/// offsets give the perturbed preparation used for fiducial-state errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FiducialPreparation {
    offsets: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

impl FiducialPreparation {
    pub fn ideal(num_qubits: usize) -> Result<Self> {
        Self::with_offsets(vec![0.0; num_qubits])
    }

    pub fn with_offsets(offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidParameter("fiducial preparation needs at least one qubit".into()));
        }
        if offsets.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("fiducial offsets"));
        }
        let edges = chain_edges(offsets.len());
        Ok(Self { offsets, edges })
    }

    pub fn num_qubits(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_ideal(&self) -> bool {
        self.offsets.iter().all(|&t| t == 0.0)
    }

    fn rotations(&self) -> impl Iterator<Item = SingleQubitGate> + '_ {
        self.offsets.iter().map(|t| SingleQubitGate::ry(FRAC_PI_2 - t))
    }

    /// Applies the preparation circuit to an arbitrary input state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: state.num_qubits(),
            });
        }
        let mut out = state.clone();
        for (q, g) in self.rotations().enumerate() {
            out.apply_single_qubit_in_place(&g, q);
        }
        for &(a, b) in &self.edges {
            out.apply_cz_in_place(a, b);
        }
        Ok(out)
    }

    /// Applies the adjoint circuit: CZ layer, then `R_y(π/2 − θ_j)†`.
    pub fn apply_adjoint(&self, state: &StateVector) -> Result<StateVector> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: state.num_qubits(),
            });
        }
        let mut out = state.clone();
        for &(a, b) in self.edges.iter().rev() {
            out.apply_cz_in_place(a, b);
        }
        for (q, g) in self.rotations().enumerate() {
            out.apply_single_qubit_in_place(&g.adjoint(), q);
        }
        Ok(out)
    }

    /// The prepared state on `|0…0⟩`.
    pub fn prepare(&self) -> StateVector {
        let zero = StateVector::zero(self.num_qubits()).expect("num_qubits validated at construction");
        self.apply(&zero).expect("sizes agree by construction")
    }

    /// Dense operator for the whole circuit.
    pub fn to_dense(&self) -> DenseOperator {
        let rotations: Vec<SingleQubitGate> = self.rotations().collect();
        let mut op = DenseOperator::kron_all(&rotations);
        for &(a, b) in &self.edges {
            op = op.cz_compose(a, b).expect("chain edges are valid");
        }
        op
    }
}
