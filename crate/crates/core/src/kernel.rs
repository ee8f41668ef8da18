//! Covariant kernel `κ(x, x') = |⟨0| V_L† D_x† D_x' V_R |0⟩|²` by exact
//! statevector simulation, with an independent dense-matrix path.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::{CosetDataset, DataPoint};
use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::group::{FiducialPreparation, GroupElement};
use crate::noise::{ElementPerturbation, FiducialOffsets};
use crate::statevector::StateVector;
use crate::stats;
use crate::theory::AlphaMatrix;

/// Coset label and subset index of a kernel row/column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointLabel {
    pub coset: usize,
    pub index: usize,
}

impl PointLabel {
    pub fn name(&self) -> String {
        format!("c{}s{}", self.coset, self.index)
    }
}

impl From<&DataPoint> for PointLabel {
    fn from(p: &DataPoint) -> Self {
        Self {
            coset: p.coset_label,
            index: p.subgroup_index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationPath {
    #[default]
    GateLevel,
    DenseOracle,
}

/// Noise draws fixed before any kernel entry is evaluated.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum NoiseAttachment {
    #[default]
    None,
    /// Perturbed preparations `W_1` (bra side) and `W_2` (ket side).
    Fiducial { left: FiducialOffsets, right: FiducialOffsets },
    /// One `D_e` per point, multiplying its unitary on the left.
    Element(Vec<ElementPerturbation>),
}

#[derive(Debug, Clone)]
pub struct KernelJob {
    num_qubits: usize,
    elements: Vec<GroupElement>,
    labels: Vec<PointLabel>,
    noise: NoiseAttachment,
    path: EvaluationPath,
}

impl KernelJob {
    pub fn new(points: &[DataPoint]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidParameter("kernel job needs at least one point".into()))?;
        let num_qubits = first.element.num_qubits();
        for p in points {
            if p.element.num_qubits() != num_qubits {
                return Err(Error::DimensionMismatch {
                    expected: num_qubits,
                    found: p.element.num_qubits(),
                });
            }
        }
        Ok(Self {
            num_qubits,
            elements: points.iter().map(|p| p.element.clone()).collect(),
            labels: points.iter().map(PointLabel::from).collect(),
            noise: NoiseAttachment::None,
            path: EvaluationPath::GateLevel,
        })
    }

    pub fn from_dataset(ds: &CosetDataset) -> Result<Self> {
        Self::new(ds.points())
    }

    pub fn with_noise(mut self, noise: NoiseAttachment) -> Result<Self> {
        let n = self.num_qubits;
        let mismatch = |found| Error::DimensionMismatch { expected: n, found };
        match &noise {
            NoiseAttachment::None => {}
            NoiseAttachment::Fiducial { left, right } => {
                for o in [left, right] {
                    if o.thetas.len() != n {
                        return Err(mismatch(o.thetas.len()));
                    }
                }
            }
            NoiseAttachment::Element(perts) => {
                if perts.len() != self.elements.len() {
                    return Err(Error::InvalidParameter(format!(
                        "{} perturbations for {} points",
                        perts.len(),
                        self.elements.len()
                    )));
                }
                if let Some(p) = perts.iter().find(|p| p.triples.len() != n) {
                    return Err(mismatch(p.triples.len()));
                }
            }
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn with_path(mut self, path: EvaluationPath) -> Self {
        self.path = path;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }

    pub fn noise(&self) -> &NoiseAttachment {
        &self.noise
    }

    pub fn path(&self) -> EvaluationPath {
        self.path
    }

    /// Sub-job on the given points, keeping their noise draws.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("empty selection".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidParameter(format!("point index {bad} out of range")));
        }
        let noise = match &self.noise {
            NoiseAttachment::Element(perts) => {
                NoiseAttachment::Element(indices.iter().map(|&i| perts[i].clone()).collect())
            }
            other => other.clone(),
        };
        Ok(Self {
            num_qubits: self.num_qubits,
            elements: indices.iter().map(|&i| self.elements[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            noise,
            path: self.path,
        })
    }

    fn preparations(&self) -> Result<(FiducialPreparation, FiducialPreparation)> {
        match &self.noise {
            NoiseAttachment::Fiducial { left, right } => Ok((left.preparation()?, right.preparation()?)),
            _ => {
                let v = FiducialPreparation::ideal(self.num_qubits)?;
                Ok((v.clone(), v))
            }
        }
    }

    /// `D_x`, or `D_e D_x` under selection noise.
    fn effective_element(&self, i: usize) -> Result<GroupElement> {
        match &self.noise {
            NoiseAttachment::Element(perts) => perts[i].element()?.compose(&self.elements[i]),
            _ => Ok(self.elements[i].clone()),
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::InvalidParameter(format!("point index {i} out of range")));
        }
        Ok(())
    }

    /// Single entry `κ(x_i, x_j)`, with `x_i` on the bra side.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        let (left, right) = self.preparations()?;
        let (di, dj) = (self.effective_element(i)?, self.effective_element(j)?);
        match self.path {
            EvaluationPath::GateLevel => {
                let bra = di.apply(&left.prepare())?;
                let ket = dj.apply(&right.prepare())?;
                Ok(bra.inner_product(&ket)?.norm_sqr())
            }
            EvaluationPath::DenseOracle => {
                let a = di.to_dense().compose(&left.to_dense())?.adjoint();
                let b = dj.to_dense().compose(&right.to_dense())?;
                Ok(a.compose(&b)?.entry(0, 0).norm_sqr())
            }
        }
    }

    /// Full matrix; the upper triangle is evaluated and mirrored.
    pub fn kernel_matrix(&self) -> Result<KernelMatrix> {
        let size = self.len();
        let mut entries = vec![0.0; size * size];
        match self.path {
            EvaluationPath::GateLevel => {
                let (left, right) = self.preparations()?;
                let (psi_l, psi_r) = (left.prepare(), right.prepare());
                let same_prep = left == right;
                let mut bras = Vec::with_capacity(size);
                let mut kets = Vec::with_capacity(size);
                for i in 0..size {
                    let d = self.effective_element(i)?;
                    let mut bra = psi_l.clone();
                    d.apply_in_place(&mut bra);
                    if !same_prep {
                        let mut ket = psi_r.clone();
                        d.apply_in_place(&mut ket);
                        kets.push(ket);
                    }
                    bras.push(bra);
                }
                let kets = if same_prep { &bras } else { &kets };
                fill_upper(&mut entries, size, |i, j| bras[i].inner_unchecked(&kets[j]));
            }
            EvaluationPath::DenseOracle => {
                let (left, right) = self.preparations()?;
                let (vl, vr) = (left.to_dense(), right.to_dense());
                let mut bras = Vec::with_capacity(size);
                let mut kets = Vec::with_capacity(size);
                for i in 0..size {
                    let d = self.effective_element(i)?.to_dense();
                    bras.push(d.compose(&vl)?.adjoint());
                    kets.push(d.compose(&vr)?);
                }
                let mut err = None;
                fill_upper(&mut entries, size, |i, j| match bras[i].compose(&kets[j]) {
                    Ok(p) => p.entry(0, 0),
                    Err(e) => {
                        err.get_or_insert(e);
                        Complex64::new(f64::NAN, 0.0)
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        KernelMatrix::from_entries(entries, self.labels.clone())
    }
}

fn fill_upper(entries: &mut [f64], size: usize, mut amp: impl FnMut(usize, usize) -> Complex64) {
    for i in 0..size {
        for j in i..size {
            let k = amp(i, j).norm_sqr();
            entries[i * size + j] = k;
            entries[j * size + i] = k;
        }
    }
}

/// Square, symmetric kernel matrix with labelled rows and columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    size: usize,
    entries: Vec<f64>,
    labels: Vec<PointLabel>,
}

impl KernelMatrix {
    const TOL: f64 = 1e-10;

    /// Row-major entries; must be symmetric and within `[0, 1]` up to `1e-10`.
    pub fn from_entries(entries: Vec<f64>, labels: Vec<PointLabel>) -> Result<Self> {
        let size = labels.len();
        if size == 0 || entries.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel entries"));
        }
        for i in 0..size {
            for j in 0..size {
                let v = entries[i * size + j];
                if !(-Self::TOL..=1.0 + Self::TOL).contains(&v) {
                    return Err(Error::InvalidParameter(format!("kernel entry ({i}, {j}) = {v} outside [0, 1]")));
                }
                if (v - entries[j * size + i]).abs() > Self::TOL {
                    return Err(Error::InvalidParameter("kernel matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { size, entries, labels })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }

    pub fn same_coset(&self, i: usize, j: usize) -> bool {
        self.labels[i].coset == self.labels[j].coset
    }

    /// Ordered off-diagonal entries `(i, j, κ_ij)` with `i ≠ j`, row-major.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.size).flat_map(move |i| {
            (0..self.size)
                .filter(move |&j| j != i)
                .map(move |j| (i, j, self.get(i, j)))
        })
    }

    pub fn off_diagonal_values(&self) -> Vec<f64> {
        self.off_diagonal().map(|(_, _, k)| k).collect()
    }

    /// Mean over ordered off-diagonal pairs; `NaN` for a 1×1 matrix.
    pub fn off_diagonal_mean(&self) -> f64 {
        stats::mean(&self.off_diagonal_values())
    }

    /// Population variance over ordered off-diagonal pairs.
    pub fn off_diagonal_variance(&self) -> f64 {
        stats::population_variance(&self.off_diagonal_values())
    }

    /// Principal submatrix on `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.size) {
            return Err(Error::InvalidParameter(format!("index {bad} out of range")));
        }
        let entries = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self::from_entries(entries, indices.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// CSV with a header row and first column of `c{i}s{a}` labels; values use
    /// the shortest decimal form that round-trips.
    pub fn heatmap_csv(&self) -> String {
        let mut out = String::new();
        for l in &self.labels {
            write!(out, ",{}", l.name()).unwrap();
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&l.name());
            for j in 0..self.size {
                write!(out, ",{}", self.get(i, j)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// `α_{i,j} = |⟨ψ| D_{c_i}† D_{c_j} |ψ⟩|²` over the dataset's representatives.
pub fn alpha_estimate(ds: &CosetDataset, fiducial: &StateVector) -> Result<AlphaMatrix> {
    let m = ds.num_cosets();
    let feats = ds
        .representatives()
        .iter()
        .map(|c| c.apply(fiducial))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![1.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let a = feats[i].inner_unchecked(&feats[j]).norm_sqr().min(1.0);
            values[i * m + j] = a;
            values[j * m + i] = a;
        }
    }
    AlphaMatrix::from_values(m, values)
}

/// Dense-operator reference for a single ideal entry, independent of the
/// statevector routines.
pub fn dense_entry(left: &DenseOperator, right: &DenseOperator, di: &GroupElement, dj: &GroupElement) -> Result<f64> {
    let a = di.to_dense().compose(left)?.adjoint();
    let b = dj.to_dense().compose(right)?;
    Ok(a.compose(&b)?.entry(0, 0).norm_sqr())
}
