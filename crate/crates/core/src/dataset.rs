//! Labeled data drawn from `m` disjoint sets `c_i S`.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{chain_generators, GroupElement};

/// Cap on rejection-sampling attempts when drawing a covering split.
const MAX_SPLIT_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    /// `D_x = D_{c_i} D_{s_a}`
    pub element: GroupElement,
    pub coset_label: usize,
    pub subgroup_index: usize,
}

impl DataPoint {
    /// Row/column label used in heat maps, e.g. `c1s4`.
    pub fn label(&self) -> String {
        format!("c{}s{}", self.coset_label, self.subgroup_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosetDataset {
    num_qubits: usize,
    representatives: Vec<GroupElement>,
    subgroup_elems: Vec<GroupElement>,
    points: Vec<DataPoint>,
    #[serde(default)]
    seed: Option<u64>,
}

impl CosetDataset {
    /// Draws `m` Haar-random representatives and enumerates `c_i s_a` for
    /// every chain generator `s_a`, coset-major.
    pub fn generate<R: Rng + ?Sized>(num_qubits: usize, num_cosets: usize, rng: &mut R) -> Result<Self> {
        if num_cosets < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 cosets, got {num_cosets}"
            )));
        }
        let subgroup_elems: Vec<GroupElement> = chain_generators(num_qubits)?
            .iter()
            .map(GroupElement::from_pauli)
            .collect();
        let representatives: Vec<GroupElement> = (0..num_cosets)
            .map(|_| GroupElement::haar_random(num_qubits, rng))
            .collect();
        Self::from_parts(representatives, subgroup_elems)
    }

    /// Builds the dataset from explicit representatives and subset elements.
    pub fn from_parts(representatives: Vec<GroupElement>, subgroup_elems: Vec<GroupElement>) -> Result<Self> {
        let num_qubits = representatives
            .first()
            .map(GroupElement::num_qubits)
            .ok_or_else(|| Error::InvalidParameter("no representatives".into()))?;
        if subgroup_elems.is_empty() {
            return Err(Error::InvalidParameter("empty subset S".into()));
        }
        let mut points = Vec::with_capacity(representatives.len() * subgroup_elems.len());
        for (i, c) in representatives.iter().enumerate() {
            for (a, s) in subgroup_elems.iter().enumerate() {
                points.push(DataPoint {
                    element: c.compose(s)?,
                    coset_label: i,
                    subgroup_index: a,
                });
            }
        }
        Ok(Self {
            num_qubits,
            representatives,
            subgroup_elems,
            points,
            seed: None,
        })
    }

    /// Records the seed the dataset was generated from.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_cosets(&self) -> usize {
        self.representatives.len()
    }

    pub fn subgroup_size(&self) -> usize {
        self.subgroup_elems.len()
    }

    pub fn representatives(&self) -> &[GroupElement] {
        &self.representatives
    }

    pub fn subgroup_elems(&self) -> &[GroupElement] {
        &self.subgroup_elems
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ds: Self = serde_json::from_str(s)?;
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.num_cosets(), self.subgroup_size());
        if self.points.len() != m * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} points, found {}",
                m * n,
                self.points.len()
            )));
        }
        for p in &self.points {
            if p.coset_label >= m || p.subgroup_index >= n || p.element.num_qubits() != self.num_qubits {
                return Err(Error::InvalidParameter(format!("inconsistent point {}", p.label())));
            }
        }
        Ok(())
    }

    /// Random half of the points for training, covering every coset.
    ///
    /// The training set has `⌊mn/2⌋` points and is drawn uniformly among all
    /// subsets of that size containing each label at least once (rejection
    /// sampling).
    pub fn split<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SplitIndices> {
        let total = self.points.len();
        let train_size = total / 2;
        let m = self.num_cosets();
        if m > train_size {
            return Err(Error::InfeasibleSplit {
                num_cosets: m,
                train_size,
            });
        }
        let mut seen = vec![false; m];
        for _ in 0..MAX_SPLIT_ATTEMPTS {
            let mut train = index::sample(rng, total, train_size).into_vec();
            seen.iter_mut().for_each(|s| *s = false);
            for &i in &train {
                seen[self.points[i].coset_label] = true;
            }
            if seen.iter().all(|&s| s) {
                train.sort_unstable();
                let test = (0..total).filter(|i| train.binary_search(i).is_err()).collect();
                return Ok(SplitIndices { train, test });
            }
        }
        Err(Error::InfeasibleSplit {
            num_cosets: m,
            train_size,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}
