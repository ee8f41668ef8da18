//! Coherent-noise perturbations with operator-norm budgets, and the worst-case
//! kernel envelopes they imply.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiducialPreparation, GroupElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    None,
    /// `V` replaced by independently perturbed `W_1`, `W_2` on the two sides.
    Fiducial,
    /// Each data point's unitary left-multiplied by a small `D_e`.
    Selection,
    /// Imperfect representation `A = D_e D_x`; sampled like selection noise
    /// but judged against the looser representation-error envelope.
    Representation,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::None,
        NoiseKind::Fiducial,
        NoiseKind::Selection,
        NoiseKind::Representation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Fiducial => "fiducial",
            NoiseKind::Selection => "selection",
            NoiseKind::Representation => "representation",
        }
    }

    /// Envelope for this noise family at the given budget.
    pub fn bounds(self, alpha: f64, epsilon: f64) -> Result<NoiseBounds> {
        match self {
            NoiseKind::None => bounds_fiducial(alpha, 0.0),
            NoiseKind::Fiducial => bounds_fiducial(alpha, epsilon),
            NoiseKind::Selection => bounds_selection(alpha, epsilon),
            NoiseKind::Representation => bounds_representation(alpha, epsilon),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown noise kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Operator-norm budget.
    pub epsilon: f64,
}

impl NoiseConfig {
    pub const NONE: NoiseConfig = NoiseConfig {
        kind: NoiseKind::None,
        epsilon: 0.0,
    };

    pub fn new(kind: NoiseKind, epsilon: f64) -> Result<Self> {
        let cfg = Self { kind, epsilon };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Per-qubit angle offsets `θ_j` of the perturbed preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiducialOffsets {
    pub thetas: Vec<f64>,
}

impl FiducialOffsets {
    /// Half-width `2ε/N` of the sampling interval.
    pub fn budget(num_qubits: usize, epsilon: f64) -> f64 {
        2.0 * epsilon / num_qubits as f64
    }

    pub fn zeros(num_qubits: usize) -> Self {
        Self {
            thetas: vec![0.0; num_qubits],
        }
    }

    /// `N` independent draws from `U[-2ε/N, 2ε/N]`.
    pub fn sample<R: Rng + ?Sized>(num_qubits: usize, epsilon: f64, rng: &mut R) -> Result<Self> {
        let half = Self::budget(num_qubits, checked_epsilon(epsilon)?);
        Ok(Self {
            thetas: (0..num_qubits).map(|_| uniform_symmetric(rng, half)).collect(),
        })
    }

    pub fn preparation(&self) -> Result<FiducialPreparation> {
        FiducialPreparation::with_offsets(self.thetas.clone())
    }

    /// `‖V − W‖` from the eigenphases of `⊗_j R_y(−θ_j)`, without forming
    /// any `2^N`-sized matrix.
    ///
    /// `V − W = V (I − ⊗ R_y(−θ_j))` up to the CZ layer, and the tensor
    /// product has eigenvalues `exp(i Σ ±θ_j/2)`; each singular value of
    /// `U − I` is `sqrt(2 − 2 Re λ)`.
    pub fn closed_form_distance(&self) -> f64 {
        let half_angles: Vec<f64> = self.thetas.iter().map(|t| t / 2.0).collect();
        max_distance_from_phases(&half_angles)
    }
}

/// Euler triples `(θ_{j,1}, θ_{j,2}, θ_{j,3})` of a selection perturbation
/// `D_e = ⊗_j R_x(θ_{j,1}) R_z(θ_{j,2}) R_x(θ_{j,3})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementPerturbation {
    pub triples: Vec<[f64; 3]>,
}

impl ElementPerturbation {
    /// Half-width `2ε/(√5 N)` of the sampling interval.
    pub fn budget(num_qubits: usize, epsilon: f64) -> f64 {
        2.0 * epsilon / (5f64.sqrt() * num_qubits as f64)
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            triples: vec![[0.0; 3]; num_qubits],
        }
    }

    /// `3N` independent draws from `U[-2ε/(√5 N), 2ε/(√5 N)]`.
    pub fn sample<R: Rng + ?Sized>(num_qubits: usize, epsilon: f64, rng: &mut R) -> Result<Self> {
        let half = Self::budget(num_qubits, checked_epsilon(epsilon)?);
        Ok(Self {
            triples: (0..num_qubits)
                .map(|_| std::array::from_fn(|_| uniform_symmetric(rng, half)))
                .collect(),
        })
    }

    pub fn element(&self) -> Result<GroupElement> {
        GroupElement::from_euler(&self.triples)
    }

    /// `‖D_e − I‖` from the per-qubit eigenphases
    /// `β_j = arccos(cos(θ_{j,2}/2) cos((θ_{j,1} + θ_{j,3})/2))`.
    pub fn closed_form_distance(&self) -> f64 {
        let phases: Vec<f64> = self
            .triples
            .iter()
            .map(|&[a, b, c]| ((b / 2.0).cos() * ((a + c) / 2.0).cos()).clamp(-1.0, 1.0).acos())
            .collect();
        max_distance_from_phases(&phases)
    }
}

/// `max_k |1 − exp(i Σ_j ±φ_j)|` over all sign patterns.
fn max_distance_from_phases(phases: &[f64]) -> f64 {
    let n = phases.len();
    assert!(n < 31, "sign enumeration limited to 30 factors");
    let mut best: f64 = 0.0;
    for signs in 0u32..(1 << n) {
        let total: f64 = phases
            .iter()
            .enumerate()
            .map(|(j, p)| if signs >> j & 1 == 1 { -p } else { *p })
            .sum();
        let sq = 2.0 - 2.0 * total.cos();
        best = best.max(sq);
    }
    best.max(0.0).sqrt()
}

fn checked_epsilon(epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    Ok(epsilon)
}

fn uniform_symmetric<R: Rng + ?Sized>(rng: &mut R, half: f64) -> f64 {
    if half == 0.0 {
        0.0
    } else {
        rng.random_range(-half..=half)
    }
}

/// Worst-case kernel envelope for one noise family.
///
/// Same-coset entries lie in `[same_coset_lower, 1]`; a cross-coset entry with
/// noiseless value `α` lies in `[cross_coset_lower, cross_coset_upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBounds {
    pub same_coset_lower: f64,
    pub cross_coset_lower: f64,
    pub cross_coset_upper: f64,
}

impl NoiseBounds {
    /// Builds the envelope from a bound `radius` on the amplitude deviation
    /// `| |⟨noisy⟩| − |⟨ideal⟩| |`, for ideal amplitudes 1 and `√α`.
    fn from_amplitude_radius(alpha: f64, radius: f64) -> Self {
        let root = alpha.sqrt();
        let sq = |x: f64| x.max(0.0).powi(2).min(1.0);
        Self {
            same_coset_lower: sq(1.0 - radius),
            cross_coset_lower: sq(root - radius),
            cross_coset_upper: sq(root + radius),
        }
    }

    pub fn contains(&self, kappa: f64, same_coset: bool, tol: f64) -> bool {
        if same_coset {
            kappa >= self.same_coset_lower - tol && kappa <= 1.0 + tol
        } else {
            kappa >= self.cross_coset_lower - tol && kappa <= self.cross_coset_upper + tol
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// Fiducial-state error `‖V − W‖ ≤ ε`.
///
/// Amplitudes move by at most `2ε + ε²`, so same-coset entries are at least
/// `(1 − 2ε − ε²)² = 1 − 4ε + 2ε² + 4ε³ + ε⁴` and cross entries lie within
/// `(√α ∓ (2ε + ε²))²`. The lower end is taken as 0 once the amplitude
/// radius exceeds the ideal amplitude.
pub fn bounds_fiducial(alpha: f64, epsilon: f64) -> Result<NoiseBounds> {
    check_alpha(alpha)?;
    let epsilon = checked_epsilon(epsilon)?;
    Ok(NoiseBounds::from_amplitude_radius(alpha, 2.0 * epsilon + epsilon * epsilon))
}

/// Representation error `‖D_x − A_x‖ ≤ ε`: same envelope as the fiducial case.
pub fn bounds_representation(alpha: f64, epsilon: f64) -> Result<NoiseBounds> {
    bounds_fiducial(alpha, epsilon)
}

/// Selection error `‖D_e − I‖ ≤ ε`.
///
/// Two perturbations differ by at most `2ε`, giving cross entries within
/// `(√α ∓ 2ε)² = α ∓ 4√α ε + 4ε²` and same-coset entries at least
/// `(1 − (2ε)²/2)² = 1 − 4ε² + 4ε⁴`.
pub fn bounds_selection(alpha: f64, epsilon: f64) -> Result<NoiseBounds> {
    check_alpha(alpha)?;
    let epsilon = checked_epsilon(epsilon)?;
    let radius = 2.0 * epsilon;
    let mut bounds = NoiseBounds::from_amplitude_radius(alpha, radius);
    bounds.same_coset_lower = (1.0 - radius * radius / 2.0).max(0.0).powi(2);
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::dense::DenseOperator;

    #[test]
    fn zero_budget_samples_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        assert_eq!(FiducialOffsets::sample(5, 0.0, &mut rng).unwrap(), FiducialOffsets::zeros(5));
        let e = ElementPerturbation::sample(4, 0.0, &mut rng).unwrap();
        assert_eq!(e, ElementPerturbation::identity(4));
        assert_eq!(e.element().unwrap(), GroupElement::identity(4));
    }

    #[test]
    fn sample_ranges_respect_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let f = FiducialOffsets::sample(10, 0.9, &mut rng).unwrap();
            assert!(f.thetas.iter().all(|t| t.abs() <= 0.18));
            let e = ElementPerturbation::sample(10, 0.9, &mut rng).unwrap();
            // 2·0.9/(√5·10) ≈ 0.0805
            assert!(e.triples.iter().flatten().all(|t| t.abs() <= 0.080_499));
        }
        assert!(FiducialOffsets::sample(3, -0.1, &mut rng).is_err());
    }

    #[test]
    fn fiducial_budget_holds_by_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for n in 2..=5 {
            let v = FiducialPreparation::ideal(n).unwrap().to_dense();
            for _ in 0..40 {
                let eps = 0.9;
                let offsets = FiducialOffsets::sample(n, eps, &mut rng).unwrap();
                let w = offsets.preparation().unwrap().to_dense();
                let norm = v.sub(&w).unwrap().operator_norm().unwrap();
                assert!(norm <= eps + 1e-6);
                assert!((norm - offsets.closed_form_distance()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn selection_budget_holds_by_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for n in 2..=5 {
            let id = DenseOperator::identity(1 << n).unwrap();
            for _ in 0..40 {
                let eps = 0.9;
                let e = ElementPerturbation::sample(n, eps, &mut rng).unwrap();
                let dense = e.element().unwrap().to_dense();
                let norm = dense.sub(&id).unwrap().operator_norm().unwrap();
                assert!(norm <= eps + 1e-6);
                assert!((norm - e.closed_form_distance()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_matches_svd_for_large_angles() {
        // Outside the small-angle regime the eigenphase formula is still exact.
        let e = ElementPerturbation {
            triples: vec![[0.9, -1.3, 0.4], [2.0, 0.5, -0.7], [0.1, 0.2, 0.3]],
        };
        let id = DenseOperator::identity(8).unwrap();
        let svd = e.element().unwrap().to_dense().sub(&id).unwrap().operator_norm().unwrap();
        assert!((svd - e.closed_form_distance()).abs() < 1e-10);
    }

    #[test]
    fn zero_epsilon_bounds_collapse() {
        for alpha in [0.0, 0.01, 0.3, 1.0] {
            for b in [
                bounds_fiducial(alpha, 0.0).unwrap(),
                bounds_selection(alpha, 0.0).unwrap(),
                bounds_representation(alpha, 0.0).unwrap(),
            ] {
                assert_eq!(b.same_coset_lower, 1.0);
                assert!((b.cross_coset_lower - alpha).abs() < 1e-15);
                assert!((b.cross_coset_upper - alpha).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fiducial_bounds_small_alpha() {
        let eps = 0.05;
        let b = bounds_fiducial(0.0, eps).unwrap();
        let poly = 4.0 * eps * eps + 4.0 * eps.powi(3) + eps.powi(4);
        assert!((b.cross_coset_upper - poly).abs() < 1e-15);
        assert_eq!(b.cross_coset_lower, 0.0);
    }

    #[test]
    fn fiducial_bounds_match_expanded_polynomials() {
        let eps: f64 = 0.05;
        let same = 1.0 - 4.0 * eps + 2.0 * eps * eps + 4.0 * eps.powi(3) + eps.powi(4);
        // √α above the amplitude radius, so no clamping on either side.
        let alpha: f64 = 0.25;
        let r = alpha.sqrt();
        let lower = alpha - 4.0 * r * eps + 2.0 * (2.0 - r) * eps * eps + 4.0 * eps.powi(3) + eps.powi(4);
        let upper = alpha + 4.0 * r * eps + 2.0 * (2.0 + r) * eps * eps + 4.0 * eps.powi(3) + eps.powi(4);
        let b = bounds_fiducial(alpha, eps).unwrap();
        assert!((b.same_coset_lower - same).abs() < 1e-14);
        assert!((b.cross_coset_lower - lower).abs() < 1e-14);
        assert!((b.cross_coset_upper - upper).abs() < 1e-14);
    }

    #[test]
    fn fiducial_bounds_tiny_alpha_clamp_lower_end() {
        // α = 1/1024, ε = 0.05: √α = 0.03125 < 2ε + ε² = 0.1025.
        let alpha = 1.0 / 1024.0;
        let eps = 0.05;
        let b = bounds_fiducial(alpha, eps).unwrap();
        let r = 2.0 * eps + eps * eps;
        assert_eq!(b.cross_coset_lower, 0.0);
        assert!((b.cross_coset_upper - (alpha.sqrt() + r).powi(2)).abs() < 1e-15);
        let poly_upper =
            alpha + 4.0 * alpha.sqrt() * eps + 2.0 * (2.0 + alpha.sqrt()) * eps * eps + 4.0 * eps.powi(3) + eps.powi(4);
        assert!((b.cross_coset_upper - poly_upper).abs() < 1e-15);
    }

    #[test]
    fn selection_bounds_values() {
        let b = bounds_selection(0.25, 0.1).unwrap();
        assert!((b.cross_coset_lower - 0.09).abs() < 1e-15);
        assert!((b.cross_coset_upper - 0.49).abs() < 1e-15);
        let eps: f64 = 0.05;
        let b = bounds_selection(0.5, eps).unwrap();
        let expanded = 1.0 - 4.0 * eps * eps + 4.0 * eps.powi(4);
        assert!((b.same_coset_lower - (1.0 - (2.0 * eps).powi(2) / 2.0).powi(2)).abs() < 1e-15);
        assert!((b.same_coset_lower - expanded).abs() < 1e-15);
    }

    #[test]
    fn representation_equals_fiducial() {
        for alpha in [0.0, 1.0 / 256.0, 0.1, 0.7] {
            for eps in [0.0, 0.01, 0.05, 0.2] {
                assert_eq!(bounds_representation(alpha, eps).unwrap(), bounds_fiducial(alpha, eps).unwrap());
            }
        }
    }

    #[test]
    fn bounds_reject_bad_alpha() {
        assert!(bounds_fiducial(1.5, 0.1).is_err());
        assert!(bounds_selection(-0.1, 0.1).is_err());
    }

    #[test]
    fn large_epsilon_bounds_stay_in_unit_interval() {
        for kind in [NoiseKind::Fiducial, NoiseKind::Selection, NoiseKind::Representation] {
            let b = kind.bounds(0.01, 0.9).unwrap();
            for v in [b.same_coset_lower, b.cross_coset_lower, b.cross_coset_upper] {
                assert!((0.0..=1.0).contains(&v));
            }
            assert!(b.cross_coset_lower <= b.cross_coset_upper);
        }
    }

    #[test]
    fn noise_kind_round_trips_through_strings() {
        for k in NoiseKind::ALL {
            assert_eq!(k.to_string().parse::<NoiseKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert!("depolarizing".parse::<NoiseKind>().is_err());
    }
}
