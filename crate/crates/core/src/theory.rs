//! Closed-form moments of the kernel-value distribution.
//!
//! All averages run over the `mn(mn − 1)` ordered off-diagonal pairs of the
//! full `mn × mn` kernel matrix, and variances are population variances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::stats;

/// Symmetric `m × m` matrix of cross-coset overlaps `α_{i,j}` with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaMatrix {
    size: usize,
    values: Vec<f64>,
}

impl AlphaMatrix {
    const TOL: f64 = 1e-10;

    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: values.len(),
            });
        }
        let a = Self { size, values };
        for i in 0..size {
            if (a.get(i, i) - 1.0).abs() > Self::TOL {
                return Err(Error::InvalidParameter(format!("alpha diagonal entry {i} is not 1")));
            }
            for j in 0..size {
                let v = a.get(i, j);
                if !v.is_finite() || !(-Self::TOL..=1.0 + Self::TOL).contains(&v) {
                    return Err(Error::InvalidParameter(format!("alpha[{i}][{j}] = {v} outside [0, 1]")));
                }
                if (v - a.get(j, i)).abs() > Self::TOL {
                    return Err(Error::InvalidParameter("alpha matrix is not symmetric".into()));
                }
            }
        }
        Ok(a)
    }

    /// Every off-diagonal entry equal to `alpha`.
    pub fn uniform(size: usize, alpha: f64) -> Result<Self> {
        let values = (0..size * size)
            .map(|k| if k / size == k % size { 1.0 } else { alpha })
            .collect();
        Self::from_values(size, values)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    /// Entries `α_{i,j}` for `i < j`.
    pub fn upper(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size * (self.size - 1) / 2);
        for i in 0..self.size {
            for j in i + 1..self.size {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

fn check_sizes(m: usize, n: usize) -> Result<()> {
    if m < 2 || n < 1 {
        return Err(Error::InvalidParameter(format!("need m >= 2 and n >= 1, got m = {m}, n = {n}")));
    }
    Ok(())
}

/// Numerator pieces `m(n−1) + 2n Σ_{i<j} α^p` shared by both moments.
fn moment_numerator(m: usize, n: usize, alphas: &AlphaMatrix, power: i32) -> Result<f64> {
    check_sizes(m, n)?;
    if alphas.size() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: alphas.size(),
        });
    }
    let (mf, nf) = (m as f64, n as f64);
    let sum: f64 = alphas.upper().iter().map(|a| a.powi(power)).sum();
    Ok(mf * (nf - 1.0) + 2.0 * nf * sum)
}

/// `E[κ] = [m(n−1) + 2n Σ_{i<j} α_{i,j}] / (m(mn−1))`.
pub fn exact_expectation(m: usize, n: usize, alphas: &AlphaMatrix) -> Result<f64> {
    let (mf, nf) = (m as f64, n as f64);
    Ok(moment_numerator(m, n, alphas, 1)? / (mf * (mf * nf - 1.0)))
}

/// `Var[κ] = [m(mn−1)(m(n−1) + 2n Σ α²) − (m(n−1) + 2n Σ α)²] / (m²(mn−1)²)`.
pub fn exact_variance(m: usize, n: usize, alphas: &AlphaMatrix) -> Result<f64> {
    let (mf, nf) = (m as f64, n as f64);
    let first = moment_numerator(m, n, alphas, 1)?;
    let second = moment_numerator(m, n, alphas, 2)?;
    let d = mf * (mf * nf - 1.0);
    Ok(((d * second - first * first) / (d * d)).max(0.0))
}

/// `n(n−1)(m−1)/(mn−1)² · (1 − 2^{−N})²`.
pub fn asymptotic_variance(m: usize, n: usize, num_qubits: usize) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    let alpha = haar_alpha(num_qubits);
    nf * (nf - 1.0) * (mf - 1.0) / (mf * nf - 1.0).powi(2) * (1.0 - alpha).powi(2)
}

/// `[(n−1) + n(m−1) 2^{−N}] / (mn−1)`.
pub fn asymptotic_expectation(m: usize, n: usize, num_qubits: usize) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    ((nf - 1.0) + nf * (mf - 1.0) * haar_alpha(num_qubits)) / (mf * nf - 1.0)
}

/// `(m−1)/m²`, the large-`n` limit.
pub fn limit_variance(m: usize) -> f64 {
    let mf = m as f64;
    (mf - 1.0) / (mf * mf)
}

/// `1/m`, the large-`n` limit.
pub fn limit_expectation(m: usize) -> f64 {
    1.0 / m as f64
}

/// Mean Haar overlap `2^{−N}`.
pub fn haar_alpha(num_qubits: usize) -> f64 {
    0.5f64.powi(num_qubits as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ExactPerPairAlpha,
    UniformAlpha,
    AsymptoticHaar,
    LimitLargeN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePrediction {
    pub expectation: f64,
    pub variance: f64,
    pub regime: Regime,
}

impl VariancePrediction {
    pub fn exact(m: usize, n: usize, alphas: &AlphaMatrix) -> Result<Self> {
        Ok(Self {
            expectation: exact_expectation(m, n, alphas)?,
            variance: exact_variance(m, n, alphas)?,
            regime: Regime::ExactPerPairAlpha,
        })
    }

    pub fn uniform(m: usize, n: usize, alpha: f64) -> Result<Self> {
        let alphas = AlphaMatrix::uniform(m, alpha)?;
        Ok(Self {
            regime: Regime::UniformAlpha,
            ..Self::exact(m, n, &alphas)?
        })
    }

    pub fn asymptotic(m: usize, n: usize, num_qubits: usize) -> Result<Self> {
        check_sizes(m, n)?;
        Ok(Self {
            expectation: asymptotic_expectation(m, n, num_qubits),
            variance: asymptotic_variance(m, n, num_qubits),
            regime: Regime::AsymptoticHaar,
        })
    }

    pub fn limit(m: usize) -> Result<Self> {
        check_sizes(m, 1)?;
        Ok(Self {
            expectation: limit_expectation(m),
            variance: limit_variance(m),
            regime: Regime::LimitLargeN,
        })
    }
}

/// Summary of the deviations `γ = 1 − κ` (same coset) and `δ = κ − α`
/// (different cosets) of a noisy kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDeviationStats {
    pub mean_gamma: f64,
    pub var_gamma: f64,
    pub mean_delta: f64,
    pub var_delta: f64,
    pub alpha: f64,
}

impl NoiseDeviationStats {
    pub fn zero(alpha: f64) -> Self {
        Self {
            mean_gamma: 0.0,
            var_gamma: 0.0,
            mean_delta: 0.0,
            var_delta: 0.0,
            alpha,
        }
    }
}

/// `(n−1)/(mn−1) (1 − E[γ]) + n(m−1)/(mn−1) (α + E[δ])`.
pub fn noisy_expectation(m: usize, n: usize, s: &NoiseDeviationStats) -> Result<f64> {
    let q = same_coset_fraction(m, n)?;
    Ok(q * (1.0 - s.mean_gamma) + (1.0 - q) * (s.alpha + s.mean_delta))
}

/// `n(m−1)(n−1)/(mn−1)² ((1 − E[γ]) − (α + E[δ]))² + [(n−1)Var[γ] + n(m−1)Var[δ]]/(mn−1)`.
pub fn noisy_variance(m: usize, n: usize, s: &NoiseDeviationStats) -> Result<f64> {
    let q = same_coset_fraction(m, n)?;
    let gap = (1.0 - s.mean_gamma) - (s.alpha + s.mean_delta);
    Ok(q * (1.0 - q) * gap * gap + q * s.var_gamma + (1.0 - q) * s.var_delta)
}

/// Fraction `(n−1)/(mn−1)` of off-diagonal pairs that share a coset.
fn same_coset_fraction(m: usize, n: usize) -> Result<f64> {
    check_sizes(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    Ok((nf - 1.0) / (mf * nf - 1.0))
}

fn deviation_stats(gamma: &[f64], delta: &[f64], alpha: f64) -> Result<NoiseDeviationStats> {
    for (class, v) in [("same-coset", gamma), ("cross-coset", delta)] {
        if v.len() < 2 {
            return Err(Error::InsufficientEntries { class, count: v.len() });
        }
    }
    Ok(NoiseDeviationStats {
        mean_gamma: stats::mean(gamma),
        var_gamma: stats::population_variance(gamma),
        mean_delta: stats::mean(delta),
        var_delta: stats::population_variance(delta),
        alpha,
    })
}

/// Deviations of every ordered off-diagonal entry against a single `α`.
pub fn extract_deviation_stats(kernel: &KernelMatrix, alpha: f64) -> Result<NoiseDeviationStats> {
    let (mut gamma, mut delta) = (Vec::new(), Vec::new());
    for (i, j, k) in kernel.off_diagonal() {
        if kernel.same_coset(i, j) {
            gamma.push(1.0 - k);
        } else {
            delta.push(k - alpha);
        }
    }
    deviation_stats(&gamma, &delta, alpha)
}

/// Deviations measured against each pair's own `α_{i,j}`; the reported
/// `alpha` is the mean of `α` over the cross-coset entries, so
/// `alpha + mean_delta` is still the mean cross-coset kernel value.
/// `var_delta` then excludes the spread of `α` itself, so the variance
/// formula is only an exact decomposition when `α` is uniform.
pub fn extract_deviation_stats_per_pair(kernel: &KernelMatrix, alphas: &AlphaMatrix) -> Result<NoiseDeviationStats> {
    let (mut gamma, mut delta, mut used) = (Vec::new(), Vec::new(), Vec::new());
    for (i, j, k) in kernel.off_diagonal() {
        let (ci, cj) = (kernel.labels()[i].coset, kernel.labels()[j].coset);
        if ci.max(cj) >= alphas.size() {
            return Err(Error::DimensionMismatch {
                expected: ci.max(cj) + 1,
                found: alphas.size(),
            });
        }
        if ci == cj {
            gamma.push(1.0 - k);
        } else {
            let a = alphas.get(ci, cj);
            delta.push(k - a);
            used.push(a);
        }
    }
    let alpha = if used.is_empty() { 0.0 } else { stats::mean(&used) };
    deviation_stats(&gamma, &delta, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::PointLabel;

    /// Explicit ordered off-diagonal multiset of an ideal kernel.
    fn multiset(m: usize, n: usize, alphas: &AlphaMatrix) -> Vec<f64> {
        let mut out = Vec::new();
        for x in 0..m * n {
            for y in 0..m * n {
                if x == y {
                    continue;
                }
                let (ci, cj) = (x / n, y / n);
                out.push(if ci == cj { 1.0 } else { alphas.get(ci, cj) });
            }
        }
        out
    }

    fn random_alphas(m: usize, seed: u64) -> AlphaMatrix {
        let mut vals = vec![1.0; m * m];
        let mut s = seed;
        for i in 0..m {
            for j in i + 1..m {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 11) as f64 / (1u64 << 53) as f64;
                vals[i * m + j] = a;
                vals[j * m + i] = a;
            }
        }
        AlphaMatrix::from_values(m, vals).unwrap()
    }

    #[test]
    fn expectation_with_zero_alpha() {
        let a = AlphaMatrix::uniform(2, 0.0).unwrap();
        assert!((exact_expectation(2, 3, &a).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn constant_kernel_moments() {
        let a = AlphaMatrix::uniform(4, 1.0).unwrap();
        assert!((exact_expectation(4, 5, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(exact_variance(4, 5, &a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn moments_match_multiset_enumeration() {
        for (m, n, seed) in [(2, 1, 1), (3, 1, 2), (2, 3, 3), (3, 4, 4), (5, 10, 5), (4, 7, 6)] {
            let a = random_alphas(m, seed);
            let values = multiset(m, n, &a);
            assert_eq!(values.len(), m * n * (m * n - 1));
            let e = exact_expectation(m, n, &a).unwrap();
            let v = exact_variance(m, n, &a).unwrap();
            assert!((e - stats::mean(&values)).abs() < 1e-13, "m={m} n={n}");
            assert!((v - stats::population_variance(&values)).abs() < 1e-13, "m={m} n={n}");
        }
    }

    #[test]
    fn uniform_alpha_variance_equals_asymptotic_form() {
        for n_qubits in [2usize, 4, 8, 10] {
            for m in 2..=5 {
                let n = n_qubits;
                let a = AlphaMatrix::uniform(m, haar_alpha(n_qubits)).unwrap();
                let exact = exact_variance(m, n, &a).unwrap();
                let asym = asymptotic_variance(m, n, n_qubits);
                assert!((exact - asym).abs() <= 1e-12 * asym.max(1e-300));
                let e = exact_expectation(m, n, &a).unwrap();
                assert!((e - asymptotic_expectation(m, n, n_qubits)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn m2_n10_alpha_1_over_1024() {
        let a = AlphaMatrix::uniform(2, 1.0 / 1024.0).unwrap();
        let exact = exact_variance(2, 10, &a).unwrap();
        let asym = 10.0 * 9.0 / 361.0 * (1.0 - 1.0 / 1024.0f64).powi(2);
        assert!(((exact - asym) / asym).abs() < 1e-3);
    }

    #[test]
    fn limits() {
        assert_eq!(limit_variance(2), 0.25);
        assert!((limit_variance(5) - 0.16).abs() < 1e-15);
        for m in 2..=5 {
            assert_eq!(limit_expectation(m), 1.0 / m as f64);
        }
        for m in 3..20 {
            assert!(limit_variance(m) < limit_variance(m - 1));
        }
    }

    #[test]
    fn large_n_approaches_limits() {
        for m in 2..=5 {
            let n = 100_000;
            assert!((asymptotic_variance(m, n, 30) - limit_variance(m)).abs() < 1e-4);
            assert!((asymptotic_expectation(m, n, 30) - limit_expectation(m)).abs() < 1e-4);
        }
    }

    #[test]
    fn uniform_alpha_relative_gap_small_for_large_n() {
        for n_qubits in 8..=12 {
            for m in 2..=5 {
                let a = AlphaMatrix::uniform(m, haar_alpha(n_qubits)).unwrap();
                let exact = exact_variance(m, n_qubits, &a).unwrap();
                let asym = asymptotic_variance(m, n_qubits, n_qubits);
                assert!(((exact - asym) / asym).abs() < 0.01);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_error() {
        let a = AlphaMatrix::uniform(3, 0.1).unwrap();
        assert!(exact_expectation(2, 4, &a).is_err());
        assert!(exact_variance(1, 4, &a).is_err());
    }

    #[test]
    fn alpha_matrix_validation() {
        assert!(AlphaMatrix::from_values(2, vec![1.0, 0.3, 0.2, 1.0]).is_err());
        assert!(AlphaMatrix::from_values(2, vec![0.9, 0.3, 0.3, 1.0]).is_err());
        assert!(AlphaMatrix::from_values(2, vec![1.0, 1.3, 1.3, 1.0]).is_err());
        assert!(AlphaMatrix::from_values(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn noisy_formulas_reduce_to_exact_forms() {
        for (m, n, alpha) in [(2, 4, 0.01), (3, 6, 0.2), (5, 10, 1.0 / 1024.0)] {
            let s = NoiseDeviationStats::zero(alpha);
            let u = AlphaMatrix::uniform(m, alpha).unwrap();
            assert!((noisy_expectation(m, n, &s).unwrap() - exact_expectation(m, n, &u).unwrap()).abs() < 1e-14);
            assert!((noisy_variance(m, n, &s).unwrap() - exact_variance(m, n, &u).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn noisy_constant_kernel() {
        let alpha = 0.3;
        let s = NoiseDeviationStats {
            mean_gamma: 1.0 - alpha,
            ..NoiseDeviationStats::zero(alpha)
        };
        assert!((noisy_expectation(3, 4, &s).unwrap() - alpha).abs() < 1e-15);
        assert!(noisy_variance(3, 4, &s).unwrap().abs() < 1e-15);
    }

    fn labels(m: usize, n: usize) -> Vec<PointLabel> {
        (0..m * n).map(|k| PointLabel { coset: k / n, index: k % n }).collect()
    }

    #[test]
    fn decomposition_identity_on_arbitrary_symmetric_matrix() {
        for (m, n, seed) in [(2, 3, 11u64), (3, 4, 12), (4, 2, 13), (5, 5, 14)] {
            let size = m * n;
            let mut entries = vec![0.0; size * size];
            let mut s = seed;
            for i in 0..size {
                for j in i..size {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let v = (s >> 11) as f64 / (1u64 << 53) as f64;
                    entries[i * size + j] = v;
                    entries[j * size + i] = v;
                }
            }
            let k = KernelMatrix::from_entries(entries, labels(m, n)).unwrap();
            let direct = k.off_diagonal_variance();
            for alpha in [0.0, 0.05, 0.5] {
                let st = extract_deviation_stats(&k, alpha).unwrap();
                assert!((noisy_variance(m, n, &st).unwrap() - direct).abs() < 1e-12);
                assert!((noisy_expectation(m, n, &st).unwrap() - k.off_diagonal_mean()).abs() < 1e-12);
            }
            let per_pair = extract_deviation_stats_per_pair(&k, &random_alphas(m, seed)).unwrap();
            assert!((noisy_expectation(m, n, &per_pair).unwrap() - k.off_diagonal_mean()).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_kernel_has_zero_gamma_and_per_pair_delta() {
        let (m, n) = (3, 3);
        let a = random_alphas(m, 21);
        let size = m * n;
        let entries = (0..size * size)
            .map(|k| {
                let (x, y) = (k / size, k % size);
                if x / n == y / n { 1.0 } else { a.get(x / n, y / n) }
            })
            .collect();
        let k = KernelMatrix::from_entries(entries, labels(m, n)).unwrap();
        let st = extract_deviation_stats_per_pair(&k, &a).unwrap();
        assert_eq!(st.mean_gamma, 0.0);
        assert_eq!(st.var_gamma, 0.0);
        assert!(st.mean_delta.abs() < 1e-15);
        assert!(st.var_delta.abs() < 1e-15);
    }

    #[test]
    fn too_few_entries_is_error() {
        // One point per coset: no same-coset pairs at all.
        let k = KernelMatrix::from_entries(vec![1.0, 0.2, 0.2, 1.0], labels(2, 1)).unwrap();
        assert!(matches!(
            extract_deviation_stats(&k, 0.2),
            Err(Error::InsufficientEntries { class: "same-coset", count: 0 })
        ));
    }

    #[test]
    fn prediction_regimes() {
        let p = VariancePrediction::uniform(2, 10, 1.0 / 1024.0).unwrap();
        assert_eq!(p.regime, Regime::UniformAlpha);
        let q = VariancePrediction::asymptotic(2, 10, 10).unwrap();
        assert!((p.variance - q.variance).abs() < 1e-14);
        assert_eq!(VariancePrediction::limit(2).unwrap().variance, 0.25);
        assert_eq!(serde_json::to_string(&Regime::AsymptoticHaar).unwrap(), "\"asymptotic_haar\"");
    }
}
