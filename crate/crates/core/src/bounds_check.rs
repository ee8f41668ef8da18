//! Checks simulated noisy kernels against their worst-case envelopes.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::{trial_seed, QubitRange, Surface, TrialDraws};
use crate::kernel::EvaluationPath;
use crate::noise::{NoiseConfig, NoiseKind};

/// Slack allowed for floating-point rounding.
pub const ENVELOPE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsOptions {
    pub epsilon: f64,
    pub num_cosets: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            num_cosets: 2,
            trials: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub noise: NoiseKind,
    pub num_qubits: usize,
    pub trials: usize,
    pub entries_checked: usize,
    pub violations: usize,
    /// Largest distance outside the envelope (0 if none).
    pub max_excess: f64,
}

/// Every entry of the full kernel, diagonal included, of `opts.trials`
/// noisy trials at `num_qubits`, tested against the envelope built from
/// that pair's noiseless `α`.
pub fn check_bounds(kind: NoiseKind, num_qubits: usize, opts: &BoundsOptions) -> Result<BoundsCheck> {
    let noise = NoiseConfig::new(kind, opts.epsilon)?;
    let mut out = BoundsCheck {
        noise: kind,
        num_qubits,
        trials: opts.trials,
        entries_checked: 0,
        violations: 0,
        max_excess: 0.0,
    };
    for t in 0..opts.trials {
        let seed = trial_seed(opts.seed, num_qubits, opts.num_cosets, t);
        let draws = TrialDraws::sample(num_qubits, opts.num_cosets, seed, &noise)?;
        let kernel = draws.kernel(Surface::Full, EvaluationPath::GateLevel)?;
        let alphas = draws.alphas()?;
        for i in 0..kernel.size() {
            for j in 0..kernel.size() {
                let (ci, cj) = (kernel.labels()[i].coset, kernel.labels()[j].coset);
                let b = kind.bounds(alphas.get(ci, cj).clamp(0.0, 1.0), opts.epsilon)?;
                let k = kernel.get(i, j);
                let (lo, hi) = if ci == cj {
                    (b.same_coset_lower, 1.0)
                } else {
                    (b.cross_coset_lower, b.cross_coset_upper)
                };
                let excess = (lo - k).max(k - hi).max(0.0);
                out.entries_checked += 1;
                if excess > ENVELOPE_TOL {
                    out.violations += 1;
                }
                out.max_excess = out.max_excess.max(excess);
            }
        }
    }
    Ok(out)
}

pub fn check_bounds_range(kinds: &[NoiseKind], qubits: QubitRange, opts: &BoundsOptions) -> Result<Vec<BoundsCheck>> {
    let mut out = Vec::new();
    for &kind in kinds {
        for n in qubits.iter() {
            out.push(check_bounds(kind, n, opts)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_epsilon_has_no_violations() {
        let opts = BoundsOptions {
            trials: 5,
            ..Default::default()
        };
        for kind in [NoiseKind::Fiducial, NoiseKind::Selection, NoiseKind::Representation] {
            let r = check_bounds(kind, 4, &opts).unwrap();
            assert_eq!(r.entries_checked, 5 * 64);
            assert_eq!(r.violations, 0, "{kind}");
        }
    }

    #[test]
    fn noiseless_kernel_sits_on_the_envelope() {
        let opts = BoundsOptions {
            epsilon: 0.0,
            trials: 3,
            ..Default::default()
        };
        let r = check_bounds(NoiseKind::None, 3, &opts).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_excess < 1e-12);
    }

    #[test]
    fn range_covers_all_configurations() {
        let opts = BoundsOptions {
            trials: 1,
            ..Default::default()
        };
        let all = check_bounds_range(&[NoiseKind::Fiducial, NoiseKind::Selection], "2..3".parse().unwrap(), &opts).unwrap();
        assert_eq!(all.len(), 4);
    }
}
