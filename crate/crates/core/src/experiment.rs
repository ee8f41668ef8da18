//! Monte-Carlo trials over random coset datasets and their aggregation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{CosetDataset, SplitIndices};
use crate::error::{Error, Result};
use crate::group::FiducialPreparation;
use crate::kernel::{alpha_estimate, EvaluationPath, KernelJob, KernelMatrix, NoiseAttachment};
use crate::noise::{ElementPerturbation, FiducialOffsets, NoiseConfig, NoiseKind};
use crate::stats::{self, MinMeanMax};
use crate::theory::{self, AlphaMatrix, NoiseDeviationStats};

/// Largest register the runner accepts.
pub const MAX_QUBITS: usize = 12;

const DATA_STREAM: u64 = 0;
const SPLIT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Inclusive qubit-count range, written `a..b` (or a single number).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRange {
    pub start: usize,
    pub end: usize,
}

impl QubitRange {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < 2 || start > end {
            return Err(Error::InvalidParameter(format!("invalid qubit range {start}..{end}")));
        }
        if end > MAX_QUBITS {
            return Err(Error::CapacityExceeded {
                num_qubits: end,
                max: MAX_QUBITS,
            });
        }
        Ok(Self { start, end })
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

impl Default for QubitRange {
    fn default() -> Self {
        Self { start: 2, end: 10 }
    }
}

impl fmt::Display for QubitRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for QubitRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("invalid qubit range {s:?}")))
        };
        match s.split_once("..") {
            Some((a, b)) => Self::new(parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                Self::new(n, n)
            }
        }
    }
}

impl Serialize for QubitRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QubitRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated list such as `2,3,5`.
pub fn parse_coset_list(s: &str) -> Result<Vec<usize>> {
    let list = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("invalid coset list {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(Error::InvalidParameter("empty coset list".into()));
    }
    Ok(list)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    /// Kernel on the training split only.
    #[default]
    Train,
    Full,
}

impl FromStr for Surface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Surface::Train),
            "full" => Ok(Surface::Full),
            _ => Err(Error::InvalidParameter(format!("unknown surface {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::InvalidParameter(format!("unknown output format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub qubits: QubitRange,
    pub cosets: Vec<usize>,
    pub trials: usize,
    pub noise: NoiseConfig,
    pub surface: Surface,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            qubits: QubitRange::default(),
            cosets: vec![2, 3, 4, 5],
            trials: 100,
            noise: NoiseConfig::NONE,
            surface: Surface::Train,
            seed: 0,
            out: None,
            format: OutputFormat::Json,
            heatmap: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        QubitRange::new(self.qubits.start, self.qubits.end)?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.cosets.is_empty() {
            return Err(Error::InvalidParameter("no coset counts given".into()));
        }
        if let Some(&m) = self.cosets.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidParameter(format!("coset count must be at least 2, got {m}")));
        }
        self.noise.validate()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy without output paths, as recorded inside reports.
    pub fn without_paths(&self) -> Self {
        Self {
            out: None,
            heatmap: None,
            ..self.clone()
        }
    }
}

/// Per-trial options that do not affect the random draws.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialSettings {
    pub noise: NoiseConfig,
    pub surface: Surface,
    pub path: EvaluationPath,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial, a pure function of its coordinates.
pub fn trial_seed(master: u64, num_qubits: usize, num_cosets: usize, trial_index: usize) -> u64 {
    [num_qubits as u64, num_cosets as u64, trial_index as u64]
        .into_iter()
        .fold(splitmix64(master), |acc, x| splitmix64(acc ^ x))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Samples the noise draws for every point of `ds`.
pub fn draw_noise(noise: &NoiseConfig, ds: &CosetDataset, rng: &mut ChaCha8Rng) -> Result<NoiseAttachment> {
    let n = ds.num_qubits();
    Ok(match noise.kind {
        NoiseKind::None => NoiseAttachment::None,
        NoiseKind::Fiducial => NoiseAttachment::Fiducial {
            left: FiducialOffsets::sample(n, noise.epsilon, rng)?,
            right: FiducialOffsets::sample(n, noise.epsilon, rng)?,
        },
        NoiseKind::Selection | NoiseKind::Representation => NoiseAttachment::Element(
            (0..ds.len())
                .map(|_| ElementPerturbation::sample(n, noise.epsilon, rng))
                .collect::<Result<_>>()?,
        ),
    })
}

/// Everything drawn for one trial, before any statistics.
#[derive(Debug, Clone)]
pub struct TrialDraws {
    pub dataset: CosetDataset,
    pub split: SplitIndices,
    pub job: KernelJob,
    pub seed: u64,
}

impl TrialDraws {
    pub fn sample(num_qubits: usize, num_cosets: usize, seed: u64, noise: &NoiseConfig) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::CapacityExceeded {
                num_qubits,
                max: MAX_QUBITS,
            });
        }
        noise.validate()?;
        let dataset = CosetDataset::generate(num_qubits, num_cosets, &mut stream(seed, DATA_STREAM))?.with_seed(seed);
        let split = dataset.split(&mut stream(seed, SPLIT_STREAM))?;
        let attachment = draw_noise(noise, &dataset, &mut stream(seed, NOISE_STREAM))?;
        let job = KernelJob::from_dataset(&dataset)?.with_noise(attachment)?;
        Ok(Self {
            dataset,
            split,
            job,
            seed,
        })
    }

    /// Exact `α_{i,j}` of the noiseless representatives.
    pub fn alphas(&self) -> Result<AlphaMatrix> {
        let psi = FiducialPreparation::ideal(self.dataset.num_qubits())?.prepare();
        alpha_estimate(&self.dataset, &psi)
    }

    pub fn kernel(&self, surface: Surface, path: EvaluationPath) -> Result<KernelMatrix> {
        let job = self.job.clone().with_path(path);
        match surface {
            Surface::Full => job.kernel_matrix(),
            Surface::Train => job.select(&self.split.train)?.kernel_matrix(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub num_qubits: usize,
    pub num_cosets: usize,
    pub trial_index: usize,
    pub empirical_variance: f64,
    pub empirical_mean: f64,
    /// Spread of the noiseless cross-coset overlaps `α_{i,j}`, `i < j`.
    pub alphas_summary: MinMeanMax,
    /// Hex trial seed; identifies the random draws.
    pub noise_draws_digest: String,
    /// Full-matrix variance predicted from this trial's `α_{i,j}`.
    pub theory_exact_variance: f64,
    /// Deviation statistics against per-pair `α`; absent when the kernel
    /// has fewer than two same-coset or cross-coset entries.
    pub noise_stats: Option<NoiseDeviationStats>,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub report: TrialReport,
    pub kernel: KernelMatrix,
}

pub fn run_trial(
    num_qubits: usize,
    num_cosets: usize,
    trial_index: usize,
    master_seed: u64,
    settings: &TrialSettings,
) -> Result<TrialOutcome> {
    let seed = trial_seed(master_seed, num_qubits, num_cosets, trial_index);
    let draws = TrialDraws::sample(num_qubits, num_cosets, seed, &settings.noise)?;
    let kernel = draws.kernel(settings.surface, settings.path)?;
    let alphas = draws.alphas()?;
    let n = draws.dataset.subgroup_size();
    let noise_stats = match theory::extract_deviation_stats_per_pair(&kernel, &alphas) {
        Ok(s) => Some(s),
        Err(Error::InsufficientEntries { .. }) => None,
        Err(e) => return Err(e),
    };
    let report = TrialReport {
        num_qubits,
        num_cosets,
        trial_index,
        empirical_variance: kernel.off_diagonal_variance(),
        empirical_mean: kernel.off_diagonal_mean(),
        alphas_summary: MinMeanMax::of(&alphas.upper()).expect("at least two cosets"),
        noise_draws_digest: format!("{seed:016x}"),
        theory_exact_variance: theory::exact_variance(num_cosets, n, &alphas)?,
        noise_stats,
    };
    Ok(TrialOutcome { report, kernel })
}

/// Statistics of one `(N, m)` configuration across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub num_qubits: usize,
    pub num_cosets: usize,
    pub trials: usize,
    pub mean_variance: f64,
    /// Population standard deviation of the trial variances.
    pub std_dev_variance: f64,
    pub mean_expectation: f64,
    /// Mean over trials of the per-pair exact variance.
    pub theory_exact: f64,
    pub theory_asymptotic: f64,
    pub theory_limit: f64,
}

impl AggregateReport {
    pub fn from_trials(trials: &[TrialReport]) -> Result<Self> {
        let first = trials.first().ok_or(Error::EmptyReport)?;
        let (n_qubits, m) = (first.num_qubits, first.num_cosets);
        if trials.iter().any(|t| t.num_qubits != n_qubits || t.num_cosets != m) {
            return Err(Error::InvalidParameter("mixed configurations in one aggregate".into()));
        }
        let var: Vec<f64> = trials.iter().map(|t| t.empirical_variance).collect();
        let means: Vec<f64> = trials.iter().map(|t| t.empirical_mean).collect();
        let exact: Vec<f64> = trials.iter().map(|t| t.theory_exact_variance).collect();
        Ok(Self {
            num_qubits: n_qubits,
            num_cosets: m,
            trials: trials.len(),
            mean_variance: stats::mean(&var),
            std_dev_variance: stats::population_std(&var),
            mean_expectation: stats::mean(&means),
            theory_exact: stats::mean(&exact),
            theory_asymptotic: theory::asymptotic_variance(m, n_qubits, n_qubits),
            theory_limit: theory::limit_variance(m),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub aggregates: Vec<AggregateReport>,
    pub trials: Vec<TrialReport>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    /// Kernel of trial 0 of the first `(N, m)` configuration.
    pub first_kernel: KernelMatrix,
}

/// Runs every `(N, m)` configuration, trials in parallel, folded in
/// trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_path(cfg, EvaluationPath::GateLevel)
}

pub fn run_experiment_with_path(cfg: &ExperimentConfig, path: EvaluationPath) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let settings = TrialSettings {
        noise: cfg.noise,
        surface: cfg.surface,
        path,
    };
    let mut aggregates = Vec::new();
    let mut trials = Vec::new();
    let mut first_kernel = None;
    for n in cfg.qubits.iter() {
        for &m in &cfg.cosets {
            let outcomes = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(n, m, t, cfg.seed, &settings))
                .collect::<Result<Vec<_>>>()?;
            let reports: Vec<TrialReport> = outcomes.iter().map(|o| o.report.clone()).collect();
            aggregates.push(AggregateReport::from_trials(&reports)?);
            if first_kernel.is_none() {
                first_kernel = outcomes.into_iter().next().map(|o| o.kernel);
            }
            trials.extend(reports);
        }
    }
    Ok(ExperimentOutcome {
        report: ExperimentReport {
            config: cfg.without_paths(),
            aggregates,
            trials,
        },
        first_kernel: first_kernel.ok_or(Error::EmptyReport)?,
    })
}
