//! Permutation test of joint independence around any of the estimators.
//!
//! The null distribution is approximated by recomputing the statistic on
//! samples whose components are independently re-shuffled, which destroys
//! all joint dependence while keeping every marginal. The one-sided p-value
//! is `(1 + #{null ≥ statistic}) / (1 + P)`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{build_plan_with_indices, draw_landmarks, n_hsic0, n_mhsic, u_hsic, v_hsic};
use crate::kernels::{resolve_all, GaussianKernel, KernelSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sample::MultiSample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    VHsic,
    NMHsic,
    NHsic0,
    UHsic,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::VHsic,
        EstimatorKind::NMHsic,
        EstimatorKind::NHsic0,
        EstimatorKind::UHsic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::VHsic => "vhsic",
            EstimatorKind::NMHsic => "nmhsic",
            EstimatorKind::NHsic0 => "nhsic0",
            EstimatorKind::UHsic => "uhsic",
        }
    }

    pub fn uses_landmarks(self) -> bool {
        matches!(self, EstimatorKind::NMHsic | EstimatorKind::NHsic0)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown estimator {s:?} (expected vhsic, nmhsic, nhsic0 or uhsic)")))
    }
}

/// Number of Nyström points as a function of `n`: `⌈c·√n⌉` or a constant,
/// clamped to `1..=n`. Written `"<c>sqrt"` or `"<int>"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NystromSchedule {
    Fixed(usize),
    Sqrt(f64),
}

impl Default for NystromSchedule {
    fn default() -> Self {
        NystromSchedule::Sqrt(2.0)
    }
}

impl NystromSchedule {
    pub fn n_prime(&self, n: usize) -> usize {
        let raw = match *self {
            NystromSchedule::Fixed(k) => k,
            NystromSchedule::Sqrt(c) => (c * (n as f64).sqrt()).ceil() as usize,
        };
        raw.clamp(1, n.max(1))
    }
}

impl FromStr for NystromSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("bad Nyström schedule {s:?} (expected e.g. \"2sqrt\" or \"64\")"));
        if let Some(c) = s.strip_suffix("sqrt") {
            let c = if c.is_empty() { 1.0 } else { c.parse::<f64>().map_err(|_| bad())? };
            if !(c > 0.0 && c.is_finite()) {
                return Err(bad());
            }
            Ok(NystromSchedule::Sqrt(c))
        } else {
            match s.parse::<usize>() {
                Ok(k) if k > 0 => Ok(NystromSchedule::Fixed(k)),
                _ => Err(bad()),
            }
        }
    }
}

impl fmt::Display for NystromSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NystromSchedule::Fixed(k) => write!(f, "{k}"),
            NystromSchedule::Sqrt(c) => write!(f, "{c}sqrt"),
        }
    }
}

/// Which rows get shuffled in each permutation round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutedComponents {
    /// Components `2..M`, each with its own permutation; component 1 fixed.
    #[default]
    AllButFirst,
    /// Only component 1.
    FirstOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub num_permutations: usize,
    pub alpha: f64,
    pub estimator: EstimatorKind,
    pub nystrom: NystromSchedule,
    pub seed: u64,
    /// Reuse the landmark rows of the observed statistic in every round
    /// instead of drawing fresh ones.
    pub freeze_plan: bool,
    pub permuted: PermutedComponents,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            num_permutations: 250,
            alpha: 0.05,
            estimator: EstimatorKind::VHsic,
            nystrom: NystromSchedule::default(),
            seed: 0,
            freeze_plan: false,
            permuted: PermutedComponents::AllButFirst,
        }
    }
}

impl TestConfig {
    pub fn new(estimator: EstimatorKind) -> Self {
        TestConfig {
            estimator,
            ..TestConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_permutations(mut self, p: usize) -> Self {
        self.num_permutations = p;
        self
    }

    pub fn with_nystrom(mut self, schedule: NystromSchedule) -> Self {
        self.nystrom = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_permutations == 0 {
            return Err(Error::invalid("num_permutations must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Signed HSIC² estimate on the observed sample.
    pub statistic: f64,
    pub null_samples: Vec<f64>,
    pub p_value: f64,
    pub reject: bool,
}

/// `(1 + #{null ≥ statistic}) / (1 + P)`.
pub fn permutation_p_value(statistic: f64, null_samples: &[f64]) -> f64 {
    let exceed = null_samples.iter().filter(|&&s| s >= statistic).count();
    (1 + exceed) as f64 / (1 + null_samples.len()) as f64
}

/// An estimator bound to resolved kernels and a landmark count.
#[derive(Clone, Debug)]
pub struct Statistic {
    pub kind: EstimatorKind,
    pub kernels: Vec<GaussianKernel>,
    pub n_prime: usize,
}

impl Statistic {
    pub fn new(kind: EstimatorKind, sample: &MultiSample, specs: &[KernelSpec], schedule: NystromSchedule) -> Result<Self> {
        check_estimator(kind, sample)?;
        Ok(Statistic {
            kind,
            kernels: resolve_all(specs, sample)?,
            n_prime: schedule.n_prime(sample.n()),
        })
    }

    /// Signed HSIC²; `landmarks` is only read by the Nyström estimators.
    pub fn eval(&self, sample: &MultiSample, landmarks: &[usize]) -> Result<f64> {
        Ok(match self.kind {
            EstimatorKind::VHsic => v_hsic(sample, &self.kernels)?.squared,
            EstimatorKind::UHsic => u_hsic(sample, &self.kernels)?,
            EstimatorKind::NMHsic => {
                let plan = build_plan_with_indices(sample, &self.kernels, landmarks.to_vec())?;
                n_mhsic(sample, &self.kernels, &plan)?.squared
            }
            EstimatorKind::NHsic0 => n_hsic0(sample, &self.kernels, landmarks)?.value.squared,
        })
    }

    /// Draws landmarks from `seed` (when needed) and evaluates.
    pub fn eval_seeded(&self, sample: &MultiSample, seed: u64) -> Result<f64> {
        let landmarks = self.landmarks(sample.n(), seed)?;
        self.eval(sample, &landmarks)
    }

    pub fn landmarks(&self, n: usize, seed: u64) -> Result<Vec<usize>> {
        if self.kind.uses_landmarks() {
            draw_landmarks(n, self.n_prime, seed)
        } else {
            Ok(Vec::new())
        }
    }
}

fn check_estimator(kind: EstimatorKind, sample: &MultiSample) -> Result<()> {
    sample.require_multi()?;
    let m = sample.num_components();
    match kind {
        EstimatorKind::NHsic0 if m != 2 => Err(Error::invalid(format!(
            "nhsic0 handles exactly 2 components, the sample has {m}"
        ))),
        EstimatorKind::UHsic if sample.n() < 2 * m => Err(Error::invalid(format!(
            "uhsic needs n >= 2M = {}, got n = {}",
            2 * m,
            sample.n()
        ))),
        _ => Ok(()),
    }
}

fn round_permutations(n: usize, m: usize, which: PermutedComponents, seed: u64) -> Vec<Option<Vec<usize>>> {
    let mut rng = rng_from_seed(seed);
    (0..m)
        .map(|c| {
            let shuffle = match which {
                PermutedComponents::AllButFirst => c > 0,
                PermutedComponents::FirstOnly => c == 0,
            };
            shuffle.then(|| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
        })
        .collect()
}

/// Runs the test. Rounds are independent given their derived seeds and run
/// in parallel; the result equals a sequential run for the same `config.seed`.
pub fn permutation_test(sample: &MultiSample, specs: &[KernelSpec], config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    if sample.n() < 2 {
        return Err(Error::invalid("a permutation test needs n >= 2"));
    }
    let stat = Statistic::new(config.estimator, sample, specs, config.nystrom)?;
    permutation_test_with(sample, &stat, config)
}

/// Same as [`permutation_test`] with the kernels already resolved.
pub fn permutation_test_with(sample: &MultiSample, stat: &Statistic, config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    let n = sample.n();
    let m = sample.num_components();
    let base_landmarks = stat.landmarks(n, derive_seed(config.seed, "plan", 0))?;
    let statistic = stat.eval(sample, &base_landmarks)?;

    let null_samples = (1..=config.num_permutations as u64)
        .into_par_iter()
        .map(|r| {
            let perms = round_permutations(n, m, config.permuted, derive_seed(config.seed, "perm", r));
            let shuffled = sample.permute_components(&perms);
            if config.freeze_plan {
                stat.eval(&shuffled, &base_landmarks)
            } else {
                stat.eval_seeded(&shuffled, derive_seed(config.seed, "plan", r))
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let p_value = permutation_p_value(statistic, &null_samples);
    Ok(TestResult {
        statistic,
        null_samples,
        p_value,
        reject: p_value <= config.alpha,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub n: usize,
    pub trials: usize,
    pub rejections: usize,
    pub power: f64,
    /// Mean wall-clock time of one full test (statistic plus null), in ms.
    pub mean_runtime_ms: f64,
}

/// Rejection rate of `config`'s test on `trials` fresh samples per `n`.
///
/// `generator(n, seed)` must be deterministic in its arguments. Trial `t` at
/// size `n` uses data seed `derive_seed(derive_seed(config.seed, "data", n), "trial", t)`
/// and a test seed derived the same way under `"test"`.
pub fn power_curve<G>(
    generator: G,
    specs: &[KernelSpec],
    config: &TestConfig,
    n_grid: &[usize],
    trials: usize,
) -> Result<Vec<PowerPoint>>
where
    G: Fn(usize, u64) -> Result<MultiSample>,
{
    config.validate()?;
    if trials == 0 {
        return Err(Error::invalid("power curve needs at least one trial"));
    }
    if n_grid.is_empty() {
        return Err(Error::invalid("power curve needs a nonempty n grid"));
    }
    n_grid
        .iter()
        .map(|&n| {
            let data_root = derive_seed(config.seed, "data", n as u64);
            let test_root = derive_seed(config.seed, "test", n as u64);
            let mut rejections = 0;
            let mut total_ms = 0.0;
            for t in 0..trials as u64 {
                let sample = generator(n, derive_seed(data_root, "trial", t))?;
                let cfg = TestConfig {
                    seed: derive_seed(test_root, "trial", t),
                    ..config.clone()
                };
                let start = Instant::now();
                let res = permutation_test(&sample, specs, &cfg)?;
                total_ms += start.elapsed().as_secs_f64() * 1e3;
                rejections += res.reject as usize;
            }
            Ok(PowerPoint {
                n,
                trials,
                rejections,
                power: rejections as f64 / trials as f64,
                mean_runtime_ms: total_ms / trials as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_extremes() {
        assert_eq!(permutation_p_value(0.1, &[0.2, 0.3, 0.1, 0.5]), 1.0);
        assert_eq!(permutation_p_value(1.0, &[0.2, 0.3, 0.1, 0.5]), 0.2);
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!("2sqrt".parse::<NystromSchedule>().unwrap(), NystromSchedule::Sqrt(2.0));
        assert_eq!("sqrt".parse::<NystromSchedule>().unwrap(), NystromSchedule::Sqrt(1.0));
        assert_eq!("64".parse::<NystromSchedule>().unwrap(), NystromSchedule::Fixed(64));
        for bad in ["", "0", "-2sqrt", "xsqrt", "1.5"] {
            assert!(bad.parse::<NystromSchedule>().is_err(), "{bad}");
        }
        assert_eq!(NystromSchedule::Sqrt(2.0).n_prime(1000), 64);
        assert_eq!(NystromSchedule::Sqrt(8.0).n_prime(1000), 253);
        assert_eq!(NystromSchedule::Fixed(500).n_prime(100), 100);
        assert_eq!(NystromSchedule::Sqrt(2.0).to_string(), "2sqrt");
    }

    #[test]
    fn estimator_names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("rff".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TestConfig::default().with_permutations(0).validate().is_err());
        let c = TestConfig {
            alpha: 1.0,
            ..TestConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn nhsic0_rejects_three_components() {
        let s = MultiSample::from_columns(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let cfg = TestConfig::new(EstimatorKind::NHsic0).with_permutations(3);
        assert!(matches!(permutation_test(&s, &[KernelSpec::default()], &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_permutation_has_two_possible_p_values() {
        let s = crate::estimators::fixtures::SyntheticSetup::Dependent.sample(30, 2).unwrap();
        for seed in 0..5 {
            let cfg = TestConfig::new(EstimatorKind::VHsic).with_permutations(1).with_seed(seed);
            let p = permutation_test(&s, &[KernelSpec::default()], &cfg).unwrap().p_value;
            assert!(p == 0.5 || p == 1.0);
        }
    }
}
