//! Kernel tests of joint independence for `M ≥ 2` random variables.
//!
//! The main estimator is the Nyström M-HSIC ([`estimators::n_mhsic`]), which
//! approximates the HSIC of `M` components from `n′ ≪ n` landmark rows. The
//! quadratic-time V- and U-statistics and a two-component Nyström baseline
//! are included for comparison. [`testing`] wraps any estimator in a
//! permutation test and [`causal`] uses that test to rank candidate DAGs
//! under an additive noise model.
//!
//! ```
//! use mhsic::prelude::*;
//!
//! let sample = SyntheticSetup::Dependent.sample(200, 7)?;
//! let config = TestConfig::new(EstimatorKind::NMHsic).with_seed(1);
//! let result = permutation_test(&sample, &[KernelSpec::default()], &config)?;
//! assert!(result.reject);
//! # Ok::<(), mhsic::Error>(())
//! ```

pub mod causal;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod linalg;
pub mod rng;
pub mod sample;
pub mod testing;

pub use error::{Error, Result};

/// The names most programs need.
pub mod prelude {
    pub use crate::causal::{discover, enumerate_dags, enumerate_full_dags, AnmModel, Dag, DagScore, DiscoveryConfig};
    pub use crate::data::{generate, load_csv, CsvSchema, GeneratorKind, GeneratorSpec};
    pub use crate::error::{Error, Result};
    pub use crate::estimators::fixtures::SyntheticSetup;
    pub use crate::estimators::{build_plan, n_hsic0, n_mhsic, u_hsic, v_hsic, HsicValue, NystromPlan};
    pub use crate::kernels::{resolve_all, Bandwidth, GaussianKernel, KernelSpec};
    pub use crate::sample::{ComponentSample, MultiSample};
    pub use crate::testing::{
        permutation_test, power_curve, EstimatorKind, NystromSchedule, TestConfig, TestResult,
    };
}
