//! HSIC estimators.
//!
//! | estimator | function | cost |
//! |-----------|----------|------|
//! | V-statistic, any `M >= 2` | [`v_hsic`] | `O(M n²)` |
//! | V-statistic trace form, `M = 2` | [`v_hsic_trace2`] | `O(n²)` |
//! | U-statistic | [`u_hsic`] | `O(n²)` for `M = 2` |
//! | Nyström M-HSIC | [`build_plan`] + [`n_mhsic`] | `O(M n′³ + M n′ n)` |
//! | two-component Nyström baseline | [`n_hsic0`] | `O(n′³ + n n′²)` |
//!
//! All estimators take resolved kernels, one per component (see
//! [`crate::kernels::resolve_all`]).

mod baseline;
pub mod fixtures;
mod nystrom;
mod ustat;
mod vstat;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::GaussianKernel;
use crate::sample::MultiSample;

pub use baseline::{n_hsic0, n_hsic0_expanded, nystrom_gram, BaselineHsic};
pub use nystrom::{
    build_plan, build_plan_with_indices, draw_landmarks, n_mhsic, n_mhsic_terms, nystrom_weights, NystromPlan,
    NystromTerms,
};
pub use ustat::{u_hsic, MAX_ENUMERATED_TUPLES};
pub use vstat::{centered_trace, v_hsic, v_hsic_trace2};

/// An HSIC² estimate together with `sqrt(max(squared, 0))`.
///
/// `squared` keeps its sign: U-statistics and round-off can push it below 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsicValue {
    pub squared: f64,
    pub value: f64,
}

impl HsicValue {
    pub fn from_squared(squared: f64) -> Self {
        HsicValue {
            squared,
            value: squared.max(0.0).sqrt(),
        }
    }
}

pub(crate) fn check_kernels(sample: &MultiSample, kernels: &[GaussianKernel]) -> Result<()> {
    if kernels.len() != sample.num_components() {
        return Err(Error::invalid(format!(
            "{} kernels supplied for {} components",
            kernels.len(),
            sample.num_components()
        )));
    }
    Ok(())
}
