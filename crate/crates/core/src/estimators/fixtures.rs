//! Ground-truth fixtures for the two-component synthetic setups used in
//! convergence and power checks.

use crate::data::{generate, GeneratorKind, GeneratorSpec};
use crate::error::Result;
use crate::sample::MultiSample;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SyntheticSetup {
    /// `X₁, X₂` i.i.d. `N(0, 1)`.
    Independent,
    /// `X₁ ~ N(0, 1)`, `X₂ = X₁ + ε`, `ε ~ N(0, 1)`.
    Dependent,
}

impl SyntheticSetup {
    /// Whether the population HSIC is exactly zero (true iff the components
    /// are independent; the Gaussian kernel is characteristic).
    pub fn population_hsic_is_zero(self) -> bool {
        matches!(self, SyntheticSetup::Independent)
    }

    /// Analytic population HSIC where known.
    pub fn population_hsic(self) -> Option<f64> {
        self.population_hsic_is_zero().then_some(0.0)
    }

    pub fn generator(self, n: usize, seed: u64) -> GeneratorSpec {
        let kind = match self {
            SyntheticSetup::Independent => GeneratorKind::IndepGaussians { m: 2, d: 1 },
            SyntheticSetup::Dependent => GeneratorKind::LinearDependent { noise_sd: 1.0 },
        };
        GeneratorSpec::new(kind, n, seed)
    }

    pub fn sample(self, n: usize, seed: u64) -> Result<MultiSample> {
        generate(&self.generator(n, seed))
    }
}
