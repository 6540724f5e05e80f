//! Rejection rate against sample size for `X₂ = X₁ + ε`, printed as CSV.
//!
//! ```text
//! cargo run --release --example power_curve -- [trials]
//! ```

use mhsic::prelude::*;

fn main() -> Result<()> {
    let trials: usize = std::env::args().nth(1).map_or(50, |s| s.parse().expect("trials"));
    let grid = [25, 50, 75, 100, 150, 200];
    let gen = |n: usize, seed: u64| SyntheticSetup::Dependent.sample(n, seed);
    println!("estimator,n,power,mean_runtime_ms");
    for kind in [EstimatorKind::VHsic, EstimatorKind::NMHsic, EstimatorKind::NHsic0] {
        let config = TestConfig::new(kind).with_seed(2024);
        for point in power_curve(gen, &[KernelSpec::default()], &config, &grid, trials)? {
            println!("{kind},{},{:.3},{:.2}", point.n, point.power, point.mean_runtime_ms);
        }
    }
    Ok(())
}
