//! How the V-, U- and Nyström estimates behave as `n` grows, for two
//! independent normals and for `X₂ = X₁ + ε`.
//!
//! ```text
//! cargo run --release --example independence_convergence
//! ```

use mhsic::prelude::*;
use mhsic::rng::derive_seed;

fn main() -> Result<()> {
    let seeds = 10;
    println!("{:<12} {:>6} {:>10} {:>10} {:>10}", "setup", "n", "V-HSIC", "U-HSIC", "N-MHSIC");
    for setup in [SyntheticSetup::Independent, SyntheticSetup::Dependent] {
        for n in [100, 200, 400, 800, 1600] {
            let n_prime = NystromSchedule::default().n_prime(n);
            let (mut v, mut u, mut nys) = (0.0, 0.0, 0.0);
            for seed in 0..seeds {
                let sample = setup.sample(n, derive_seed(1, "data", seed))?;
                let kernels = resolve_all(&[KernelSpec::default()], &sample)?;
                v += v_hsic(&sample, &kernels)?.squared;
                u += u_hsic(&sample, &kernels)?;
                let plan = build_plan(&sample, &kernels, n_prime, derive_seed(1, "plan", seed))?;
                nys += n_mhsic(&sample, &kernels, &plan)?.squared;
            }
            let k = seeds as f64;
            println!(
                "{:<12} {n:>6} {:>10.2e} {:>10.2e} {:>10.2e}",
                format!("{setup:?}"),
                v / k,
                u / k,
                nys / k
            );
        }
    }
    println!("(mean HSIC² over {seeds} seeds; n' = 2⌈√n⌉)");
    Ok(())
}
