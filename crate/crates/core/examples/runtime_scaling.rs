//! Wall-clock cost of the quadratic V-statistic against the Nyström
//! estimator as `n` doubles, for `M` scalar components (default 3).
//! Each entry is the median of five runs.

use std::time::Instant;

use mhsic::prelude::*;

fn median_ms(mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..5)
        .map(|_| {
            let s = Instant::now();
            f();
            s.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[2]
}

fn main() -> Result<()> {
    let m: usize = std::env::args().nth(1).map_or(3, |s| s.parse().expect("M"));
    println!("{:>6} {:>6} {:>12} {:>12} {:>8}", "n", "n'", "V-HSIC ms", "N-MHSIC ms", "speedup");
    for n in [500, 1000, 2000, 4000, 8000] {
        let sample = generate(&GeneratorSpec::new(GeneratorKind::IndepGaussians { m, d: 1 }, n, 1))?;
        let kernels = resolve_all(&[KernelSpec::default()], &sample)?;
        let n_prime = NystromSchedule::default().n_prime(n);
        let v = median_ms(|| {
            v_hsic(&sample, &kernels).unwrap();
        });
        let nys = median_ms(|| {
            let plan = build_plan(&sample, &kernels, n_prime, 7).unwrap();
            n_mhsic(&sample, &kernels, &plan).unwrap();
        });
        println!("{n:>6} {n_prime:>6} {v:>12.2} {nys:>12.2} {:>7.1}x", v / nys);
    }
    Ok(())
}
