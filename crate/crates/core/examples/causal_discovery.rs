//! Ranks all 24 fully connected DAGs on four nodes for data drawn from one of
//! them, comparing the V-statistic and Nyström tests.
//!
//! ```text
//! cargo run --release --example causal_discovery -- [n] [trials] [nystrom]
//! ```

use std::time::Instant;

use mhsic::prelude::*;
use mhsic::rng::derive_seed;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(300, |s| s.parse().expect("n"));
    let trials: u64 = args.get(1).map_or(5, |s| s.parse().expect("trials"));
    let schedule: NystromSchedule = args.get(2).map_or(Ok(NystromSchedule::Sqrt(2.0)), |s| s.parse())?;

    let candidates = enumerate_full_dags(4)?;
    println!("n = {n}, {} candidates, n' = {}", candidates.len(), schedule.n_prime(n));
    for kind in [EstimatorKind::VHsic, EstimatorKind::NMHsic] {
        let mut hits = 0;
        let mut ranks = Vec::new();
        let start = Instant::now();
        for t in 0..trials {
            let truth = &candidates[(derive_seed(11, "dag", t) % 24) as usize];
            let sample = AnmModel::random(truth.clone(), derive_seed(11, "f", t))?.sample(n, derive_seed(11, "x", t))?;
            let config = DiscoveryConfig::new(
                TestConfig::new(kind).with_nystrom(schedule).with_seed(derive_seed(11, "test", t)),
            );
            let ranked = discover(&sample, &candidates, &config)?;
            let rank = ranked.iter().position(|s| &s.dag == truth).expect("truth is a candidate") + 1;
            hits += (rank == 1) as usize;
            ranks.push(rank);
        }
        println!(
            "{kind:>7}: top-1 {hits}/{trials}, ranks of the true DAG {ranks:?}, {:.1} s",
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
