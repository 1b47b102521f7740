//! Median simulated makespan of each protocol/schedule pair under perturbed task times.
//!
//! cargo run --release --example scheduling_makespan

use symsolve::matrix::laplacian_2d;
use symsolve::ordering::Ordering;
use symsolve::pipeline::factorize_analyzed;
use symsolve::symbolic::MAX_SUPERNODE_WIDTH;
use symsolve::{analyze, MapKind, Protocol, RunConfig, Schedule};

fn main() -> symsolve::Result<()> {
    let an = analyze(&laplacian_2d(16, 16), &Ordering::MinimumDegree, MAX_SUPERNODE_WIDTH)?;
    let variants = [
        (Protocol::PushOrdered, Schedule::Static),
        (Protocol::Pull, Schedule::Static),
        (Protocol::Pull, Schedule::Dynamic),
    ];
    for (proto, sched) in variants {
        let mut times = Vec::new();
        for seed in 0..20 {
            let cfg = RunConfig::new(8, MapKind::FanBoth, proto, sched).with_seed(seed).with_perturbation(0.5);
            times.push(factorize_analyzed(&an, &cfg)?.stats.makespan);
        }
        times.sort_by(f64::total_cmp);
        let median = (times[9] + times[10]) / 2.0;
        println!("{:>12} {:>8}: median {median:>9.0}  min {:>9.0}  max {:>9.0}", proto.to_string(), sched.to_string(), times[0], times[19]);
    }
    Ok(())
}
