//! Where updates run under each computation map, and what that does to traffic.
//!
//! cargo run --example computation_maps

use symsolve::mapping::{map_value, owner_of_task};
use symsolve::matrix::laplacian_2d;
use symsolve::ordering::Ordering;
use symsolve::pipeline::factorize_analyzed;
use symsolve::symbolic::MAX_SUPERNODE_WIDTH;
use symsolve::{analyze, ComputationMap, MapKind, Protocol, RunConfig, Schedule, TaskId};

fn main() -> symsolve::Result<()> {
    let p = 4;
    for kind in MapKind::ALL {
        let m = ComputationMap::new(kind, p);
        println!("{kind} map, P={p} (row i, column j):");
        for i in 0..8 {
            let row: Vec<String> = (0..8).map(|j| map_value(&m, i, j).to_string()).collect();
            println!("    {}", row.join(" "));
        }
        println!("    U(1,6) runs on rank {}", owner_of_task(&TaskId::update(1, 6), &m));
    }

    let an = analyze(&laplacian_2d(12, 12), &Ordering::MinimumDegree, MAX_SUPERNODE_WIDTH)?;
    println!("\nlap2d 12x12 on {p} ranks:");
    println!("{:>8} {:>9} {:>10} {:>9} {:>10}", "map", "factor", "bytes", "aggr", "bytes");
    for kind in MapKind::ALL {
        let s = factorize_analyzed(&an, &RunConfig::new(p, kind, Protocol::Pull, Schedule::Dynamic))?.stats;
        println!(
            "{:>8} {:>9} {:>10} {:>9} {:>10}",
            kind.to_string(), s.messages.factor, s.bytes.factor, s.messages.aggregate, s.bytes.aggregate
        );
    }
    Ok(())
}
