//! Eager push with one send slot deadlocks on the fixture tree; ordered push and pull do not.
//!
//! cargo run --example deadlock_demo -- 3

use symsolve::runtime::{deadlock_fixture, simulate};
use symsolve::{MapKind, Protocol, RunConfig, Schedule};

fn main() -> symsolve::Result<()> {
    let p: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let g = deadlock_fixture(p);
    println!("fixture: {} tasks, {} messages, {p} ranks", g.tasks.len(), g.messages.len());
    for proto in [Protocol::Push, Protocol::PushOrdered, Protocol::Pull] {
        let cfg = RunConfig::new(p, MapKind::FanBoth, proto, Schedule::Static).with_slots(1, 1);
        let s = simulate(&g, None, &cfg)?.stats;
        match &s.deadlock {
            Some(cycle) => println!("{:>12}: deadlock, ranks {cycle:?} wait on each other ({} of {} tasks ran)", proto.to_string(), s.tasks_executed, g.tasks.len()),
            None => println!("{:>12}: finished at t={:.0}", proto.to_string(), s.makespan),
        }
    }
    Ok(())
}
