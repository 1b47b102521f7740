//! Ordering and symbolic analysis of a 2D Laplacian.
//!
//! cargo run --example analyze_laplacian -- 20

use symsolve::matrix::laplacian_2d;
use symsolve::ordering::Ordering;
use symsolve::symbolic::MAX_SUPERNODE_WIDTH;
use symsolve::analyze;

fn main() -> symsolve::Result<()> {
    let k: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let a = laplacian_2d(k, k);
    for (name, ord) in [("natural", Ordering::Natural), ("minimum degree", Ordering::MinimumDegree)] {
        let an = analyze(&a, &ord, MAX_SUPERNODE_WIDTH)?;
        let r = an.report(4);
        println!("{name}: n={} nnz(A)={} nnz(L)={} fill={} flops={} supernodes={}", r.n, r.nnz_a, r.nnz_l, r.fill, r.flops, r.supernodes);
        for (w, count) in &r.width_histogram {
            println!("    width <= {w:>3}: {count}");
        }
    }
    Ok(())
}
