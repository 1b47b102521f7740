//! Factor a random sparse SPD matrix on 4 simulated ranks and solve with it.
//!
//! cargo run --example factor_and_solve

use symsolve::matrix::random_spd;
use symsolve::solve::relative_residual;
use symsolve::{factorize, solve, FactorOptions, MapKind, Protocol, RunConfig, Schedule};

fn main() -> symsolve::Result<()> {
    let a = random_spd(400, 4, 42);
    let x_true: Vec<f64> = (0..a.n()).map(|i| (i as f64).cos()).collect();
    let b = a.mul_vec(&x_true)?;

    let run = RunConfig::new(4, MapKind::FanBoth, Protocol::Pull, Schedule::Dynamic);
    let f = factorize(&a, &FactorOptions::with_run(run))?;
    let x = solve(&f.factor, &b)?;

    let err = x.iter().zip(&x_true).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    println!("n = {}, nnz(L) = {}", a.n(), f.factor.nnz());
    println!("factor residual   {:.2e}", f.factor.residual(&a)?);
    println!("solve residual    {:.2e}", relative_residual(&a, &x, &b)?);
    println!("max error         {err:.2e}");
    println!("simulated makespan {:.0}", f.stats.makespan);
    Ok(())
}
