//! Read a Matrix Market file (or write a sample one first), factor it and report.
//!
//! cargo run --example matrix_market -- path/to/matrix.mtx

use std::path::PathBuf;

use symsolve::matrix::{laplacian_2d, load_matrix_market, write_matrix_market};
use symsolve::{factorize, FactorOptions};

fn main() -> symsolve::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("symsolve_sample.mtx");
            write_matrix_market(&laplacian_2d(10, 10), &p)?;
            println!("no file given, wrote {}", p.display());
            p
        }
    };
    let mm = load_matrix_market(&path)?;
    if mm.missing_diagonal() {
        println!("inserted zero diagonals at {:?}", mm.inserted_diagonals);
    }
    let a = mm.matrix;
    println!("n = {}, declared entries = {}, stored lower entries = {}", a.n(), mm.declared_entries, a.nnz());
    let f = factorize(&a, &FactorOptions::default())?;
    println!("nnz(L) = {}, residual {:.2e}", f.factor.nnz(), f.factor.residual(&a)?);
    Ok(())
}
