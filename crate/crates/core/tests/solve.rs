mod common;

use symsolve::matrix::{laplacian_2d, random_spd};
use symsolve::solve::{backward_solve, forward_solve, relative_residual};
use symsolve::{factorize, solve, Error, FactorOptions, SparseSymMatrix};

fn diag(vals: &[f64]) -> SparseSymMatrix {
    let t: Vec<_> = vals.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
    SparseSymMatrix::from_triplets(vals.len(), &t).unwrap()
}

fn solve_with_defaults(a: &SparseSymMatrix, b: &[f64]) -> Vec<f64> {
    let f = factorize(a, &FactorOptions::default()).unwrap();
    solve(&f.factor, b).unwrap()
}

#[test]
fn identity_and_diagonal() {
    assert_eq!(solve_with_defaults(&diag(&[1.0; 3]), &[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    let x = solve_with_defaults(&diag(&[4.0, 9.0]), &[8.0, 27.0]);
    assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 3.0).abs() < 1e-15);
}

#[test]
fn laplacian_with_ones_solution() {
    let a = laplacian_2d(4, 4);
    let b = a.mul_vec(&[1.0; 16]).unwrap();
    let x = solve_with_defaults(&a, &b);
    assert!(common::rel_inf_err(&x, &[1.0; 16]) < 1e-13);
    assert!(relative_residual(&a, &x, &b).unwrap() < 1e-14);
}

#[test]
fn triangular_solves_agree_with_dense_substitution() {
    let a = random_spd(50, 3, 11);
    let f = factorize(&a, &FactorOptions::default()).unwrap().factor;
    let l = f.to_dense_lower().unwrap();
    let n = 50;
    let rhs = common::manufactured(n);
    let y = forward_solve(&f, &rhs).unwrap();
    // both solves stay in the permuted numbering
    for i in 0..n {
        let ly: f64 = (0..=i).map(|k| l.get(i, k) * y[k]).sum();
        assert!((ly - rhs[i]).abs() < 1e-12, "row {i}");
    }
    let z = backward_solve(&f, &y).unwrap();
    for i in 0..n {
        let ltz: f64 = (i..n).map(|k| l.get(k, i) * z[k]).sum();
        assert!((ltz - y[i]).abs() < 1e-12, "row {i}");
    }
}

#[test]
fn wrong_rhs_length_is_rejected() {
    let f = factorize(&laplacian_2d(3, 3), &FactorOptions::default()).unwrap();
    assert_eq!(solve(&f.factor, &[1.0; 8]), Err(Error::DimensionMismatch { expected: 9, got: 8 }));
}
