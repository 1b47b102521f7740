#![allow(dead_code)]

use symsolve::matrix::{arrow, laplacian_2d, random_spd, SparseSymMatrix};

/// Laplacians k = 2..12, arrow matrices and 20 seeded diagonally dominant randoms.
pub fn corpus() -> Vec<(String, SparseSymMatrix)> {
    let mut v = Vec::new();
    for k in 2..=12 {
        v.push((format!("lap2d {k}x{k}"), laplacian_2d(k, k)));
    }
    for n in [5, 20, 60] {
        for last in [true, false] {
            v.push((format!("arrow {n} center_last={last}"), arrow(n, last)));
        }
    }
    for seed in 0..20u64 {
        let n = 20 + 14 * seed as usize;
        v.push((format!("random n={n} seed={seed}"), random_spd(n, 3, seed)));
    }
    v
}

/// Structure of L computed by plain boolean Gaussian elimination.
pub struct BoolOracle {
    pub lstruct: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    pub colcount: Vec<usize>,
    /// `[first, end)` column ranges.
    pub snodes: Vec<(usize, usize)>,
}

pub fn bool_oracle(a: &SparseSymMatrix, max_width: usize) -> BoolOracle {
    let n = a.n();
    let mut nz = vec![vec![false; n]; n];
    for j in 0..n {
        for &i in a.col_rows(j) {
            nz[i][j] = true;
            nz[j][i] = true;
        }
    }
    for k in 0..n {
        let below: Vec<usize> = (k + 1..n).filter(|&i| nz[i][k]).collect();
        for &i in &below {
            for &j in &below {
                nz[i][j] = true;
            }
        }
    }
    let lstruct: Vec<Vec<usize>> = (0..n).map(|j| (j..n).filter(|&i| i == j || nz[i][j]).collect()).collect();
    let parent = lstruct.iter().map(|s| s.get(1).copied()).collect();
    let colcount = lstruct.iter().map(Vec::len).collect();
    // column j joins j-1 when it has exactly the structure of j-1 below the diagonal
    let mut snodes = Vec::new();
    let mut first = 0;
    for j in 1..=n {
        let joins = j < n && lstruct[j - 1][1..] == lstruct[j][..] && j - first < max_width;
        if !joins {
            snodes.push((first, j));
            first = j;
        }
    }
    BoolOracle { lstruct, parent, colcount, snodes }
}

/// Known solution with entries of varying size and sign.
pub fn manufactured(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin() * (1.0 + i as f64 / n as f64)).collect()
}

pub fn rel_inf_err(x: &[f64], x0: &[f64]) -> f64 {
    let num = x.iter().zip(x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = x0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    num / den
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
