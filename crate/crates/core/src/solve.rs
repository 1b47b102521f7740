//! Triangular solves with a gathered supernodal factor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernels::Panel;
use crate::matrix::{oracle_cap, permute_symmetric, DenseLower, Permutation, SparseSymMatrix};
use crate::symbolic::SymbolicFactor;

/// `P A Pᵀ = L Lᵀ` with `L` stored as one factored panel per supernode.
#[derive(Debug, Clone)]
pub struct FactorResult {
    pub sf: SymbolicFactor,
    pub panels: Vec<Panel>,
    /// Composed ordering and postorder, new→old.
    pub perm: Permutation,
}

impl FactorResult {
    pub fn n(&self) -> usize {
        self.sf.n()
    }

    /// Stored nonzeros of `L`.
    pub fn nnz(&self) -> usize {
        self.panels.iter().map(|p| (0..p.width).map(|c| p.m() - c).sum::<usize>()).sum()
    }

    /// `L` as a dense column-major matrix (in the permuted numbering).
    pub fn to_dense_lower(&self) -> Result<DenseLower> {
        let n = self.n();
        let cap = oracle_cap();
        if n > cap {
            return Err(Error::OracleCap { n, cap });
        }
        let mut l = vec![0.0; n * n];
        for p in &self.panels {
            for c in 0..p.width {
                let col = p.first_col + c;
                for r in c..p.m() {
                    l[p.rows[r] + col * n] = p.get(r, c);
                }
            }
        }
        Ok(DenseLower { n, l })
    }

    /// `‖P A Pᵀ − L Lᵀ‖_F / ‖A‖_F`, without densifying.
    pub fn residual(&self, a: &SparseSymMatrix) -> Result<f64> {
        check_dim(self.n(), a.n())?;
        let b = permute_symmetric(a, &self.perm)?;
        let mut llt: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for p in &self.panels {
            for c in 0..p.width {
                for s in c..p.m() {
                    let lsc = p.get(s, c);
                    for r in s..p.m() {
                        *llt.entry((p.rows[s], p.rows[r])).or_insert(0.0) += p.get(r, c) * lsc;
                    }
                }
            }
        }
        for j in 0..b.n() {
            for (&i, &v) in b.col_rows(j).iter().zip(b.col_values(j)) {
                *llt.entry((j, i)).or_insert(0.0) -= v;
            }
        }
        let diff: f64 = llt.iter().map(|(&(j, i), v)| if i == j { v * v } else { 2.0 * v * v }).sum();
        let norm = a.frobenius_norm();
        Ok(if norm == 0.0 { diff.sqrt() } else { diff.sqrt() / norm })
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Solves `L y = rhs` in place order (permuted numbering).
pub fn forward_solve(f: &FactorResult, rhs: &[f64]) -> Result<Vec<f64>> {
    check_dim(f.n(), rhs.len())?;
    let mut y = rhs.to_vec();
    for p in &f.panels {
        for c in 0..p.width {
            let col = p.first_col + c;
            y[col] /= p.get(c, c);
            let yc = y[col];
            for r in c + 1..p.m() {
                y[p.rows[r]] -= p.get(r, c) * yc;
            }
        }
    }
    Ok(y)
}

/// Solves `Lᵀ z = rhs` (permuted numbering).
pub fn backward_solve(f: &FactorResult, rhs: &[f64]) -> Result<Vec<f64>> {
    check_dim(f.n(), rhs.len())?;
    let mut z = rhs.to_vec();
    for p in f.panels.iter().rev() {
        for c in (0..p.width).rev() {
            let col = p.first_col + c;
            let mut s = z[col];
            for r in c + 1..p.m() {
                s -= p.get(r, c) * z[p.rows[r]];
            }
            z[col] = s / p.get(c, c);
        }
    }
    Ok(z)
}

/// Solves `A x = b` given the factor of `P A Pᵀ`.
pub fn solve(f: &FactorResult, b: &[f64]) -> Result<Vec<f64>> {
    check_dim(f.n(), b.len())?;
    let y = forward_solve(f, &f.perm.apply(b))?;
    let z = backward_solve(f, &y)?;
    Ok(f.perm.apply_inverse(&z))
}

/// `‖A x − b‖₂ / ‖b‖₂`.
pub fn relative_residual(a: &SparseSymMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.n(), b.len())?;
    let ax = a.mul_vec(x)?;
    let num: f64 = ax.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(if den == 0.0 { num } else { num / den })
}
