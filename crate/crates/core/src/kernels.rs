//! Dense supernodal kernels: panel factorization, update computation into
//! aggregate vectors, accumulation and application.
//!
//! Aggregates store the negated update so applying one is plain addition.

use crate::error::{Error, Result};
use crate::matrix::SparseSymMatrix;
use crate::symbolic::SymbolicFactor;

/// The columns of one supernode with their full row structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub snode: usize,
    pub first_col: usize,
    pub width: usize,
    /// Global row indices; the first `width` are the diagonal block.
    pub rows: Vec<usize>,
    /// `rows.len() × width`, column-major.
    pub data: Vec<f64>,
}

impl Panel {
    pub fn zeros(snode: usize, first_col: usize, width: usize, rows: Vec<usize>) -> Self {
        let m = rows.len();
        Self { snode, first_col, width, rows, data: vec![0.0; m * width] }
    }

    /// Gathers the entries of `a` belonging to supernode `s`.
    pub fn from_matrix(a: &SparseSymMatrix, sf: &SymbolicFactor, s: usize) -> Result<Self> {
        let sn = sf.snodes[s];
        let mut p = Panel::zeros(s, sn.first, sn.width(), sf.sn_rows[s].clone());
        for c in sn.first..sn.end {
            for (&i, &v) in a.col_rows(c).iter().zip(a.col_values(c)) {
                let r = p.position(i).ok_or_else(|| {
                    Error::Structure(format!("entry ({i}, {c}) missing from supernode {s}"))
                })?;
                let m = p.m();
                p.data[r + (c - sn.first) * m] = v;
            }
        }
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + c * self.m()]
    }

    pub fn position(&self, row: usize) -> Option<usize> {
        self.rows.binary_search(&row).ok()
    }

    /// Payload size in bytes: 8-byte values plus 4-byte row indices.
    pub fn bytes(&self) -> usize {
        panel_bytes(self.m(), self.width)
    }
}

pub fn panel_bytes(m: usize, width: usize) -> usize {
    8 * m * width + 4 * m
}

/// Update contributions destined for one target supernode.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateVector {
    /// Producing supernode for a single update, producing rank once accumulated.
    pub src: usize,
    pub tgt: usize,
    pub tgt_first_col: usize,
    pub width: usize,
    pub rows: Vec<usize>,
    /// `rows.len() × width`, column-major.
    pub data: Vec<f64>,
}

impl AggregateVector {
    pub fn zeros(src: usize, tgt: usize, tgt_first_col: usize, width: usize, rows: Vec<usize>) -> Self {
        let m = rows.len();
        Self { src, tgt, tgt_first_col, width, rows, data: vec![0.0; m * width] }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + c * self.m()]
    }

    pub fn bytes(&self) -> usize {
        panel_bytes(self.m(), self.width)
    }
}

/// In-place dense Cholesky of the diagonal block followed by the triangular
/// solve of the rows below it, column by column, left to right.
pub fn factor_panel(p: &mut Panel) -> Result<()> {
    let m = p.m();
    let w = p.width;
    let d = &mut p.data;
    for k in 0..w {
        let pivot = d[k + k * m];
        if pivot <= 0.0 || pivot.is_nan() {
            return Err(Error::NotPositiveDefinite(p.first_col + k));
        }
        let lkk = pivot.sqrt();
        d[k + k * m] = lkk;
        for r in k + 1..m {
            d[r + k * m] /= lkk;
        }
        for c in k + 1..w {
            let lck = d[c + k * m];
            if lck == 0.0 {
                continue;
            }
            for r in c..m {
                d[r + c * m] -= d[r + k * m] * lck;
            }
        }
    }
    Ok(())
}

/// Negated update of a factored source panel onto the target column block
/// `[tgt_first_col, tgt_first_col + tgt_width)`. Output rows are the source
/// rows at or below the block; each must belong to `tgt_rows`.
pub fn compute_update(
    src: &Panel,
    tgt: usize,
    tgt_first_col: usize,
    tgt_width: usize,
    tgt_rows: &[usize],
) -> Result<AggregateVector> {
    let start = src.rows.partition_point(|&r| r < tgt_first_col);
    let block_end = src.rows.partition_point(|&r| r < tgt_first_col + tgt_width);
    if block_end == start {
        return Err(Error::Structure(format!(
            "supernode {} has no rows in the column block of supernode {tgt}",
            src.snode
        )));
    }
    let out_rows = src.rows[start..].to_vec();
    if let Some(&bad) = out_rows.iter().find(|r| tgt_rows.binary_search(r).is_err()) {
        return Err(Error::Structure(format!(
            "row {bad} of supernode {} is absent from supernode {tgt}",
            src.snode
        )));
    }
    let m = src.m();
    let om = out_rows.len();
    let mut out = AggregateVector::zeros(src.snode, tgt, tgt_first_col, tgt_width, out_rows);
    for bc in start..block_end {
        let col = src.rows[bc] - tgt_first_col;
        // rows at or below the diagonal of this target column
        for br in bc..m {
            let mut s = 0.0;
            for w in 0..src.width {
                s += src.data[br + w * m] * src.data[bc + w * m];
            }
            out.data[(br - start) + col * om] = -s;
        }
    }
    Ok(out)
}

/// Adds `t` into `acc` at matching rows.
pub fn accumulate(acc: &mut AggregateVector, t: &AggregateVector) -> Result<()> {
    if acc.tgt != t.tgt || acc.width != t.width {
        return Err(Error::Structure(format!(
            "aggregate for supernode {} cannot absorb one for supernode {}",
            acc.tgt, t.tgt
        )));
    }
    let map = relative_positions(&t.rows, &acc.rows).ok_or_else(|| {
        Error::Structure(format!("aggregate rows for supernode {} are not a subset", t.tgt))
    })?;
    let (am, tm) = (acc.m(), t.m());
    for c in 0..t.width {
        for (r, &pos) in map.iter().enumerate() {
            acc.data[pos + c * am] += t.data[r + c * tm];
        }
    }
    Ok(())
}

/// Applies aggregates to an unfactored panel in ascending `src` order.
pub fn apply_aggregates(p: &mut Panel, aggs: &[AggregateVector]) -> Result<()> {
    let mut order: Vec<&AggregateVector> = aggs.iter().collect();
    order.sort_by_key(|a| a.src);
    let m = p.m();
    for a in order {
        if a.tgt != p.snode || a.width != p.width {
            return Err(Error::Structure(format!(
                "aggregate for supernode {} applied to supernode {}",
                a.tgt, p.snode
            )));
        }
        let map = relative_positions(&a.rows, &p.rows).ok_or_else(|| {
            Error::Structure(format!("aggregate rows not found in supernode {}", p.snode))
        })?;
        let am = a.m();
        for c in 0..a.width {
            for (r, &pos) in map.iter().enumerate() {
                p.data[pos + c * m] += a.data[r + c * am];
            }
        }
    }
    Ok(())
}

/// Position of every element of sorted `sub` within sorted `sup`.
fn relative_positions(sub: &[usize], sup: &[usize]) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(sub.len());
    let mut k = 0;
    for &r in sub {
        while k < sup.len() && sup[k] < r {
            k += 1;
        }
        if k == sup.len() || sup[k] != r {
            return None;
        }
        out.push(k);
    }
    Some(out)
}

/// Operation counts used by the runtime cost model.
pub fn factor_flops(m: usize, w: usize) -> f64 {
    (0..w).map(|k| {
        let below = (m - k - 1) as f64;
        below + 2.0 * below * (w - k - 1) as f64 + 1.0
    })
    .sum()
}

pub fn update_flops(out_rows: usize, block_rows: usize, src_width: usize) -> f64 {
    2.0 * out_rows as f64 * block_rows as f64 * src_width as f64
}

pub fn apply_flops(rows: usize, width: usize) -> f64 {
    (rows * width) as f64
}
