//! Symmetric sparse matrices: storage, generators, Matrix Market ingestion,
//! symmetric permutation and the dense reference factorization.
//!
//! Only the lower triangle is stored, in compressed-column form, with an
//! explicit diagonal entry at the head of every column.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default largest order accepted by [`to_dense`].
pub const DEFAULT_ORACLE_CAP: usize = 2000;

/// Environment variable overriding [`DEFAULT_ORACLE_CAP`].
pub const ORACLE_CAP_ENV: &str = "SYMSOLVE_ORACLE_CAP";

/// Lower-triangular compressed-column store of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds a matrix from raw compressed-column arrays, checking every invariant.
    pub fn from_parts(
        n: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != n + 1 {
            return Err(Error::InvalidMatrix(format!(
                "col_ptr has length {}, expected {}",
                col_ptr.len(),
                n + 1
            )));
        }
        if col_ptr[0] != 0 || col_ptr[n] != row_idx.len() || row_idx.len() != values.len() {
            return Err(Error::InvalidMatrix("inconsistent array lengths".into()));
        }
        for j in 0..n {
            let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
            if hi < lo {
                return Err(Error::InvalidMatrix(format!("col_ptr decreases at {j}")));
            }
            if hi == lo || row_idx[lo] != j {
                return Err(Error::InvalidMatrix(format!("column {j} lacks its diagonal")));
            }
            for w in row_idx[lo..hi].windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::InvalidMatrix(format!(
                        "rows of column {j} not strictly increasing"
                    )));
                }
            }
            if row_idx[hi - 1] >= n {
                return Err(Error::IndexOutOfRange { row: row_idx[hi - 1], col: j, n });
            }
        }
        Ok(Self { n, col_ptr, row_idx, values })
    }

    /// Builds a matrix from `(row, col, value)` triplets. Entries above the
    /// diagonal are mirrored, duplicates are summed and absent diagonals are
    /// inserted as explicit zeros.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut cols: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { row: i, col: j, n });
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            *cols[c].entry(r).or_insert(0.0) += v;
        }
        Ok(Self::from_columns(cols))
    }

    fn from_columns(mut cols: Vec<BTreeMap<usize, f64>>) -> Self {
        let n = cols.len();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for (j, col) in cols.iter_mut().enumerate() {
            col.entry(j).or_insert(0.0);
            for (&r, &v) in col.iter() {
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self { n, col_ptr, row_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored (lower-triangular) entries.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Nonzero count of the full symmetric matrix, both triangles.
    pub fn nnz_full(&self) -> usize {
        2 * self.nnz() - self.n
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices of column `j` (diagonal first).
    pub fn col_rows(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn col_values(&self, j: usize) -> &[f64] {
        &self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Entry `(i, j)` of the symmetric matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        match self.col_rows(c).binary_search(&r) {
            Ok(k) => self.col_values(c)[k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x` using both triangles.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for (&i, &v) in self.col_rows(j).iter().zip(self.col_values(j)) {
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        Ok(y)
    }

    /// Frobenius norm of the full symmetric matrix.
    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for (&i, &v) in self.col_rows(j).iter().zip(self.col_values(j)) {
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }
}

/// Symmetric permutation stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
    iperm: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), iperm: (0..n).collect() }
    }

    /// Builds a permutation from its new→old array.
    pub fn from_new_to_old(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut iperm = vec![usize::MAX; n];
        for (k, &old) in perm.iter().enumerate() {
            if old >= n {
                return Err(Error::InvalidPermutation(format!("index {old} out of range")));
            }
            if iperm[old] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("index {old} repeated")));
            }
            iperm[old] = k;
        }
        Ok(Self { perm, iperm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// new → old.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// old → new.
    pub fn iperm(&self) -> &[usize] {
        &self.iperm
    }

    pub fn inverse(&self) -> Self {
        Self { perm: self.iperm.clone(), iperm: self.perm.clone() }
    }

    /// Applies `self` first, then `then` (both new→old, `then` indexes the
    /// result of `self`): result new→old is `self.perm[then.perm[k]]`.
    pub fn then(&self, then: &Permutation) -> Result<Self> {
        if then.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: then.len() });
        }
        Self::from_new_to_old(then.perm.iter().map(|&k| self.perm[k]).collect())
    }

    /// `out[k] = x[perm[k]]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&old| x[old]).collect()
    }

    /// `out[perm[k]] = x[k]`.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (k, &old) in self.perm.iter().enumerate() {
            out[old] = x[k];
        }
        out
    }

    /// Reads one 0-based index per line (new→old). Blank lines are ignored.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut perm = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            perm.push(t.parse::<usize>().map_err(|e| Error::Parse {
                line: ln + 1,
                msg: e.to_string(),
            })?);
        }
        Self::from_new_to_old(perm)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = String::with_capacity(self.len() * 6);
        for p in &self.perm {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Dense symmetric matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    n: usize,
    a: Vec<f64>,
}

impl DenseSym {
    pub fn from_col_major(n: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        for j in 0..n {
            for i in j + 1..n {
                if a[i + j * n] != a[j + i * n] {
                    return Err(Error::InvalidMatrix(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i + j * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }
}

/// Dense lower-triangular factor returned by [`dense_cholesky`], column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLower {
    pub n: usize,
    pub l: Vec<f64>,
}

impl DenseLower {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i + j * self.n]
    }
}

/// Oracle size cap, honouring `SYMSOLVE_ORACLE_CAP`.
pub fn oracle_cap() -> usize {
    std::env::var(ORACLE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_CAP)
}

pub fn to_dense(a: &SparseSymMatrix) -> Result<DenseSym> {
    to_dense_capped(a, oracle_cap())
}

pub fn to_dense_capped(a: &SparseSymMatrix, cap: usize) -> Result<DenseSym> {
    let n = a.n();
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    let mut d = vec![0.0; n * n];
    for j in 0..n {
        for (&i, &v) in a.col_rows(j).iter().zip(a.col_values(j)) {
            d[i + j * n] = v;
            d[j + i * n] = v;
        }
    }
    Ok(DenseSym { n, a: d })
}

/// Right-looking column Cholesky, in the textbook loop order: scale column
/// `j`, then subtract its outer product from every trailing column.
pub fn dense_cholesky(d: &DenseSym) -> Result<DenseLower> {
    let n = d.n;
    let mut a = d.a.clone();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let ajj = a[j + j * n];
        if ajj <= 0.0 || ajj.is_nan() {
            return Err(Error::NotPositiveDefinite(j));
        }
        let ljj = ajj.sqrt();
        l[j + j * n] = ljj;
        for i in j + 1..n {
            l[i + j * n] = a[i + j * n] / ljj;
        }
        for k in j + 1..n {
            let lkj = l[k + j * n];
            for i in k..n {
                a[i + k * n] -= l[i + j * n] * lkj;
            }
        }
    }
    Ok(DenseLower { n, l })
}

/// B with `B(iperm[i], iperm[j]) = A(i, j)`, returned in canonical lower form.
pub fn permute_symmetric(a: &SparseSymMatrix, p: &Permutation) -> Result<SparseSymMatrix> {
    let n = a.n();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let ip = p.iperm();
    let mut counts = vec![0usize; n];
    for j in 0..n {
        for &i in a.col_rows(j) {
            counts[ip[i].min(ip[j])] += 1;
        }
    }
    let mut col_ptr = vec![0usize; n + 1];
    for j in 0..n {
        col_ptr[j + 1] = col_ptr[j] + counts[j];
    }
    let mut next = col_ptr.clone();
    let mut row_idx = vec![0usize; a.nnz()];
    let mut values = vec![0.0; a.nnz()];
    for j in 0..n {
        for (&i, &v) in a.col_rows(j).iter().zip(a.col_values(j)) {
            let (r, c) = (ip[i].max(ip[j]), ip[i].min(ip[j]));
            row_idx[next[c]] = r;
            values[next[c]] = v;
            next[c] += 1;
        }
    }
    for j in 0..n {
        let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
        let mut pairs: Vec<(usize, f64)> =
            row_idx[lo..hi].iter().copied().zip(values[lo..hi].iter().copied()).collect();
        pairs.sort_unstable_by_key(|&(r, _)| r);
        for (k, (r, v)) in pairs.into_iter().enumerate() {
            row_idx[lo + k] = r;
            values[lo + k] = v;
        }
    }
    SparseSymMatrix::from_parts(n, col_ptr, row_idx, values)
}

/// 5-point Laplacian on a `kx` by `ky` grid, natural (row-major) numbering.
pub fn laplacian_2d(kx: usize, ky: usize) -> SparseSymMatrix {
    let n = kx * ky;
    let mut t = Vec::with_capacity(3 * n);
    for y in 0..ky {
        for x in 0..kx {
            let v = x + y * kx;
            t.push((v, v, 4.0));
            if x + 1 < kx {
                t.push((v + 1, v, -1.0));
            }
            if y + 1 < ky {
                t.push((v + kx, v, -1.0));
            }
        }
    }
    SparseSymMatrix::from_triplets(n, &t).expect("grid indices are in range")
}

/// Arrow matrix: diagonal 4 and a dense row/column of ones through the center vertex.
/// With `center_last` the center is column `n - 1` (no fill), otherwise
/// column 0 (the whole trailing block fills).
pub fn arrow(n: usize, center_last: bool) -> SparseSymMatrix {
    let c = if center_last { n - 1 } else { 0 };
    // The center pivot must exceed (n - 1) / 4 for positive definiteness.
    let center_diag = 4.0f64.max(n as f64 / 4.0 + 1.0);
    let mut t: Vec<_> = (0..n).map(|v| (v, v, if v == c { center_diag } else { 4.0 })).collect();
    t.extend((0..n).filter(|&v| v != c).map(|v| (c, v, 1.0)));
    SparseSymMatrix::from_triplets(n, &t).expect("arrow indices are in range")
}

/// Dense SPD matrix: `n + 1` on the diagonal, `1 / (1 + |i - j|)` off it.
pub fn dense_spd(n: usize) -> SparseSymMatrix {
    let mut t = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        t.push((j, j, n as f64 + 1.0));
        for i in j + 1..n {
            t.push((i, j, 1.0 / (1.0 + (i - j) as f64)));
        }
    }
    SparseSymMatrix::from_triplets(n, &t).expect("dense indices are in range")
}

/// Seeded random diagonally dominant SPD matrix with roughly `per_col`
/// off-diagonal entries per column.
pub fn random_spd(n: usize, per_col: usize, seed: u64) -> SparseSymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut row_abs = vec![0.0f64; n];
    for j in 0..n {
        for _ in 0..per_col {
            if n < 2 {
                break;
            }
            let i = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let v: f64 = rng.gen_range(-1.0..1.0);
            t.push((i.max(j), i.min(j), v));
            row_abs[i] += v.abs();
            row_abs[j] += v.abs();
        }
    }
    for (j, s) in row_abs.iter().enumerate() {
        t.push((j, j, s + 1.0));
    }
    SparseSymMatrix::from_triplets(n, &t).expect("random indices are in range")
}

/// Result of reading a Matrix Market file.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMarketFile {
    pub matrix: SparseSymMatrix,
    /// Entry count declared in the size line.
    pub declared_entries: usize,
    /// Columns whose diagonal was absent and inserted as zero.
    pub inserted_diagonals: Vec<usize>,
}

impl MatrixMarketFile {
    pub fn missing_diagonal(&self) -> bool {
        !self.inserted_diagonals.is_empty()
    }
}

/// Reads a symmetric coordinate Matrix Market file into lower-triangular form.
pub fn read_matrix_market(path: &Path) -> Result<SparseSymMatrix> {
    Ok(load_matrix_market(path)?.matrix)
}

pub fn load_matrix_market(path: &Path) -> Result<MatrixMarketFile> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<MatrixMarketFile> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: "missing %%MatrixMarket matrix header".into() });
    }
    if fields[2] != "coordinate" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported format {}", fields[2]) });
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported field {}", fields[3]) });
    }
    if fields[4] != "symmetric" {
        return Err(Error::UnsymmetricInput);
    }

    let mut size: Option<(usize, usize)> = None;
    let mut lower: Vec<BTreeMap<usize, f64>> = Vec::new();
    let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut declared = 0;
    let mut seen = 0;
    for (ln, line) in lines {
        let line_no = ln + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        let toks: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err("size line needs rows cols entries".into()));
                }
                let nums: Vec<usize> = toks
                    .iter()
                    .map(|s| s.parse::<usize>().map_err(|e| parse_err(e.to_string())))
                    .collect::<Result<_>>()?;
                if nums[0] != nums[1] {
                    return Err(parse_err("symmetric matrix must be square".into()));
                }
                size = Some((nums[0], nums[2]));
                declared = nums[2];
                lower = vec![BTreeMap::new(); nums[0]];
            }
            Some((n, _)) => {
                if toks.len() != 3 {
                    return Err(parse_err("expected `row col value`".into()));
                }
                let i: usize = toks[0].parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?;
                let j: usize = toks[1].parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?;
                let v: f64 = toks[2].parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::IndexOutOfRange {
                        row: i.wrapping_sub(1),
                        col: j.wrapping_sub(1),
                        n,
                    });
                }
                let (i, j) = (i - 1, j - 1);
                if i >= j {
                    *lower[j].entry(i).or_insert(0.0) += v;
                } else {
                    *upper.entry((j, i)).or_insert(0.0) += v;
                }
                seen += 1;
            }
        }
    }
    let Some((n, _)) = size else {
        return Err(Error::Parse { line: 1, msg: "missing size line".into() });
    };
    if seen != declared {
        return Err(Error::Parse {
            line: 1,
            msg: format!("size line declares {declared} entries, found {seen}"),
        });
    }
    // Upper-triangle entries of a symmetric file are mirror images of the
    // lower triangle; a conflicting pair is rejected.
    for ((r, c), v) in upper {
        match lower[c].get(&r) {
            Some(&w) if w == v => {}
            Some(&w) => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("entries ({}, {}) = {v} and ({}, {}) = {w} disagree", c + 1, r + 1, r + 1, c + 1),
                })
            }
            None => {
                lower[c].insert(r, v);
            }
        }
    }
    let inserted_diagonals: Vec<usize> =
        (0..n).filter(|&j| !lower[j].contains_key(&j)).collect();
    let matrix = SparseSymMatrix::from_columns(lower);
    Ok(MatrixMarketFile { matrix, declared_entries: declared, inserted_diagonals })
}

/// Writes the lower triangle in Matrix Market symmetric coordinate format.
pub fn write_matrix_market(a: &SparseSymMatrix, path: &Path) -> Result<()> {
    let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    s.push_str(&format!("{} {} {}\n", a.n(), a.n(), a.nnz()));
    for j in 0..a.n() {
        for (&i, &v) in a.col_rows(j).iter().zip(a.col_values(j)) {
            s.push_str(&format!("{} {} {:e}\n", i + 1, j + 1, v));
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_file() {
        let f = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 1.0\n2 2 1.0\n3 3 1.0\n",
        )
        .unwrap();
        assert_eq!(f.matrix.n(), 3);
        assert_eq!(f.matrix.nnz(), 3);
        assert!(!f.missing_diagonal());
        for j in 0..3 {
            assert_eq!(f.matrix.col_rows(j), &[j]);
        }
    }

    #[test]
    fn symmetric_pair_stored_once() {
        let body = "2 2 4\n1 1 3\n2 2 3\n2 1 5\n1 2 5\n";
        let general = format!("%%MatrixMarket matrix coordinate real general\n{body}");
        assert_eq!(parse_matrix_market(&general), Err(Error::UnsymmetricInput));
        let sym = format!("%%MatrixMarket matrix coordinate real symmetric\n{body}");
        let m = parse_matrix_market(&sym).unwrap().matrix;
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.col_rows(0), &[0, 1]);
        assert_eq!(m.get(1, 0), 5.0);
    }

    #[test]
    fn duplicates_summed_and_diagonal_inserted() {
        let f = parse_matrix_market(
            "%%MatrixMarket matrix coordinate integer symmetric\n3 3 3\n2 1 1\n2 1 2\n2 2 7\n",
        )
        .unwrap();
        assert_eq!(f.matrix.get(1, 0), 3.0);
        assert_eq!(f.inserted_diagonals, vec![0, 2]);
        assert_eq!(f.matrix.get(2, 2), 0.0);
    }

    #[test]
    fn bad_input_rejected() {
        let oob = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n";
        assert!(matches!(parse_matrix_market(oob), Err(Error::IndexOutOfRange { .. })));
        let junk = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 x 1.0\n";
        assert!(matches!(parse_matrix_market(junk), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_matrix_market("hello\n"), Err(Error::Parse { line: 1, .. })));
        let complex = "%%MatrixMarket matrix coordinate complex hermitian\n1 1 1\n1 1 1 0\n";
        assert!(matches!(parse_matrix_market(complex), Err(Error::Parse { .. })));
    }

    #[test]
    fn laplacian_shapes() {
        let one = laplacian_2d(1, 1);
        assert_eq!((one.n(), one.nnz(), one.get(0, 0)), (1, 1, 4.0));
        let path = laplacian_2d(3, 1);
        assert_eq!(path.n(), 3);
        assert_eq!(path.get(1, 0), -1.0);
        assert_eq!(path.get(2, 1), -1.0);
        assert_eq!(path.get(2, 0), 0.0);
        // 9 diagonal entries plus 12 grid edges.
        assert_eq!(laplacian_2d(3, 3).nnz(), 21);
    }

    #[test]
    fn permutation_rejects_non_bijection() {
        assert!(Permutation::from_new_to_old(vec![0, 0]).is_err());
        assert!(Permutation::from_new_to_old(vec![0, 2]).is_err());
        let p = Permutation::from_new_to_old(vec![2, 0, 1]).unwrap();
        assert_eq!(p.iperm(), &[1, 2, 0]);
        assert_eq!(p.apply_inverse(&p.apply(&[1.0, 2.0, 3.0])), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn permute_identity_and_reversal() {
        let a = laplacian_2d(3, 1);
        assert_eq!(permute_symmetric(&a, &Permutation::identity(3)).unwrap(), a);
        let rev = Permutation::from_new_to_old(vec![2, 1, 0]).unwrap();
        assert_eq!(permute_symmetric(&a, &rev).unwrap(), a);
        assert!(permute_symmetric(&a, &Permutation::identity(4)).is_err());
    }

    #[test]
    fn arrow_reversal_moves_dense_row_to_first_column() {
        let a = arrow(5, true);
        let rev = Permutation::from_new_to_old(vec![4, 3, 2, 1, 0]).unwrap();
        let b = permute_symmetric(&a, &rev).unwrap();
        assert_eq!(b.col_rows(0), &[0, 1, 2, 3, 4]);
        let (da, db) = (to_dense(&a).unwrap(), to_dense(&b).unwrap());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(db.get(rev.iperm()[i], rev.iperm()[j]), da.get(i, j));
            }
        }
    }

    #[test]
    fn dense_cholesky_hand_cases() {
        let id = DenseSym::from_col_major(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(dense_cholesky(&id).unwrap().l, vec![1.0, 0.0, 0.0, 1.0]);
        let d = DenseSym::from_col_major(2, vec![4.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(dense_cholesky(&d).unwrap().l, vec![2.0, 1.0, 0.0, 2.0]);
        let bad = DenseSym::from_col_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert_eq!(dense_cholesky(&bad), Err(Error::NotPositiveDefinite(1)));
    }

    #[test]
    fn oracle_cap_enforced() {
        assert!(matches!(
            to_dense_capped(&laplacian_2d(3, 3), 8),
            Err(Error::OracleCap { n: 9, cap: 8 })
        ));
    }

    #[test]
    fn from_parts_checks_invariants() {
        assert!(SparseSymMatrix::from_parts(2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        // missing diagonal in column 1
        assert!(SparseSymMatrix::from_parts(2, vec![0, 2, 2], vec![0, 1], vec![1.0, 1.0]).is_err());
        // unsorted rows
        assert!(SparseSymMatrix::from_parts(3, vec![0, 3, 4, 5], vec![0, 2, 1, 1, 2], vec![1.0; 5]).is_err());
    }
}
