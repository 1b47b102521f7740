//! Symbolic factorization: elimination tree, postorder, the nonzero
//! structure of `L`, and its partition into supernodes.

use serde::Serialize;

use crate::matrix::{Permutation, SparseSymMatrix};

/// Default cap on supernode width, in columns.
pub const MAX_SUPERNODE_WIDTH: usize = 150;

/// Parent pointers of the elimination forest; `None` marks a root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationTree {
    parent: Vec<Option<usize>>,
}

impl EliminationTree {
    /// Wraps a parent array after checking `parent[v] > v`.
    pub fn from_parents(parent: Vec<Option<usize>>) -> crate::Result<Self> {
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p <= v || p >= parent.len() {
                    return Err(crate::Error::Structure(format!("invalid parent {p} of {v}")));
                }
            }
        }
        Ok(Self { parent })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Children lists, each in increasing index order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(v);
            }
        }
        ch
    }

    /// True when every subtree occupies a contiguous label range ending at its root.
    pub fn is_postordered(&self) -> bool {
        let n = self.len();
        let mut first = (0..n).collect::<Vec<_>>();
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                first[p] = first[p].min(first[v]);
            }
        }
        // Subtree of v is [first[v], v]; it must contain exactly its descendants.
        let mut size = vec![1usize; n];
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        (0..n).all(|v| v + 1 - first[v] == size[v])
    }
}

/// Liu's elimination-tree algorithm with path-compressed ancestors.
pub fn etree(a: &SparseSymMatrix) -> EliminationTree {
    let n = a.n();
    // Row lists of the strictly lower triangle: rows[i] holds columns k < i with a(i, k) != 0.
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..n {
        for &i in &a.col_rows(k)[1..] {
            rows[i].push(k);
        }
    }
    let mut parent = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for (i, row) in rows.iter().enumerate() {
        for &k in row {
            let mut r = k;
            while let Some(next) = ancestor[r] {
                if next == i {
                    break;
                }
                ancestor[r] = Some(i);
                r = next;
            }
            if ancestor[r].is_none() {
                ancestor[r] = Some(i);
                parent[r] = Some(i);
            }
        }
    }
    EliminationTree { parent }
}

/// Depth-first postorder; children are visited in increasing index order.
/// The result maps new label → old vertex.
pub fn postorder_tree(t: &EliminationTree) -> Permutation {
    let n = t.len();
    let children = t.children();
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in (0..n).filter(|&v| t.parent(v).is_none()) {
        stack.push((root, 0));
        while let Some((v, next_child)) = stack.pop() {
            if let Some(&c) = children[v].get(next_child) {
                stack.push((v, next_child + 1));
                stack.push((c, 0));
            } else {
                order.push(v);
            }
        }
    }
    Permutation::from_new_to_old(order).expect("postorder visits every vertex once")
}

/// Column range of one supernode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Supernode {
    pub first: usize,
    /// One past the last column.
    pub end: usize,
}

impl Supernode {
    pub fn width(&self) -> usize {
        self.end - self.first
    }

    pub fn contains(&self, col: usize) -> bool {
        (self.first..self.end).contains(&col)
    }
}

/// Result of symbolic analysis on a postordered matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicFactor {
    pub etree: EliminationTree,
    /// Postorder of `etree`. Identity whenever the input was already postordered.
    pub postorder: Permutation,
    /// Sorted row structure of every column of `L`, diagonal first.
    pub lstruct: Vec<Vec<usize>>,
    pub colcount: Vec<usize>,
    pub snodes: Vec<Supernode>,
    pub sn_parent: Vec<Option<usize>>,
    /// Rows of each supernode: its diagonal block followed by the shared below-block structure.
    pub sn_rows: Vec<Vec<usize>>,
    /// Column → supernode.
    pub col_snode: Vec<usize>,
    /// Stored lower nonzeros of the analyzed matrix.
    pub nnz_a: usize,
}

impl SymbolicFactor {
    pub fn n(&self) -> usize {
        self.lstruct.len()
    }

    pub fn num_snodes(&self) -> usize {
        self.snodes.len()
    }

    /// Supernode widths bucketed by powers of two: `(upper_bound, count)`.
    pub fn width_histogram(&self) -> Vec<(usize, usize)> {
        let mut buckets: Vec<(usize, usize)> = Vec::new();
        for s in &self.snodes {
            let ub = s.width().next_power_of_two();
            match buckets.iter_mut().find(|(b, _)| *b == ub) {
                Some(e) => e.1 += 1,
                None => buckets.push((ub, 1)),
            }
        }
        buckets.sort_unstable();
        buckets
    }
}

/// Computes the structure of `L` and the supernode partition.
///
/// The columns of `a` should already be in postorder; the driver composes the
/// fill-reducing ordering with the elimination-tree postorder before calling this.
pub fn symbolic_factorize(a: &SparseSymMatrix, max_sn_width: usize) -> SymbolicFactor {
    let n = a.n();
    let max_w = max_sn_width.max(1);
    let tree = etree(a);
    let postorder = postorder_tree(&tree);
    let children = tree.children();

    // struct(L_j) = struct(A_j) ∪ ⋃_{c child of j} struct(L_c) \ {c}
    let mut lstruct: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    for j in 0..n {
        let mut rows = Vec::new();
        for &i in a.col_rows(j) {
            if mark[i] != j {
                mark[i] = j;
                rows.push(i);
            }
        }
        for &c in &children[j] {
            for &i in &lstruct[c] {
                if i > c && mark[i] != j {
                    mark[i] = j;
                    rows.push(i);
                }
            }
        }
        rows.sort_unstable();
        lstruct.push(rows);
    }
    let colcount: Vec<usize> = lstruct.iter().map(Vec::len).collect();

    let mut snodes = Vec::new();
    let mut first = 0;
    for j in 1..=n {
        let extends = j < n
            && tree.parent(j - 1) == Some(j)
            && colcount[j] + 1 == colcount[j - 1]
            && j - first < max_w;
        if !extends {
            snodes.push(Supernode { first, end: j });
            first = j;
        }
    }
    let mut col_snode = vec![0; n];
    for (s, sn) in snodes.iter().enumerate() {
        col_snode[sn.first..sn.end].iter_mut().for_each(|c| *c = s);
    }
    let sn_rows: Vec<Vec<usize>> = snodes.iter().map(|sn| lstruct[sn.first].clone()).collect();
    let sn_parent = snodes
        .iter()
        .map(|sn| tree.parent(sn.end - 1).map(|p| col_snode[p]))
        .collect();

    SymbolicFactor {
        etree: tree,
        postorder,
        lstruct,
        colcount,
        snodes,
        sn_parent,
        sn_rows,
        col_snode,
        nnz_a: a.nnz(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FillStats {
    pub nnz_l: usize,
    pub fill: usize,
    pub flops: u64,
}

pub fn fill_stats(sf: &SymbolicFactor) -> FillStats {
    let nnz_l: usize = sf.colcount.iter().sum();
    FillStats {
        nnz_l,
        fill: nnz_l - sf.nnz_a,
        flops: sf.colcount.iter().map(|&c| (c as u64) * (c as u64)).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{arrow, dense_spd, laplacian_2d};

    fn diag(n: usize) -> SparseSymMatrix {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        SparseSymMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn etree_small_cases() {
        assert!(etree(&diag(4)).parents().iter().all(Option::is_none));
        let t = etree(&arrow(5, true));
        assert_eq!(t.parents(), &[Some(4), Some(4), Some(4), Some(4), None]);
    }

    #[test]
    fn postorder_cases() {
        let chain = EliminationTree::from_parents(vec![Some(1), Some(2), None]).unwrap();
        assert_eq!(postorder_tree(&chain), Permutation::identity(3));
        let fork = EliminationTree::from_parents(vec![Some(2), Some(2), None]).unwrap();
        assert_eq!(postorder_tree(&fork), Permutation::identity(3));
        let star = EliminationTree::from_parents(vec![Some(4), Some(4), Some(4), Some(4), None]).unwrap();
        assert_eq!(postorder_tree(&star), Permutation::identity(5));
        assert!(EliminationTree::from_parents(vec![None, Some(0)]).is_err());
    }

    #[test]
    fn postorder_makes_subtrees_contiguous() {
        // 0 -> 3, 1 -> 2, 2 -> 3: subtree of 2 is {1, 2} but 0 sits between.
        let t = EliminationTree::from_parents(vec![Some(3), Some(2), Some(3), None]).unwrap();
        assert!(t.is_postordered());
        let t = EliminationTree::from_parents(vec![Some(2), Some(3), Some(3), None]).unwrap();
        assert!(!t.is_postordered());
        let p = postorder_tree(&t);
        assert_eq!(p.perm(), &[1, 0, 2, 3]);
    }

    #[test]
    fn dense_is_single_supernode() {
        let sf = symbolic_factorize(&dense_spd(5), 150);
        assert_eq!(sf.snodes, vec![Supernode { first: 0, end: 5 }]);
        assert_eq!(sf.sn_parent, vec![None]);
        assert_eq!(fill_stats(&sf).fill, 0);
    }

    #[test]
    fn width_cap_splits() {
        let sf = symbolic_factorize(&dense_spd(5), 2);
        let ranges: Vec<_> = sf.snodes.iter().map(|s| (s.first, s.end)).collect();
        assert_eq!(ranges, vec![(0, 2), (2, 4), (4, 5)]);
        assert_eq!(sf.sn_parent, vec![Some(1), Some(2), None]);
        assert_eq!(sf.sn_rows[1], vec![2, 3, 4]);
    }

    #[test]
    fn fill_stats_cases() {
        let s = fill_stats(&symbolic_factorize(&diag(4), 150));
        assert_eq!(s, FillStats { nnz_l: 4, fill: 0, flops: 4 });
        let s = fill_stats(&symbolic_factorize(&arrow(5, true), 150));
        assert_eq!((s.nnz_l, s.fill), (9, 0));
        let s = fill_stats(&symbolic_factorize(&arrow(5, false), 150));
        assert_eq!((s.nnz_l, s.fill), (15, 6));
    }

    #[test]
    fn supernode_rows_start_with_block() {
        let sf = symbolic_factorize(&laplacian_2d(4, 4), 150);
        for (sn, rows) in sf.snodes.iter().zip(&sf.sn_rows) {
            let block: Vec<_> = (sn.first..sn.end).collect();
            assert_eq!(&rows[..sn.width()], &block[..]);
        }
        assert_eq!(sf.width_histogram().iter().map(|b| b.1).sum::<usize>(), sf.num_snodes());
    }
}
