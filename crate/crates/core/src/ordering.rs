//! Fill-reducing orderings.
//!
//! [`minimum_degree`] eliminates, at every step, a vertex of least current
//! degree in the elimination graph, turning its neighbourhood into a clique.
//! Ties go to the smallest original index so the result is reproducible.

use std::collections::BTreeSet;

use crate::matrix::{Permutation, SparseSymMatrix};

pub fn natural_order(n: usize) -> Permutation {
    Permutation::identity(n)
}

/// Plain (exact external degree) minimum degree on an explicit elimination graph.
pub fn minimum_degree(a: &SparseSymMatrix) -> Permutation {
    let n = a.n();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 0..n {
        for &i in a.col_rows(j) {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (k, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[k + 1..] {
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        for &u in &nbrs {
            queue.insert((adj[u].len(), u));
        }
    }
    Permutation::from_new_to_old(order).expect("every vertex is eliminated exactly once")
}

/// Ordering selector used by the pipeline driver.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    #[default]
    MinimumDegree,
    /// Externally computed permutation (e.g. nested dissection), new→old.
    Given(Permutation),
}

impl Ordering {
    pub fn compute(&self, a: &SparseSymMatrix) -> crate::Result<Permutation> {
        match self {
            Ordering::Natural => Ok(natural_order(a.n())),
            Ordering::MinimumDegree => Ok(minimum_degree(a)),
            Ordering::Given(p) => {
                if p.len() != a.n() {
                    return Err(crate::Error::DimensionMismatch { expected: a.n(), got: p.len() });
                }
                Ok(p.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{arrow, laplacian_2d};

    #[test]
    fn natural_is_identity() {
        assert_eq!(natural_order(1).perm(), &[0]);
        assert_eq!(natural_order(4).perm(), &[0, 1, 2, 3]);
        let p = natural_order(4);
        assert_eq!(p.then(&p).unwrap(), p);
    }

    #[test]
    fn diagonal_gives_identity() {
        let d = SparseSymMatrix::from_triplets(4, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)]).unwrap();
        assert_eq!(minimum_degree(&d).perm(), &[0, 1, 2, 3]);
    }

    #[test]
    fn arrow_center_goes_last() {
        for center_last in [true, false] {
            let a = arrow(5, center_last);
            let p = minimum_degree(&a);
            let center = if center_last { 4 } else { 0 };
            // leaves first; the hub ties with the final leaf
            assert!(p.iperm()[center] >= 3);
        }
    }

    #[test]
    fn deterministic() {
        let a = laplacian_2d(7, 5);
        assert_eq!(minimum_degree(&a), minimum_degree(&a));
    }

    #[test]
    fn given_ordering_checked() {
        let a = laplacian_2d(2, 2);
        assert!(Ordering::Given(Permutation::identity(3)).compute(&a).is_err());
        assert_eq!(Ordering::Natural.compute(&a).unwrap(), Permutation::identity(4));
    }
}
