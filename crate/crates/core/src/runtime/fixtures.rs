//! Column task trees used to exercise the communication protocols without
//! any numeric payload.
//!
//! A tree task `T(i, j)` runs on source column `i` and modifies target
//! column `j >= i`; its result feeds the unique task whose source is `j`.
//! Column `c` (1-based in [`deadlock_fixture`]) is owned cyclically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mapping::{Rank, TaskId};
use crate::symbolic::{postorder_tree, EliminationTree};
use crate::taskgraph::{MessageDescriptor, MsgKind, TaskGraph};

const FIXTURE_FLOPS: f64 = 1000.0;
const FIXTURE_BYTES: usize = 8000;

fn tree_task(src: usize, tgt: usize) -> TaskId {
    if src == tgt {
        TaskId::factor(src)
    } else {
        TaskId::update(src, tgt)
    }
}

fn edge(graph_tasks: &[(TaskId, Rank, f64)], from: usize, to: usize, bytes: usize) -> MessageDescriptor {
    MessageDescriptor {
        kind: MsgKind::Aggregate,
        src_snode: graph_tasks[to].0.src,
        tgt_snode: graph_tasks[to].0.tgt,
        from_rank: graph_tasks[from].1,
        to_rank: graph_tasks[to].1,
        bytes,
        producers: vec![from],
        consumers: vec![to],
        rows: Vec::new(),
    }
}

/// The task tree on which eager push with one send and one receive buffer
/// per rank deadlocks.
///
/// Columns are labelled `1..=3P+2` and column `c` lives on rank `(c - 1) % P`,
/// so ranks 0 and 1 play the first two processors. The tree is:
///
/// * bottom level `T(i, P+1)`, `i = 1..P`, all feeding `T(P+1, 3P+2)` on rank 0;
/// * second wave `T(P+i, 3P+2)`, `i = 1..P`, all feeding the root
///   `T(3P+2, 3P+2)` on rank 1;
/// * right branch `T(2P+1, 2P+2) → T(2P+2, 2P+3) → T(2P+3, 3P+2) → root`,
///   starting on rank 0 and passing through rank 1.
///
/// Walking tasks in source order, rank 0 sends its second-wave result to
/// rank 1 and then cannot ship the right-branch data rank 1 waits for.
///
/// # Panics
/// If `procs < 2`.
pub fn deadlock_fixture(procs: usize) -> TaskGraph {
    assert!(procs >= 2, "the deadlock tree needs at least two ranks");
    let p = procs;
    let owner = |c: usize| (c - 1) % p;
    let root_col = 3 * p + 2;
    let mut tasks: Vec<(TaskId, Rank, f64)> = Vec::new();
    let add = |src: usize, tgt: usize, tasks: &mut Vec<(TaskId, Rank, f64)>| {
        tasks.push((tree_task(src, tgt), owner(src), FIXTURE_FLOPS));
        tasks.len() - 1
    };
    let bottom: Vec<usize> = (1..=p).map(|i| add(i, p + 1, &mut tasks)).collect();
    let wave: Vec<usize> = (1..=p).map(|i| add(p + i, root_col, &mut tasks)).collect();
    let b1 = add(2 * p + 1, 2 * p + 2, &mut tasks);
    let b2 = add(2 * p + 2, 2 * p + 3, &mut tasks);
    let b3 = add(2 * p + 3, root_col, &mut tasks);
    let root = add(root_col, root_col, &mut tasks);

    let mut messages = Vec::new();
    for &b in &bottom {
        messages.push(edge(&tasks, b, wave[0], FIXTURE_BYTES));
    }
    for &w in &wave {
        messages.push(edge(&tasks, w, root, FIXTURE_BYTES));
    }
    messages.push(edge(&tasks, b1, b2, FIXTURE_BYTES));
    messages.push(edge(&tasks, b2, b3, FIXTURE_BYTES));
    messages.push(edge(&tasks, b3, root, FIXTURE_BYTES));
    TaskGraph::from_parts(procs, None, tasks, messages).expect("fixture is well formed")
}

/// Seeded random postordered column tree with `cols` columns and random
/// task owners, payload sizes and costs.
pub fn random_task_tree(seed: u64, procs: usize, cols: usize) -> TaskGraph {
    assert!(cols >= 1 && procs >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent: Vec<Option<usize>> = (0..cols)
        .map(|c| {
            if c + 1 == cols {
                None
            } else if rng.gen_bool(0.4) {
                Some(c + 1)
            } else {
                Some(rng.gen_range(c + 1..cols))
            }
        })
        .collect();
    // Relabel so every subtree is a contiguous column range.
    let post = postorder_tree(&EliminationTree::from_parents(parent.clone()).expect("parents exceed children"));
    parent = (0..cols).map(|k| parent[post.perm()[k]].map(|p| post.iperm()[p])).collect();

    let tasks: Vec<(TaskId, Rank, f64)> = (0..cols)
        .map(|c| {
            let tgt = parent[c].unwrap_or(c);
            (tree_task(c, tgt), rng.gen_range(0..procs), rng.gen_range(100.0..5000.0))
        })
        .collect();
    let messages = (0..cols)
        .filter_map(|c| parent[c].map(|p| edge(&tasks, c, p, rng.gen_range(64..20_000))))
        .collect();
    TaskGraph::from_parts(procs, None, tasks, messages).expect("random tree is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        for p in 2..=5 {
            let g = deadlock_fixture(p);
            assert_eq!(g.tasks.len(), 2 * p + 4);
            assert_eq!(g.num_edges(), 2 * p + 3);
            let root = g.task(&TaskId::factor(3 * p + 2)).unwrap();
            assert_eq!(root.owner, 1);
            assert_eq!(root.deps_in, p + 1);
            assert_eq!(g.task(&TaskId::update(p + 1, 3 * p + 2)).unwrap().deps_in, p);
            assert_eq!(g.task(&TaskId::update(2 * p + 1, 2 * p + 2)).unwrap().owner, 0);
            assert_eq!(g.task(&TaskId::update(2 * p + 2, 2 * p + 3)).unwrap().owner, 1);
            assert!(g.topological_order().is_some());
        }
    }

    #[test]
    fn random_trees_are_postordered_trees() {
        for seed in 0..20 {
            let g = random_task_tree(seed, 4, 30);
            assert_eq!(g.num_edges(), 29);
            for m in &g.messages {
                let (a, b) = (g.tasks[m.producers[0]].id, g.tasks[m.consumers[0]].id);
                assert_eq!(a.tgt, b.src);
                assert!(a.src < a.tgt && b.src <= b.tgt);
            }
        }
    }
}
