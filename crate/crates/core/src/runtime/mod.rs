//! Simulated distributed-memory execution of a task graph.

mod config;
mod fixtures;
mod sim;
mod stats;

pub use config::{target_source_policy, CostModel, Policy, Protocol, RunConfig, Schedule};
pub use fixtures::{deadlock_fixture, random_task_tree};
pub use stats::{trace_to_ndjson, KindCounts, RankStats, RunStats, SnodeTraffic, TraceEvent, TraceKind};

use crate::error::{Error, Result};
use crate::kernels::Panel;
use crate::mapping::Rank;
use crate::matrix::SparseSymMatrix;
use crate::symbolic::SymbolicFactor;
use crate::taskgraph::TaskGraph;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stats: RunStats,
    /// Factored panels, when numeric inputs were supplied.
    pub panels: Option<Vec<Panel>>,
    pub trace: Vec<TraceEvent>,
}

/// Runs the graph to completion or to a stuck state. A deadlock is reported
/// in `stats.deadlock` rather than as an error.
pub fn simulate(
    graph: &TaskGraph,
    numeric: Option<(&SparseSymMatrix, &SymbolicFactor)>,
    cfg: &RunConfig,
) -> Result<RunOutput> {
    sim::Sim::new(graph, numeric, cfg)?.run()
}

/// Like [`simulate`] but a deadlock becomes [`Error::Deadlock`].
pub fn run(graph: &TaskGraph, numeric: Option<(&SparseSymMatrix, &SymbolicFactor)>, cfg: &RunConfig) -> Result<RunOutput> {
    let out = simulate(graph, numeric, cfg)?;
    match out.stats.deadlock {
        Some(cycle) => Err(Error::Deadlock { cycle }),
        None => Ok(out),
    }
}

/// A cycle in the wait-for graph (`edges[r]` = ranks `r` waits on), listed
/// from its smallest rank.
pub fn find_wait_cycle(edges: &[Vec<Rank>]) -> Option<Vec<Rank>> {
    // 0 unvisited, 1 on stack, 2 finished
    let mut color = vec![0u8; edges.len()];
    let mut stack: Vec<Rank> = Vec::new();
    fn dfs(v: Rank, edges: &[Vec<Rank>], color: &mut [u8], stack: &mut Vec<Rank>) -> Option<Vec<Rank>> {
        color[v] = 1;
        stack.push(v);
        for &w in &edges[v] {
            if color[w] == 1 {
                let at = stack.iter().position(|&x| x == w).expect("on stack");
                return Some(stack[at..].to_vec());
            }
            if color[w] == 0 {
                if let Some(c) = dfs(w, edges, color, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        color[v] = 2;
        None
    }
    for v in 0..edges.len() {
        if color[v] == 0 {
            if let Some(mut c) = dfs(v, edges, &mut color, &mut stack) {
                let min = (0..c.len()).min_by_key(|&k| c[k]).expect("non-empty");
                c.rotate_left(min);
                return Some(c);
            }
        }
    }
    None
}
