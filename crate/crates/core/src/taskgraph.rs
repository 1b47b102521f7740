//! Fan-both task DAG: factorization (F), update (U) and aggregation (A)
//! tasks wired together by data deliveries.
//!
//! Every dependency is carried by a [`MessageDescriptor`]: a piece of data
//! produced by one or more tasks on `from_rank` and consumed by one or more
//! tasks on `to_rank`. A task's incoming counter is the number of
//! descriptors it consumes. Updates computed on the same rank for the same
//! target share one accumulated aggregate, hence one descriptor.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::kernels::{apply_flops, factor_flops, panel_bytes, update_flops};
use crate::mapping::{owner_of_task, ComputationMap, Rank, TaskId, TaskKind};
use crate::symbolic::SymbolicFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MsgKind {
    Factor,
    Aggregate,
    /// Same-rank ordering edge (aggregation before factorization); carries no data.
    Control,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageDescriptor {
    pub kind: MsgKind,
    pub src_snode: usize,
    pub tgt_snode: usize,
    pub from_rank: Rank,
    pub to_rank: Rank,
    pub bytes: usize,
    /// Producing tasks; the data is complete once all of them finished.
    pub producers: Vec<usize>,
    pub consumers: Vec<usize>,
    /// Row set of an accumulated aggregate, empty otherwise.
    #[serde(skip)]
    pub rows: Vec<usize>,
}

impl MessageDescriptor {
    /// True when the data crosses ranks and is therefore counted as traffic.
    pub fn is_remote(&self) -> bool {
        self.from_rank != self.to_rank
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    pub id: TaskId,
    pub owner: Rank,
    pub deps_in: usize,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub flops: f64,
}

/// Order in which a rank walks its own tasks under static scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TaskOrder {
    /// By target, then source: the deadlock-avoiding order.
    TargetMajor,
    /// By source, then target: plain right-looking order.
    SourceMajor,
}

impl TaskOrder {
    pub fn key(self, id: &TaskId) -> (usize, usize, TaskKind) {
        match self {
            TaskOrder::TargetMajor => id.target_key(),
            TaskOrder::SourceMajor => id.source_key(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskGraph {
    pub procs: usize,
    pub map: Option<ComputationMap>,
    pub tasks: Vec<Task>,
    pub messages: Vec<MessageDescriptor>,
    #[serde(skip)]
    index: HashMap<TaskId, usize>,
}

impl TaskGraph {
    /// Assembles a graph from tasks and `(producers, consumers, kind, bytes)` edges.
    pub fn from_parts(
        procs: usize,
        map: Option<ComputationMap>,
        tasks: Vec<(TaskId, Rank, f64)>,
        mut messages: Vec<MessageDescriptor>,
    ) -> crate::Result<Self> {
        let mut ts: Vec<Task> = tasks
            .into_iter()
            .map(|(id, owner, flops)| Task { id, owner, deps_in: 0, inputs: vec![], outputs: vec![], flops })
            .collect();
        let mut index = HashMap::with_capacity(ts.len());
        for (k, t) in ts.iter().enumerate() {
            if t.owner >= procs {
                return Err(crate::Error::Structure(format!("task {} owned by rank {} >= {procs}", t.id, t.owner)));
            }
            if index.insert(t.id, k).is_some() {
                return Err(crate::Error::Structure(format!("duplicate task {}", t.id)));
            }
        }
        for (d, m) in messages.iter_mut().enumerate() {
            if m.producers.is_empty() || m.consumers.is_empty() {
                return Err(crate::Error::Structure(format!("message {d} has no endpoints")));
            }
            for &p in &m.producers {
                if ts[p].owner != m.from_rank {
                    return Err(crate::Error::Structure(format!("producer of message {d} not on rank {}", m.from_rank)));
                }
                ts[p].outputs.push(d);
            }
            for &c in &m.consumers {
                if ts[c].owner != m.to_rank {
                    return Err(crate::Error::Structure(format!("consumer of message {d} not on rank {}", m.to_rank)));
                }
                ts[c].inputs.push(d);
                ts[c].deps_in += 1;
            }
        }
        Ok(Self { procs, map, tasks: ts, messages, index })
    }

    pub fn task_index(&self, id: &TaskId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn task(&self, id: &TaskId) -> Option<&Task> {
        self.task_index(id).map(|k| &self.tasks[k])
    }

    pub fn num_edges(&self) -> usize {
        self.messages.iter().map(|m| m.consumers.len()).sum()
    }

    /// Tasks owned by `rank`, sorted by `order`.
    pub fn rank_order(&self, rank: Rank, order: TaskOrder) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.tasks.len()).filter(|&k| self.tasks[k].owner == rank).collect();
        v.sort_by_key(|&k| order.key(&self.tasks[k].id));
        v
    }

    /// Kahn topological sort; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut deps: Vec<usize> = self.tasks.iter().map(|t| t.deps_in).collect();
        let mut pending: Vec<usize> = self.messages.iter().map(|m| m.producers.len()).collect();
        let mut ready: BTreeSet<(usize, usize, TaskKind, usize)> = BTreeSet::new();
        let key = |k: usize| {
            let (a, b, c) = self.tasks[k].id.target_key();
            (a, b, c, k)
        };
        for k in 0..self.tasks.len() {
            if deps[k] == 0 {
                ready.insert(key(k));
            }
        }
        let mut out = Vec::with_capacity(self.tasks.len());
        while let Some(e) = ready.pop_first() {
            let k = e.3;
            out.push(k);
            for &d in &self.tasks[k].outputs {
                pending[d] -= 1;
                if pending[d] == 0 {
                    for &c in &self.messages[d].consumers {
                        deps[c] -= 1;
                        if deps[c] == 0 {
                            ready.insert(key(c));
                        }
                    }
                }
            }
        }
        (out.len() == self.tasks.len()).then_some(out)
    }

    pub fn count_tasks(&self, kind: TaskKind) -> usize {
        self.tasks.iter().filter(|t| t.id.kind == kind).count()
    }

    /// Cross-rank messages of one kind.
    pub fn remote_messages(&self, kind: MsgKind) -> impl Iterator<Item = &MessageDescriptor> {
        self.messages.iter().filter(move |m| m.kind == kind && m.is_remote())
    }
}

/// Update pairs `(src, tgt)` with the source rows landing in the target:
/// `(block_rows, out_rows)` where out rows start at the target's first column.
pub(crate) fn update_pairs(sf: &SymbolicFactor) -> Vec<(usize, usize, usize, Vec<usize>)> {
    let mut out = Vec::new();
    for (i, sn) in sf.snodes.iter().enumerate() {
        let rows = &sf.sn_rows[i];
        let mut k = sn.width();
        while k < rows.len() {
            let j = sf.col_snode[rows[k]];
            let tgt = sf.snodes[j];
            let block_end = rows.partition_point(|&r| r < tgt.end);
            out.push((i, j, block_end - k, rows[k..].to_vec()));
            k = block_end;
        }
    }
    out
}

/// Builds the fan-both task graph of a symbolic factorization under a computation map.
pub fn build_task_graph(sf: &SymbolicFactor, m: &ComputationMap) -> TaskGraph {
    let nsn = sf.num_snodes();
    let pairs = update_pairs(sf);
    let mut by_target: Vec<Vec<usize>> = vec![Vec::new(); nsn];
    for (k, p) in pairs.iter().enumerate() {
        by_target[p.1].push(k);
    }

    let mut tasks: Vec<(TaskId, Rank, f64)> = Vec::new();
    let mut update_task = vec![0usize; pairs.len()];
    let mut agg_task: Vec<Option<usize>> = vec![None; nsn];
    let mut factor_task = vec![0usize; nsn];
    for j in 0..nsn {
        let w = sf.snodes[j].width();
        let mut agg_work = 0.0;
        for &k in &by_target[j] {
            let (i, _, block_rows, ref out_rows) = pairs[k];
            let id = TaskId::update(i, j);
            update_task[k] = tasks.len();
            tasks.push((id, owner_of_task(&id, m), update_flops(out_rows.len(), block_rows, sf.snodes[i].width())));
            agg_work += apply_flops(out_rows.len(), w);
        }
        if !by_target[j].is_empty() {
            let id = TaskId::aggregate(j);
            agg_task[j] = Some(tasks.len());
            tasks.push((id, owner_of_task(&id, m), agg_work));
        }
        let id = TaskId::factor(j);
        factor_task[j] = tasks.len();
        tasks.push((id, owner_of_task(&id, m), factor_flops(sf.sn_rows[j].len(), w)));
    }

    let mut messages = Vec::new();
    // Factor of i, once per consuming rank.
    let mut by_source: Vec<BTreeMap<Rank, Vec<usize>>> = vec![BTreeMap::new(); nsn];
    for (k, p) in pairs.iter().enumerate() {
        let t = update_task[k];
        by_source[p.0].entry(tasks[t].1).or_default().push(t);
    }
    for (i, groups) in by_source.into_iter().enumerate() {
        let f = factor_task[i];
        for (rank, consumers) in groups {
            let first_tgt = consumers.iter().map(|&c| tasks[c].0.tgt).min().unwrap_or(i);
            messages.push(MessageDescriptor {
                kind: MsgKind::Factor,
                src_snode: i,
                tgt_snode: first_tgt,
                from_rank: tasks[f].1,
                to_rank: rank,
                bytes: panel_bytes(sf.sn_rows[i].len(), sf.snodes[i].width()),
                producers: vec![f],
                consumers,
                rows: Vec::new(),
            });
        }
    }
    // Accumulated aggregate a^(p)_j, once per producing rank.
    for j in 0..nsn {
        let Some(a) = agg_task[j] else { continue };
        let mut groups: BTreeMap<Rank, (Vec<usize>, BTreeSet<usize>, usize)> = BTreeMap::new();
        for &k in &by_target[j] {
            let t = update_task[k];
            let g = groups.entry(tasks[t].1).or_insert_with(|| (Vec::new(), BTreeSet::new(), usize::MAX));
            g.0.push(t);
            g.1.extend(pairs[k].3.iter().copied());
            g.2 = g.2.min(pairs[k].0);
        }
        for (rank, (producers, rows, first_src)) in groups {
            let rows: Vec<usize> = rows.into_iter().collect();
            messages.push(MessageDescriptor {
                kind: MsgKind::Aggregate,
                src_snode: first_src,
                tgt_snode: j,
                from_rank: rank,
                to_rank: tasks[a].1,
                bytes: panel_bytes(rows.len(), sf.snodes[j].width()),
                producers,
                consumers: vec![a],
                rows,
            });
        }
        messages.push(MessageDescriptor {
            kind: MsgKind::Control,
            src_snode: j,
            tgt_snode: j,
            from_rank: tasks[a].1,
            to_rank: tasks[factor_task[j]].1,
            bytes: 0,
            producers: vec![a],
            consumers: vec![factor_task[j]],
            rows: Vec::new(),
        });
    }
    TaskGraph::from_parts(m.procs(), Some(*m), tasks, messages)
        .expect("graph built from a consistent symbolic factor")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct CommBound {
    /// Ranks other than the factor's own that need factor `i`.
    pub factor_dests: usize,
    /// Ranks other than the aggregating one that send updates into `j`.
    pub aggregate_dests: usize,
}

/// Per-supernode upper bounds on message destinations, read off the map.
pub fn comm_bounds(sf: &SymbolicFactor, m: &ComputationMap) -> Vec<CommBound> {
    let nsn = sf.num_snodes();
    let mut fdest: Vec<BTreeSet<Rank>> = vec![BTreeSet::new(); nsn];
    let mut adest: Vec<BTreeSet<Rank>> = vec![BTreeSet::new(); nsn];
    for (i, j, _, _) in update_pairs(sf) {
        let r = owner_of_task(&TaskId::update(i, j), m);
        fdest[i].insert(r);
        adest[j].insert(r);
    }
    (0..nsn)
        .map(|s| {
            let own = owner_of_task(&TaskId::factor(s), m);
            CommBound {
                factor_dests: fdest[s].iter().filter(|&&r| r != own).count(),
                aggregate_dests: adest[s].iter().filter(|&&r| r != own).count(),
            }
        })
        .collect()
}
