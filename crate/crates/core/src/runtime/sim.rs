//! Discrete-event execution of a task graph on `P` simulated ranks.
//!
//! Every rank alternates between communication bookkeeping and running one
//! task at a time. Cross-rank interaction happens only through the event
//! queue: transfers, notifications and one-sided gets complete at a
//! simulated time given by the cost model, and ties are broken by insertion
//! order so a run is a pure function of its inputs.

use std::cmp::Ordering as CmpOrdering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Protocol, RunConfig, Schedule};
use super::stats::{RunStats, TraceEvent, TraceKind};
use super::{find_wait_cycle, RunOutput};
use crate::error::{Error, Result};
use crate::kernels::{accumulate, apply_aggregates, compute_update, factor_panel, AggregateVector, Panel};
use crate::mapping::{Rank, TaskKind};
use crate::matrix::SparseSymMatrix;
use crate::symbolic::SymbolicFactor;
use crate::taskgraph::{MsgKind, TaskGraph, TaskOrder};

type Key = (usize, usize, TaskKind);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MsgState {
    Unproduced,
    /// Complete on the producer, not yet handed to the network.
    Ready,
    /// Occupies a send slot, waiting for the matching receive.
    InSlot,
    Transferring,
    /// Notification queued at the consumer.
    Signaled,
    Delivered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TaskState {
    Waiting,
    Running,
    Done,
}

#[derive(Debug, Clone, Copy)]
enum EvKind {
    TaskDone(usize),
    TransferDone(usize),
    SignalArrive(usize),
    GetDone(usize),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EvKind,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == CmpOrdering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    // reversed: BinaryHeap pops the earliest event
    fn cmp(&self, o: &Self) -> CmpOrdering {
        o.time.total_cmp(&self.time).then(o.seq.cmp(&self.seq))
    }
}

struct RankState {
    busy: bool,
    /// Tasks not yet started, in the protocol's static order.
    pending: BTreeSet<(Key, usize)>,
    /// Runnable tasks (pull: all inputs delivered).
    rtq: BTreeSet<usize>,
    /// Task chosen and waiting for its receives (push).
    selected: Option<usize>,
    /// Produced remote messages not yet sent, by (label, index).
    outbox: BTreeSet<(Key, usize)>,
    slots: BTreeSet<usize>,
    posted: usize,
    notifications: VecDeque<usize>,
    blocked_send: bool,
    live_agg_bytes: usize,
}

struct Numeric<'a> {
    sf: &'a SymbolicFactor,
    panels: Vec<Panel>,
    have_factor: Vec<BTreeSet<usize>>,
    agg: Vec<Option<AggregateVector>>,
    inbox: Vec<Vec<AggregateVector>>,
}

pub(super) struct Sim<'a> {
    g: &'a TaskGraph,
    cfg: &'a RunConfig,
    order: TaskOrder,
    now: f64,
    seq: u64,
    heap: BinaryHeap<Event>,
    duration: Vec<f64>,
    deps: Vec<usize>,
    tstate: Vec<TaskState>,
    remaining: usize,
    pending_producers: Vec<usize>,
    mstate: Vec<MsgState>,
    label: Vec<Key>,
    posted: Vec<bool>,
    /// Aggregate data still held by its producing rank.
    producer_buf: Vec<bool>,
    /// Aggregate data delivered and not yet consumed.
    inbox_buf: Vec<bool>,
    ranks: Vec<RankState>,
    live_agg_total: usize,
    num: Option<Numeric<'a>>,
    stats: RunStats,
    trace: Vec<TraceEvent>,
}

impl<'a> Sim<'a> {
    pub(super) fn new(
        g: &'a TaskGraph,
        numeric: Option<(&SparseSymMatrix, &'a SymbolicFactor)>,
        cfg: &'a RunConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if g.procs != cfg.procs {
            return Err(Error::InvalidConfig(format!(
                "graph built for {} ranks, configuration asks for {}",
                g.procs, cfg.procs
            )));
        }
        let order = cfg.protocol.task_order();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let duration = g
            .tasks
            .iter()
            .map(|t| {
                let u: f64 = rng.gen();
                cfg.cost.gamma * t.flops * (1.0 + cfg.perturbation * u)
            })
            .collect();
        let mut ranks: Vec<RankState> = (0..cfg.procs)
            .map(|_| RankState {
                busy: false,
                pending: BTreeSet::new(),
                rtq: BTreeSet::new(),
                selected: None,
                outbox: BTreeSet::new(),
                slots: BTreeSet::new(),
                posted: 0,
                notifications: VecDeque::new(),
                blocked_send: false,
                live_agg_bytes: 0,
            })
            .collect();
        for (k, t) in g.tasks.iter().enumerate() {
            ranks[t.owner].pending.insert((order.key(&t.id), k));
            if t.deps_in == 0 {
                ranks[t.owner].rtq.insert(k);
            }
        }
        let label = g
            .messages
            .iter()
            .map(|m| m.consumers.iter().map(|&c| g.tasks[c].id.target_key()).min().expect("message has consumers"))
            .collect();
        let snodes = g.tasks.iter().map(|t| t.id.tgt + 1).max().unwrap_or(0);
        let num = match numeric {
            Some((a, sf)) => {
                let panels = (0..sf.num_snodes()).map(|s| Panel::from_matrix(a, sf, s)).collect::<Result<Vec<_>>>()?;
                Some(Numeric {
                    sf,
                    panels,
                    have_factor: vec![BTreeSet::new(); cfg.procs],
                    agg: vec![None; g.messages.len()],
                    inbox: vec![Vec::new(); sf.num_snodes()],
                })
            }
            None => None,
        };
        Ok(Self {
            g,
            cfg,
            order,
            now: 0.0,
            seq: 0,
            heap: BinaryHeap::new(),
            duration,
            deps: g.tasks.iter().map(|t| t.deps_in).collect(),
            tstate: vec![TaskState::Waiting; g.tasks.len()],
            remaining: g.tasks.len(),
            pending_producers: g.messages.iter().map(|m| m.producers.len()).collect(),
            mstate: vec![MsgState::Unproduced; g.messages.len()],
            label,
            posted: vec![false; g.messages.len()],
            producer_buf: vec![false; g.messages.len()],
            inbox_buf: vec![false; g.messages.len()],
            ranks,
            live_agg_total: 0,
            num,
            stats: RunStats::new(cfg.procs, snodes),
            trace: Vec::new(),
        })
    }

    pub(super) fn run(mut self) -> Result<RunOutput> {
        self.advance_all()?;
        while let Some(ev) = self.heap.pop() {
            self.now = ev.time;
            match ev.kind {
                EvKind::TaskDone(t) => self.task_done(t)?,
                EvKind::TransferDone(m) => {
                    let from = self.g.messages[m].from_rank;
                    self.ranks[from].slots.remove(&m);
                    self.ranks[self.g.messages[m].to_rank].posted -= 1;
                    self.deliver(m)?;
                }
                EvKind::SignalArrive(m) => {
                    let to = self.g.messages[m].to_rank;
                    self.mstate[m] = MsgState::Signaled;
                    self.ranks[to].notifications.push_back(m);
                    self.record(to, TraceKind::Signal, self.msg_id(m));
                }
                EvKind::GetDone(m) => {
                    let to = self.g.messages[m].to_rank;
                    self.ranks[to].busy = false;
                    if self.g.messages[m].kind == MsgKind::Aggregate && !self.producer_buf[m] {
                        return Err(Error::Protocol(format!("fetch after free of {}", self.msg_id(m))));
                    }
                    self.deliver(m)?;
                }
            }
            self.advance_all()?;
        }
        self.stats.makespan = self.now;
        self.stats.tasks_executed = self.g.tasks.len() - self.remaining;
        self.stats.live_aggregate_buffers = self.producer_buf.iter().chain(&self.inbox_buf).filter(|&&b| b).count() as u64;
        if self.remaining > 0 {
            self.stats.deadlock = Some(self.wait_cycle());
        }
        let panels = self.num.map(|n| n.panels);
        Ok(RunOutput { stats: self.stats, panels, trace: self.trace })
    }

    fn push_event(&mut self, delay: f64, kind: EvKind) {
        self.seq += 1;
        self.heap.push(Event { time: self.now + delay, seq: self.seq, kind });
    }

    fn record(&mut self, rank: Rank, event: TraceKind, id: String) {
        if self.cfg.record_trace {
            self.trace.push(TraceEvent { time: self.now, rank, event, id });
        }
    }

    fn msg_id(&self, m: usize) -> String {
        let d = &self.g.messages[m];
        format!("{:?}#{m}({},{})", d.kind, d.src_snode, d.tgt_snode)
    }

    fn advance_all(&mut self) -> Result<()> {
        for r in 0..self.cfg.procs {
            self.advance(r)?;
        }
        Ok(())
    }

    fn advance(&mut self, r: Rank) -> Result<()> {
        if self.ranks[r].busy {
            return Ok(());
        }
        let push = self.cfg.protocol.is_push();
        if !push {
            if let Some(m) = self.ranks[r].notifications.pop_front() {
                // blocking get
                self.ranks[r].busy = true;
                let cost = self.cfg.cost.message(self.g.messages[m].bytes);
                self.record(r, TraceKind::Get, self.msg_id(m));
                self.push_event(cost, EvKind::GetDone(m));
                return Ok(());
            }
        } else if !self.flush(r) {
            return Ok(());
        }
        let Some(t) = self.select(r) else { return Ok(()) };
        if push {
            self.ranks[r].selected = Some(t);
            if !self.post_receives(r, t) {
                return Ok(());
            }
            self.ranks[r].selected = None;
        } else if self.deps[t] > 0 {
            return Ok(());
        }
        self.start(r, t);
        Ok(())
    }

    /// Sends what the protocol allows; false while blocked on a full slot set.
    fn flush(&mut self, r: Rank) -> bool {
        let limit = match self.cfg.protocol {
            Protocol::PushOrdered => self.ranks[r].pending.first().map(|&(k, _)| k),
            _ => None,
        };
        self.ranks[r].blocked_send = false;
        while let Some(&(label, m)) = self.ranks[r].outbox.first() {
            if limit.is_some_and(|lim| label >= lim) {
                break;
            }
            if self.ranks[r].slots.len() >= self.cfg.send_slots {
                self.ranks[r].blocked_send = true;
                return false;
            }
            self.ranks[r].outbox.pop_first();
            self.ranks[r].slots.insert(m);
            self.mstate[m] = MsgState::InSlot;
            self.record(r, TraceKind::Send, self.msg_id(m));
            if self.posted[m] {
                self.start_transfer(m);
            }
        }
        true
    }

    fn start_transfer(&mut self, m: usize) {
        self.mstate[m] = MsgState::Transferring;
        let cost = self.cfg.cost.message(self.g.messages[m].bytes);
        self.push_event(cost, EvKind::TransferDone(m));
    }

    fn select(&self, r: Rank) -> Option<usize> {
        let rs = &self.ranks[r];
        if let Some(t) = rs.selected {
            return Some(t);
        }
        let next = rs.pending.first().map(|&(_, t)| t);
        match self.cfg.schedule {
            Schedule::Static => next,
            Schedule::Dynamic => {
                let policy = self.cfg.policy;
                let ready = |t: &usize| {
                    if self.cfg.protocol.is_push() {
                        self.g.tasks[*t].inputs.iter().all(|&m| {
                            matches!(self.mstate[m], MsgState::InSlot | MsgState::Transferring | MsgState::Delivered)
                        })
                    } else {
                        rs.rtq.contains(t)
                    }
                };
                let best = if self.cfg.protocol.is_push() {
                    rs.pending.iter().map(|&(_, t)| t).filter(ready).min_by(|a, b| policy(&self.g.tasks[*a].id, &self.g.tasks[*b].id))
                } else {
                    rs.rtq.iter().copied().min_by(|a, b| policy(&self.g.tasks[*a].id, &self.g.tasks[*b].id))
                };
                // push falls back to a blocking receive on the next task
                best.or(if self.cfg.protocol.is_push() { next } else { None })
            }
        }
    }

    /// Posts receives for undelivered inputs of `t`; true once all arrived.
    fn post_receives(&mut self, r: Rank, t: usize) -> bool {
        let mut missing: Vec<usize> =
            self.g.tasks[t].inputs.iter().copied().filter(|&m| self.mstate[m] != MsgState::Delivered).collect();
        if missing.is_empty() {
            return true;
        }
        missing.sort_by_key(|&m| (self.label[m], m));
        for m in missing {
            if self.posted[m] {
                continue;
            }
            if self.ranks[r].posted >= self.cfg.recv_slots {
                break;
            }
            self.posted[m] = true;
            self.ranks[r].posted += 1;
            if self.mstate[m] == MsgState::InSlot {
                self.start_transfer(m);
            }
        }
        false
    }

    fn start(&mut self, r: Rank, t: usize) {
        let rs = &mut self.ranks[r];
        rs.pending.remove(&(self.order.key(&self.g.tasks[t].id), t));
        rs.rtq.remove(&t);
        rs.busy = true;
        self.tstate[t] = TaskState::Running;
        self.stats.per_rank[r].busy_time += self.duration[t];
        self.record(r, TraceKind::TaskStart, self.g.tasks[t].id.to_string());
        self.push_event(self.duration[t], EvKind::TaskDone(t));
    }

    fn task_done(&mut self, t: usize) -> Result<()> {
        let task = &self.g.tasks[t];
        let r = task.owner;
        debug_assert_eq!(self.tstate[t], TaskState::Running);
        self.tstate[t] = TaskState::Done;
        self.remaining -= 1;
        self.ranks[r].busy = false;
        self.stats.per_rank[r].tasks_executed += 1;
        self.record(r, TraceKind::TaskEnd, task.id.to_string());
        self.execute_numeric(t)?;
        // consumed aggregates leave the inbox
        for &m in &task.inputs {
            if self.inbox_buf[m] {
                self.inbox_buf[m] = false;
                self.release(self.g.messages[m].to_rank, self.g.messages[m].bytes);
            }
        }
        for &m in &task.outputs {
            let d = &self.g.messages[m];
            if d.kind == MsgKind::Aggregate && !self.producer_buf[m] && self.mstate[m] == MsgState::Unproduced {
                self.producer_buf[m] = true;
                self.stats.aggregate_allocs += 1;
                self.hold(d.from_rank, d.bytes);
            }
            self.pending_producers[m] -= 1;
            if self.pending_producers[m] == 0 {
                self.produced(m)?;
            }
        }
        Ok(())
    }

    fn execute_numeric(&mut self, t: usize) -> Result<()> {
        let Some(num) = self.num.as_mut() else { return Ok(()) };
        let task = &self.g.tasks[t];
        let id = task.id;
        match id.kind {
            TaskKind::F => {
                factor_panel(&mut num.panels[id.src])?;
                num.have_factor[task.owner].insert(id.src);
            }
            TaskKind::A => {
                let aggs = std::mem::take(&mut num.inbox[id.src]);
                apply_aggregates(&mut num.panels[id.src], &aggs)?;
            }
            TaskKind::U => {
                if !num.have_factor[task.owner].contains(&id.src) {
                    return Err(Error::Protocol(format!("{id} ran on rank {} without factor {}", task.owner, id.src)));
                }
                let tgt = num.sf.snodes[id.tgt];
                let upd = compute_update(&num.panels[id.src], id.tgt, tgt.first, tgt.width(), &num.sf.sn_rows[id.tgt])?;
                let m = *task
                    .outputs
                    .iter()
                    .find(|&&m| self.g.messages[m].kind == MsgKind::Aggregate)
                    .ok_or_else(|| Error::Structure(format!("{id} has no aggregate output")))?;
                let d = &self.g.messages[m];
                let buf = num.agg[m].get_or_insert_with(|| {
                    AggregateVector::zeros(d.from_rank, id.tgt, tgt.first, tgt.width(), d.rows.clone())
                });
                accumulate(buf, &upd)?;
            }
        }
        Ok(())
    }

    fn hold(&mut self, r: Rank, bytes: usize) {
        self.ranks[r].live_agg_bytes += bytes;
        self.live_agg_total += bytes;
        let rs = &mut self.stats.per_rank[r];
        rs.peak_live_aggregate_bytes = rs.peak_live_aggregate_bytes.max(self.ranks[r].live_agg_bytes);
        self.stats.peak_live_aggregate_bytes = self.stats.peak_live_aggregate_bytes.max(self.live_agg_total);
    }

    fn release(&mut self, r: Rank, bytes: usize) {
        self.ranks[r].live_agg_bytes -= bytes;
        self.live_agg_total -= bytes;
    }

    fn produced(&mut self, m: usize) -> Result<()> {
        let d = &self.g.messages[m];
        self.mstate[m] = MsgState::Ready;
        if !d.is_remote() {
            return self.deliver(m);
        }
        self.stats.messages.add(d.kind, 1);
        self.stats.bytes.add(d.kind, d.bytes as u64);
        let rs = &mut self.stats.per_rank[d.from_rank];
        rs.messages_sent.add(d.kind, 1);
        rs.bytes_sent.add(d.kind, d.bytes as u64);
        match d.kind {
            MsgKind::Factor => {
                self.stats.per_snode[d.src_snode].factor_dests.insert(d.to_rank);
            }
            MsgKind::Aggregate => {
                self.stats.per_snode[d.tgt_snode].aggregate_srcs.insert(d.from_rank);
            }
            MsgKind::Control => {}
        }
        if self.cfg.protocol.is_push() {
            self.ranks[d.from_rank].outbox.insert((self.label[m], m));
        } else {
            self.stats.notifications += 1;
            self.stats.per_rank[d.from_rank].notifications_sent += 1;
            let alpha = self.cfg.cost.alpha;
            self.push_event(alpha, EvKind::SignalArrive(m));
        }
        Ok(())
    }

    fn deliver(&mut self, m: usize) -> Result<()> {
        let d = &self.g.messages[m];
        if self.mstate[m] == MsgState::Delivered {
            return Err(Error::Protocol(format!("{} delivered twice", self.msg_id(m))));
        }
        self.mstate[m] = MsgState::Delivered;
        if d.is_remote() {
            self.record(d.to_rank, TraceKind::Receive, self.msg_id(m));
        }
        if d.kind == MsgKind::Aggregate {
            if !self.producer_buf[m] {
                return Err(Error::Protocol(format!("double free of {}", self.msg_id(m))));
            }
            self.producer_buf[m] = false;
            self.stats.aggregate_frees += 1;
            self.release(d.from_rank, d.bytes);
            self.record(d.from_rank, TraceKind::Free, self.msg_id(m));
            self.inbox_buf[m] = true;
            self.hold(d.to_rank, d.bytes);
            if let Some(num) = self.num.as_mut() {
                let buf = num.agg[m]
                    .take()
                    .ok_or_else(|| Error::Protocol(format!("aggregate {m} delivered without data")))?;
                num.inbox[d.tgt_snode].push(buf);
            }
        }
        if d.kind == MsgKind::Factor {
            if let Some(num) = self.num.as_mut() {
                num.have_factor[d.to_rank].insert(d.src_snode);
            }
        }
        for &c in &d.consumers {
            self.deps[c] -= 1;
            if self.deps[c] == 0 {
                self.ranks[d.to_rank].rtq.insert(c);
            }
        }
        Ok(())
    }

    /// Wait-for edges of the stuck state, then a cycle through them.
    fn wait_cycle(&self) -> Vec<Rank> {
        let mut edges: Vec<BTreeSet<Rank>> = vec![BTreeSet::new(); self.cfg.procs];
        for (r, rs) in self.ranks.iter().enumerate() {
            if rs.blocked_send {
                for &m in &rs.slots {
                    edges[r].insert(self.g.messages[m].to_rank);
                }
                continue;
            }
            let waiting = rs.selected.or_else(|| rs.pending.first().map(|&(_, t)| t));
            if let Some(t) = waiting {
                for &m in &self.g.tasks[t].inputs {
                    // data already in a send slot waits on us, not the other way round
                    if matches!(self.mstate[m], MsgState::Unproduced | MsgState::Ready | MsgState::Signaled) {
                        let from = self.g.messages[m].from_rank;
                        if from != r {
                            edges[r].insert(from);
                        }
                    }
                }
            }
        }
        let edges: Vec<Vec<Rank>> = edges.into_iter().map(|s| s.into_iter().collect()).collect();
        find_wait_cycle(&edges).unwrap_or_else(|| (0..self.cfg.procs).filter(|&r| !edges[r].is_empty()).collect())
    }
}
