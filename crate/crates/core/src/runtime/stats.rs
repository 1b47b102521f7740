use std::collections::BTreeSet;

use serde::Serialize;

use crate::mapping::Rank;
use crate::taskgraph::{CommBound, MsgKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KindCounts {
    pub factor: u64,
    pub aggregate: u64,
}

impl KindCounts {
    pub fn add(&mut self, kind: MsgKind, v: u64) {
        match kind {
            MsgKind::Factor => self.factor += v,
            MsgKind::Aggregate => self.aggregate += v,
            MsgKind::Control => {}
        }
    }

    pub fn total(&self) -> u64 {
        self.factor + self.aggregate
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RankStats {
    pub rank: Rank,
    pub tasks_executed: usize,
    pub messages_sent: KindCounts,
    pub bytes_sent: KindCounts,
    pub notifications_sent: u64,
    pub peak_live_aggregate_bytes: usize,
    pub busy_time: f64,
}

/// Distinct ranks that factor `s` was shipped to / that shipped aggregates into `s`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SnodeTraffic {
    pub factor_dests: BTreeSet<Rank>,
    pub aggregate_srcs: BTreeSet<Rank>,
}

impl SnodeTraffic {
    pub fn within(&self, bound: &CommBound) -> bool {
        self.factor_dests.len() <= bound.factor_dests && self.aggregate_srcs.len() <= bound.aggregate_dests
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub procs: usize,
    pub tasks_executed: usize,
    pub messages: KindCounts,
    pub bytes: KindCounts,
    pub notifications: u64,
    pub peak_live_aggregate_bytes: usize,
    pub aggregate_allocs: u64,
    pub aggregate_frees: u64,
    /// Aggregate buffers still allocated when the run stopped.
    pub live_aggregate_buffers: u64,
    pub makespan: f64,
    pub per_rank: Vec<RankStats>,
    pub per_snode: Vec<SnodeTraffic>,
    pub deadlock: Option<Vec<Rank>>,
}

impl RunStats {
    pub(crate) fn new(procs: usize, snodes: usize) -> Self {
        Self {
            procs,
            per_rank: (0..procs).map(|rank| RankStats { rank, ..Default::default() }).collect(),
            per_snode: vec![SnodeTraffic::default(); snodes],
            ..Default::default()
        }
    }

    /// Measured destinations never exceed the bounds read off the map.
    pub fn within_bounds(&self, bounds: &[CommBound]) -> bool {
        self.per_snode.len() == bounds.len() && self.per_snode.iter().zip(bounds).all(|(t, b)| t.within(b))
    }

    /// One-line comma-separated summary for plotting.
    pub fn csv_header() -> &'static str {
        "procs,tasks,factor_msgs,aggregate_msgs,factor_bytes,aggregate_bytes,notifications,peak_live_aggregate_bytes,makespan,deadlock"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.procs,
            self.tasks_executed,
            self.messages.factor,
            self.messages.aggregate,
            self.bytes.factor,
            self.bytes.aggregate,
            self.notifications,
            self.peak_live_aggregate_bytes,
            self.makespan,
            self.deadlock.is_some()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    TaskStart,
    TaskEnd,
    Send,
    Receive,
    Signal,
    Get,
    Free,
}

/// One record of the optional event trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub time: f64,
    pub rank: Rank,
    pub event: TraceKind,
    pub id: String,
}

/// Newline-delimited JSON, one record per line.
pub fn trace_to_ndjson(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in trace {
        out.push_str(&serde_json::to_string(e).expect("trace records serialize"));
        out.push('\n');
    }
    out
}
