//! Computation maps: closed-form generators that assign factorization,
//! update and aggregation tasks to ranks.
//!
//! A map is a function of two supernode indices and is never materialized.
//! The first argument is the row of the conceptual grid and the second the
//! column. Fan-in (`mod(i, P)`) is constant along rows, fan-out (`mod(j, P)`)
//! along columns, and fan-both uses `r × r` blocks with `r ≈ √P` so each row
//! and column meets only `r` ranks.
//!
//! An update `U(src, tgt)` is evaluated at `(src, tgt)`. Under fan-in it then
//! runs on the rank that owns the source factor, so only aggregates travel;
//! under fan-out it runs with the target, so only factors travel.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub type Rank = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    FanIn,
    FanOut,
    FanBoth,
}

impl MapKind {
    pub const ALL: [MapKind; 3] = [MapKind::FanIn, MapKind::FanOut, MapKind::FanBoth];
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::FanIn => "fanin",
            MapKind::FanOut => "fanout",
            MapKind::FanBoth => "fanboth",
        })
    }
}

impl FromStr for MapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fanin" => Ok(MapKind::FanIn),
            "fanout" => Ok(MapKind::FanOut),
            "fanboth" => Ok(MapKind::FanBoth),
            other => Err(format!("unknown map `{other}` (expected fanin, fanout or fanboth)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComputationMap {
    kind: MapKind,
    procs: usize,
    block: usize,
}

impl ComputationMap {
    /// # Panics
    /// If `procs` is zero.
    pub fn new(kind: MapKind, procs: usize) -> Self {
        assert!(procs >= 1, "a computation map needs at least one rank");
        Self { kind, procs, block: fan_both_block(procs) }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn procs(&self) -> usize {
        self.procs
    }

    /// Block side `r` used by fan-both.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn value(&self, i: usize, j: usize) -> Rank {
        map_value(self, i, j)
    }
}

/// Largest divisor of `p` not exceeding `√p`.
fn fan_both_block(p: usize) -> usize {
    let mut r = (p as f64).sqrt().floor() as usize;
    while r * r > p {
        r -= 1;
    }
    while r > 1 && p % r != 0 {
        r -= 1;
    }
    r.max(1)
}

pub fn map_value(m: &ComputationMap, i: usize, j: usize) -> Rank {
    let p = m.procs;
    match m.kind {
        MapKind::FanIn => i % p,
        MapKind::FanOut => j % p,
        MapKind::FanBoth => {
            let r = m.block;
            i % r + r * ((j % p) / r)
        }
    }
}

/// 1D-cyclic owner of a supernode.
pub fn owner_of_supernode(s: usize, procs: usize) -> Rank {
    s % procs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    /// Update: contribution of a source supernode to a later target.
    U,
    /// Aggregation: apply accumulated updates to a supernode.
    A,
    /// Factorization of one supernode.
    F,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::F => "F",
            TaskKind::U => "U",
            TaskKind::A => "A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskId {
    pub kind: TaskKind,
    pub src: usize,
    pub tgt: usize,
}

impl TaskId {
    pub fn factor(s: usize) -> Self {
        Self { kind: TaskKind::F, src: s, tgt: s }
    }

    pub fn aggregate(s: usize) -> Self {
        Self { kind: TaskKind::A, src: s, tgt: s }
    }

    pub fn update(src: usize, tgt: usize) -> Self {
        Self { kind: TaskKind::U, src, tgt }
    }

    /// Target-major key: tasks by target, then source, with `U < A < F`
    /// so aggregation precedes factorization of the same supernode.
    pub fn target_key(&self) -> (usize, usize, TaskKind) {
        (self.tgt, self.src, self.kind)
    }

    /// Source-major key (right-looking order).
    pub fn source_key(&self) -> (usize, usize, TaskKind) {
        (self.src, self.tgt, self.kind)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.src, self.tgt)
    }
}

pub fn owner_of_task(t: &TaskId, m: &ComputationMap) -> Rank {
    match t.kind {
        TaskKind::F | TaskKind::A => map_value(m, t.src, t.src),
        TaskKind::U => map_value(m, t.src, t.tgt),
    }
}
