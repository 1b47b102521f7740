use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::mapping::{MapKind, TaskId};
use crate::taskgraph::TaskOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Producer sends as soon as data exists; ranks walk tasks in source order.
    Push,
    /// Push constrained to non-decreasing (target, source) order of tasks and messages.
    PushOrdered,
    /// Producer signals, consumer fetches with a one-sided get while polling.
    Pull,
}

impl Protocol {
    pub fn task_order(self) -> TaskOrder {
        match self {
            Protocol::Push => TaskOrder::SourceMajor,
            Protocol::PushOrdered | Protocol::Pull => TaskOrder::TargetMajor,
        }
    }

    pub fn is_push(self) -> bool {
        matches!(self, Protocol::Push | Protocol::PushOrdered)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Push => "push",
            Protocol::PushOrdered => "push-ordered",
            Protocol::Pull => "pull",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "push" => Ok(Protocol::Push),
            "push-ordered" | "pushordered" => Ok(Protocol::PushOrdered),
            "pull" => Ok(Protocol::Pull),
            other => Err(format!("unknown protocol `{other}` (expected push, push-ordered or pull)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Each rank executes its tasks in the protocol's fixed order.
    Static,
    /// Each rank picks the best ready task by the scheduling policy.
    Dynamic,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Static => "static",
            Schedule::Dynamic => "dynamic",
        })
    }
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Schedule::Static),
            "dynamic" => Ok(Schedule::Dynamic),
            other => Err(format!("unknown schedule `{other}` (expected static or dynamic)")),
        }
    }
}

/// Simulated time units: a task costs `gamma * flops`, a message
/// `alpha + beta * bytes`, a notification `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { alpha: 1000.0, beta: 1.0, gamma: 0.5 }
    }
}

impl CostModel {
    pub fn message(&self, bytes: usize) -> f64 {
        self.alpha + self.beta * bytes as f64
    }
}

/// Comparator over ready tasks; smaller runs first.
pub type Policy = fn(&TaskId, &TaskId) -> Ordering;

/// Default dynamic policy: the deadlock-avoiding (target, source) order.
pub fn target_source_policy(a: &TaskId, b: &TaskId) -> Ordering {
    a.target_key().cmp(&b.target_key())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub schedule: Schedule,
    pub procs: usize,
    pub send_slots: usize,
    pub recv_slots: usize,
    pub map: MapKind,
    pub seed: u64,
    /// Task durations are scaled by a uniform draw from `[1, 1 + perturbation]`.
    pub perturbation: f64,
    pub cost: CostModel,
    #[serde(skip)]
    pub policy: Policy,
    pub record_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Pull,
            schedule: Schedule::Dynamic,
            procs: 1,
            send_slots: 4,
            recv_slots: 4,
            map: MapKind::FanBoth,
            seed: 0,
            perturbation: 0.0,
            cost: CostModel::default(),
            policy: target_source_policy,
            record_trace: false,
        }
    }
}

impl RunConfig {
    pub fn new(procs: usize, map: MapKind, protocol: Protocol, schedule: Schedule) -> Self {
        Self { procs, map, protocol, schedule, ..Self::default() }
    }

    pub fn with_slots(mut self, send: usize, recv: usize) -> Self {
        self.send_slots = send;
        self.recv_slots = recv;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_perturbation(mut self, v: f64) -> Self {
        self.perturbation = v;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.procs == 0 || self.send_slots == 0 || self.recv_slots == 0 {
            return Err(crate::Error::InvalidConfig(
                "processor count and buffer slots must be at least 1".into(),
            ));
        }
        if !(self.perturbation >= 0.0) {
            return Err(crate::Error::InvalidConfig("perturbation must be non-negative".into()));
        }
        Ok(())
    }
}
