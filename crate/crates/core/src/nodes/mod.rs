//! NWDAF state machines.
//!
//! Nodes are driven by the engine with `(state, input, now)` and answer with
//! a list of [`Action`]s. They never touch the event queue directly.

mod leaf;
mod root;

pub use leaf::{LeafNode, PendingWork, Subscription};
pub use root::{RootMode, RootNode};

use serde::{Deserialize, Serialize};

use crate::protocol::{EventId, Message, ModelTypeId, NfId, NodeId};

/// Per-node service times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceTimes {
    /// One inference on a leaf or a stand-alone NWDAF.
    pub inference_s: f64,
    /// Training one model at the root (MTLF).
    pub training_s: f64,
    /// Handling one incoming message at the root or a baseline NWDAF.
    pub root_proc_s: f64,
    /// Inference on a stand-alone (CONV/MULTI) NWDAF. Falls back to
    /// `inference_s` when unset.
    pub baseline_inference_s: Option<f64>,
}

impl ServiceTimes {
    pub fn baseline_inference(&self) -> f64 {
        self.baseline_inference_s.unwrap_or(self.inference_s)
    }
}

impl Default for ServiceTimes {
    fn default() -> Self {
        Self {
            inference_s: 0.05,
            training_s: 30.0,
            root_proc_s: 0.01,
            baseline_inference_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimerKind {
    /// Periodic analytics delivery of a leaf subscription.
    LeafDelivery {
        nf_id: NfId,
        type_id: ModelTypeId,
        generation: u64,
    },
    /// Periodic analytics delivery of a subscription served directly by a
    /// root or baseline NWDAF.
    DirectDelivery { sub_id: u64 },
    /// Periodic retrain-and-push of a subscribed model at the root.
    ModelPush { type_id: ModelTypeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InferenceJob {
    Request {
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
    },
    LeafDelivery {
        nf_id: NfId,
        type_id: ModelTypeId,
    },
    DirectDelivery { sub_id: u64 },
}

/// What a node asks the engine to do after handling an input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    /// Emit `msg` towards `dst`, leaving this node at `depart`.
    Send {
        depart: f64,
        dst: NodeId,
        msg: Message,
    },
    Timer { at: f64, timer: TimerKind },
    Inference { done: f64, job: InferenceJob },
}

/// Single FIFO server. Work is reserved in arrival order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SerialServer {
    busy_until: f64,
}

impl SerialServer {
    /// Reserves `duration` seconds starting no earlier than `now`; returns
    /// the completion time.
    pub fn reserve(&mut self, now: f64, duration: f64) -> f64 {
        let start = now.max(self.busy_until);
        self.busy_until = start + duration;
        self.busy_until
    }

    pub fn busy_until(&self) -> f64 {
        self.busy_until
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub rejections: u64,
}

impl std::ops::AddAssign for CacheStats {
    fn add_assign(&mut self, rhs: Self) {
        self.hits += rhs.hits;
        self.misses += rhs.misses;
        self.evictions += rhs.evictions;
        self.rejections += rhs.rejections;
    }
}
