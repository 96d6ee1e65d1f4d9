//! Deterministic discrete-event core.
//!
//! Events are ordered by `(time, seq)` where `seq` is a monotone counter
//! assigned at scheduling time, so simultaneous events pop in the order they
//! were scheduled. Randomness comes only from [`SimRng`], a ChaCha8 stream
//! seeded from a single `u64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::nodes::{Action, InferenceJob, TimerKind};
use crate::protocol::{encode_message, Message, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Deliver {
        msg: Message,
        src: NodeId,
        dst: NodeId,
    },
    Timer {
        node: NodeId,
        timer: TimerKind,
    },
    InferenceDone {
        node: NodeId,
        job: InferenceJob,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub payload: Payload,
}

#[derive(Debug)]
struct Queued(Event);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: reverse for earliest-first.
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then(other.0.seq.cmp(&self.0.seq))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Queued>,
    next_seq: u64,
    now: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time: f64, payload: Payload) -> Result<u64, SimError> {
        if time < self.now || !time.is_finite() {
            return Err(SimError::ScheduleInPast { at: time, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Queued(Event { time, seq, payload }));
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|q| q.0.time)
    }

    /// Pops the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Event> {
        let ev = self.heap.pop()?.0;
        self.now = ev.time;
        Some(ev)
    }
}

/// Point-to-point link: fixed latency plus serialization at `bandwidth_bps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkModel {
    pub bandwidth_bps: f64,
    pub latency_s: f64,
}

impl LinkModel {
    pub fn new(bandwidth_bps: f64, latency_s: f64) -> Self {
        Self {
            bandwidth_bps,
            latency_s,
        }
    }
}

pub fn transfer_delay(size_bytes: u64, link: &LinkModel) -> f64 {
    link.latency_s + (size_bytes as f64) * 8.0 / link.bandwidth_bps
}

/// Link models for each pair of node classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Links {
    pub nf_leaf: LinkModel,
    pub leaf_root: LinkModel,
    pub nf_baseline: LinkModel,
}

impl Default for Links {
    fn default() -> Self {
        Self {
            nf_leaf: LinkModel::new(100e6, 0.001),
            leaf_root: LinkModel::new(100e6, 0.010),
            nf_baseline: LinkModel::new(100e6, 0.010),
        }
    }
}

impl Links {
    pub fn between(&self, a: NodeId, b: NodeId) -> &LinkModel {
        use NodeId::*;
        match (a, b) {
            (Nf(_), Leaf(_)) | (Leaf(_), Nf(_)) => &self.nf_leaf,
            (Nf(_), Nwdaf(_) | Root) | (Nwdaf(_) | Root, Nf(_)) => &self.nf_baseline,
            _ => &self.leaf_root,
        }
    }
}

/// Seeded ChaCha8 stream. Same seed, same draws, on every platform.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index in `0..n` from a uniform draw in `[0, 1)`.
    pub fn index_from(u: f64, n: usize) -> usize {
        ((u * n as f64) as usize).min(n.saturating_sub(1))
    }
}

/// Something the engine can drive: routes event payloads to node handlers.
pub trait World {
    /// Handles one event; returns actions tagged with the emitting node.
    fn dispatch(&mut self, now: f64, payload: Payload) -> Vec<(NodeId, Action)>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    /// Time of the last processed event (0 if none).
    pub final_time: f64,
    pub events_processed: u64,
    /// Stopped with events still queued beyond the horizon.
    pub horizon_reached: bool,
}

/// Drives a [`World`] and records delivered messages.
pub struct Engine<'a> {
    pub queue: EventQueue,
    links: Links,
    log: Option<&'a mut Vec<String>>,
}

impl<'a> Engine<'a> {
    pub fn new(links: Links) -> Self {
        Self {
            queue: EventQueue::new(),
            links,
            log: None,
        }
    }

    pub fn with_log(mut self, log: &'a mut Vec<String>) -> Self {
        self.log = Some(log);
        self
    }

    pub fn links(&self) -> &Links {
        &self.links
    }

    /// Schedules the arrival of `msg` sent from `src` at `depart`.
    pub fn send(&mut self, depart: f64, src: NodeId, dst: NodeId, msg: Message) -> Result<(), SimError> {
        let arrive = depart + transfer_delay(msg.size_bytes(), self.links.between(src, dst));
        self.queue.schedule(arrive, Payload::Deliver { msg, src, dst })?;
        Ok(())
    }

    pub fn apply(&mut self, src: NodeId, action: Action) -> Result<(), SimError> {
        match action {
            Action::Send { depart, dst, msg } => {
                if depart < self.queue.now() {
                    return Err(SimError::ScheduleInPast {
                        at: depart,
                        now: self.queue.now(),
                    });
                }
                self.send(depart, src, dst, msg)
            }
            Action::Timer { at, timer } => self
                .queue
                .schedule(at, Payload::Timer { node: src, timer })
                .map(|_| ()),
            Action::Inference { done, job } => self
                .queue
                .schedule(done, Payload::InferenceDone { node: src, job })
                .map(|_| ()),
        }
    }

    /// Runs until the queue drains, the next event lies beyond `horizon`,
    /// or `stop` returns true after an event.
    pub fn run<W: World>(
        &mut self,
        world: &mut W,
        horizon: f64,
        mut stop: impl FnMut(&W) -> bool,
    ) -> Result<RunOutcome, SimError> {
        let mut outcome = RunOutcome {
            final_time: 0.0,
            events_processed: 0,
            horizon_reached: false,
        };
        while let Some(t) = self.queue.peek_time() {
            if t > horizon {
                outcome.horizon_reached = true;
                break;
            }
            let ev = self.queue.pop().expect("peeked");
            if let (Payload::Deliver { msg, src, dst }, Some(log)) = (&ev.payload, self.log.as_mut()) {
                log.push(encode_message(msg, ev.time, *src, *dst));
            }
            for (src, action) in world.dispatch(ev.time, ev.payload) {
                self.apply(src, action)?;
            }
            outcome.final_time = ev.time;
            outcome.events_processed += 1;
            if stop(world) {
                break;
            }
        }
        Ok(outcome)
    }
}
