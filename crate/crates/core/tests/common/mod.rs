//! Shared helpers for integration tests.
#![allow(dead_code)]

use hndaf_core::protocol::{ModelDescriptor, ModelKind, ModelTypeId};
use hndaf_core::store::{InsertOutcome, ModelStore};
use proptest::prelude::*;

pub const SLOT: u64 = 15_000_000;
pub const MAX_TYPES: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Use(u32),
    Insert(u32, ModelKind),
    Remove(u32),
}

pub fn op() -> impl Strategy<Value = Op> {
    let t = 0..MAX_TYPES;
    prop_oneof![
        3 => t.clone().prop_map(Op::Use),
        3 => (t.clone(), prop_oneof![Just(ModelKind::Requested), Just(ModelKind::Subscribed)])
            .prop_map(|(t, k)| Op::Insert(t, k)),
        1 => t.prop_map(Op::Remove),
    ]
}

pub fn sequence() -> impl Strategy<Value = (u64, Vec<Op>)> {
    (2u64..=5, prop::collection::vec(op(), 0..=200))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Slot {
    id: u32,
    subscribed: bool,
    freq: u64,
    last_used: f64,
}

/// Straight re-reading of the admission and replacement rules over a flat
/// list of equal-size slots. Rebuilt from the full history on every query.
#[derive(Debug, Clone, Default)]
pub struct Oracle {
    slots: Vec<Slot>,
    ghost: Vec<u64>,
    cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Stored,
    Evicted(Vec<u32>),
    Rejected,
}

impl Oracle {
    pub fn replay(cap: usize, history: &[Op]) -> Self {
        let mut o = Oracle {
            slots: Vec::new(),
            ghost: vec![0; MAX_TYPES as usize],
            cap,
        };
        for (i, op) in history.iter().enumerate() {
            o.step(*op, i as f64);
        }
        o
    }

    fn victim(&self, excluding: &[u32]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, s) in self.slots.iter().enumerate() {
            if s.subscribed || excluding.contains(&s.id) {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let o = &self.slots[b];
                    (s.freq, s.last_used, s.id) < (o.freq, o.last_used, o.id)
                }
            };
            if better {
                best = Some(i);
            }
        }
        best
    }

    pub fn step(&mut self, op: Op, now: f64) -> Option<OracleOutcome> {
        match op {
            Op::Use(t) => {
                self.ghost[t as usize] += 1;
                if let Some(s) = self.slots.iter_mut().find(|s| s.id == t) {
                    s.freq += 1;
                    s.last_used = now;
                }
                None
            }
            Op::Remove(t) => {
                self.slots.retain(|s| s.id != t);
                None
            }
            Op::Insert(t, kind) => {
                let sub = kind == ModelKind::Subscribed;
                if let Some(s) = self.slots.iter_mut().find(|s| s.id == t) {
                    s.subscribed |= sub;
                    return Some(OracleOutcome::Stored);
                }
                let place = |o: &mut Oracle| {
                    let f = o.ghost[t as usize].max(1);
                    o.ghost[t as usize] = f;
                    o.slots.push(Slot {
                        id: t,
                        subscribed: sub,
                        freq: f,
                        last_used: now,
                    });
                };
                if self.slots.len() < self.cap {
                    place(self);
                    return Some(OracleOutcome::Stored);
                }
                let f_new = self.ghost[t as usize];
                let mut chosen = Vec::new();
                while self.slots.len() - chosen.len() >= self.cap {
                    let excluded: Vec<u32> = chosen.clone();
                    match self.victim(&excluded) {
                        Some(i) if sub || self.slots[i].freq < f_new => chosen.push(self.slots[i].id),
                        _ => return Some(OracleOutcome::Rejected),
                    }
                }
                self.slots.retain(|s| !chosen.contains(&s.id));
                place(self);
                Some(OracleOutcome::Evicted(chosen))
            }
        }
    }

    /// Sorted (type, subscribed, frequency) triples.
    pub fn resident(&self) -> Vec<(u32, bool, u64)> {
        let mut v: Vec<_> = self.slots.iter().map(|s| (s.id, s.subscribed, s.freq)).collect();
        v.sort();
        v
    }

    pub fn ghost(&self, t: u32) -> u64 {
        self.ghost[t as usize]
    }
}

pub fn store_resident(store: &ModelStore) -> Vec<(u32, bool, u64)> {
    let mut v: Vec<_> = store
        .entries()
        .map(|(id, e)| (id.0, e.kind == ModelKind::Subscribed, e.frequency))
        .collect();
    v.sort();
    v
}

pub fn apply(store: &mut ModelStore, op: Op, now: f64) -> Option<InsertOutcome> {
    match op {
        Op::Use(t) => {
            store.record_use(ModelTypeId(t), now);
            None
        }
        Op::Remove(t) => {
            store.remove(ModelTypeId(t));
            None
        }
        Op::Insert(t, kind) => Some(store.insert(ModelDescriptor::new(ModelTypeId(t), SLOT), kind, now)),
    }
}

/// Runs one sequence against the store, checking every store invariant
/// after each step and the oracle's resident set at every step.
pub fn check_sequence(slots: u64, ops: &[Op]) -> Result<(), String> {
    let cap = slots * SLOT;
    let mut store = ModelStore::new(cap);
    let mut oracle = Oracle::replay(slots as usize, &[]);
    for (i, &op) in ops.iter().enumerate() {
        let now = i as f64;
        let before = matches!(op, Op::Insert(..)).then(|| store.clone());
        let ghosts_before: Vec<u64> = match op {
            Op::Remove(_) => (0..MAX_TYPES).map(|t| store.ghost_frequency(ModelTypeId(t))).collect(),
            _ => Vec::new(),
        };
        let out = apply(&mut store, op, now);
        let expected = oracle.step(op, now);

        let u = store.utilization();
        if u.used_bytes > cap {
            return Err(format!("step {i}: {} bytes used over capacity {cap}", u.used_bytes));
        }
        for (id, e) in before.iter().flat_map(|b| b.entries()) {
            if e.kind == ModelKind::Subscribed && !store.contains(*id) {
                return Err(format!("step {i}: subscribed type {id} evicted by {op:?}"));
            }
        }
        for (id, e) in store.entries() {
            if store.ghost_frequency(*id) != e.frequency {
                return Err(format!("step {i}: type {id} frequency {} != ghost", e.frequency));
            }
            if e.frequency < 1 || e.last_used < e.stored_at {
                return Err(format!("step {i}: bad entry {e:?}"));
            }
        }
        if let Op::Remove(_) = op {
            let after: Vec<u64> = (0..MAX_TYPES).map(|t| store.ghost_frequency(ModelTypeId(t))).collect();
            if after != ghosts_before {
                return Err(format!("step {i}: remove changed ghost frequencies"));
            }
        }
        if let (Op::Insert(t, kind), Some(InsertOutcome::StoredAfterEviction(victims)), Some(before)) =
            (op, &out, &before)
        {
            if victims.is_empty() {
                return Err(format!("step {i}: StoredAfterEviction with no victims"));
            }
            let freqs: Vec<u64> = victims.iter().map(|v| before.lookup(*v).unwrap().frequency).collect();
            if freqs.windows(2).any(|w| w[0] > w[1]) {
                return Err(format!("step {i}: eviction order {freqs:?}"));
            }
            if kind == ModelKind::Requested {
                let f_new = before.ghost_frequency(ModelTypeId(t));
                if freqs.iter().any(|f| *f >= f_new) {
                    return Err(format!("step {i}: admitted with f_new {f_new} over {freqs:?}"));
                }
            }
        }
        let mapped = out.map(|o| match o {
            InsertOutcome::Stored => OracleOutcome::Stored,
            InsertOutcome::StoredAfterEviction(v) => OracleOutcome::Evicted(v.iter().map(|t| t.0).collect()),
            InsertOutcome::RejectedTransient => OracleOutcome::Rejected,
        });
        if mapped != expected {
            return Err(format!("step {i}: {op:?} gave {mapped:?}, oracle {expected:?}"));
        }
        if store_resident(&store) != oracle.resident() {
            return Err(format!(
                "step {i}: resident {:?} vs oracle {:?}",
                store_resident(&store),
                oracle.resident()
            ));
        }
    }
    let replayed = Oracle::replay(slots as usize, ops);
    if store_resident(&store) != replayed.resident() {
        return Err("final resident set differs from full replay".into());
    }
    for t in 0..MAX_TYPES {
        if store.ghost_frequency(ModelTypeId(t)) != replayed.ghost(t) {
            return Err(format!("ghost frequency of type {t} differs from replay"));
        }
    }
    Ok(())
}
