//! Capacity-bounded model store held by every leaf NWDAF.
//!
//! Subscribed models outrank requested ones, and within a class models with
//! a higher use frequency outrank less popular ones. When the store is full:
//!
//! * a subscribed model is admitted by evicting the least frequently used
//!   *requested* models; subscribed entries are never evicted by an insert;
//! * a requested model is admitted only if it can displace requested
//!   entries whose frequency is strictly below its own.
//!
//! Frequencies are cumulative per-store use counts. Counts survive eviction
//! and removal in a "ghost" table so that a returning model is compared on
//! its full history.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::protocol::{ModelDescriptor, ModelKind, ModelTypeId};

#[derive(Debug, Clone, PartialEq)]
pub struct StoreEntry {
    pub descriptor: ModelDescriptor,
    pub kind: ModelKind,
    pub frequency: u64,
    pub stored_at: f64,
    pub last_used: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    Stored,
    /// Stored after evicting these types, in eviction order.
    StoredAfterEviction(Vec<ModelTypeId>),
    /// Not admitted; the caller may use the model once and drop it.
    RejectedTransient,
}

impl InsertOutcome {
    pub fn is_resident(&self) -> bool {
        !matches!(self, InsertOutcome::RejectedTransient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Utilization {
    pub used_bytes: u64,
    pub capacity_bytes: u64,
    pub resident_count: usize,
}

#[derive(Debug, Clone)]
pub struct ModelStore {
    capacity_bytes: u64,
    entries: BTreeMap<ModelTypeId, StoreEntry>,
    ghost_frequency: BTreeMap<ModelTypeId, u64>,
    used_bytes: u64,
}

/// Eviction order: lowest frequency first, then least recently used, then
/// smallest type id.
fn eviction_order(a: (&ModelTypeId, &StoreEntry), b: (&ModelTypeId, &StoreEntry)) -> Ordering {
    a.1.frequency
        .cmp(&b.1.frequency)
        .then(a.1.last_used.total_cmp(&b.1.last_used))
        .then(a.0.cmp(b.0))
}

impl ModelStore {
    pub fn new(capacity_bytes: u64) -> Self {
        assert!(capacity_bytes > 0, "store capacity must be positive");
        Self {
            capacity_bytes,
            entries: BTreeMap::new(),
            ghost_frequency: BTreeMap::new(),
            used_bytes: 0,
        }
    }

    /// Does not count as a use; see [`ModelStore::record_use`].
    pub fn lookup(&self, type_id: ModelTypeId) -> Option<&StoreEntry> {
        self.entries.get(&type_id)
    }

    pub fn contains(&self, type_id: ModelTypeId) -> bool {
        self.entries.contains_key(&type_id)
    }

    pub fn record_use(&mut self, type_id: ModelTypeId, now: f64) -> u64 {
        let ghost = self.ghost_frequency.entry(type_id).or_insert(0);
        *ghost += 1;
        let f = *ghost;
        if let Some(entry) = self.entries.get_mut(&type_id) {
            entry.frequency = f;
            entry.last_used = entry.last_used.max(now);
        }
        f
    }

    pub fn ghost_frequency(&self, type_id: ModelTypeId) -> u64 {
        self.ghost_frequency.get(&type_id).copied().unwrap_or(0)
    }

    pub fn insert(
        &mut self,
        descriptor: ModelDescriptor,
        kind: ModelKind,
        now: f64,
    ) -> InsertOutcome {
        let type_id = descriptor.type_id;

        if let Some(entry) = self.entries.get_mut(&type_id) {
            entry.descriptor.version = entry.descriptor.version.max(descriptor.version);
            if kind == ModelKind::Subscribed {
                entry.kind = ModelKind::Subscribed;
            }
            return InsertOutcome::Stored;
        }

        if descriptor.size_bytes > self.capacity_bytes {
            return InsertOutcome::RejectedTransient;
        }

        let free = self.capacity_bytes - self.used_bytes;
        if descriptor.size_bytes <= free {
            self.store(descriptor, kind, now);
            return InsertOutcome::Stored;
        }

        // Requested entries in eviction order.
        let mut candidates: Vec<(&ModelTypeId, &StoreEntry)> = self
            .entries
            .iter()
            .filter(|(_, e)| e.kind == ModelKind::Requested)
            .collect();
        candidates.sort_by(|a, b| eviction_order(*a, *b));

        let threshold = match kind {
            ModelKind::Subscribed => None,
            ModelKind::Requested => Some(self.ghost_frequency(type_id)),
        };

        let mut victims = Vec::new();
        let mut reclaimed = free;
        for (id, entry) in candidates {
            if reclaimed >= descriptor.size_bytes {
                break;
            }
            if threshold.is_some_and(|f_new| entry.frequency >= f_new) {
                break;
            }
            victims.push(*id);
            reclaimed += entry.descriptor.size_bytes;
        }

        if reclaimed < descriptor.size_bytes {
            return InsertOutcome::RejectedTransient;
        }
        for id in &victims {
            self.evict(*id);
        }
        self.store(descriptor, kind, now);
        InsertOutcome::StoredAfterEviction(victims)
    }

    /// Deletes a model. Its use history is kept.
    pub fn remove(&mut self, type_id: ModelTypeId) -> Option<StoreEntry> {
        self.evict(type_id)
    }

    pub fn utilization(&self) -> Utilization {
        Utilization {
            used_bytes: self.used_bytes,
            capacity_bytes: self.capacity_bytes,
            resident_count: self.entries.len(),
        }
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ModelTypeId, &StoreEntry)> {
        self.entries.iter()
    }

    pub fn resident_types(&self) -> Vec<ModelTypeId> {
        self.entries.keys().copied().collect()
    }

    fn store(&mut self, descriptor: ModelDescriptor, kind: ModelKind, now: f64) {
        // Storing counts as a use for a model never used here before.
        let ghost = self.ghost_frequency.entry(descriptor.type_id).or_insert(0);
        *ghost = (*ghost).max(1);
        let frequency = *ghost;
        self.used_bytes += descriptor.size_bytes;
        self.entries.insert(
            descriptor.type_id,
            StoreEntry {
                descriptor,
                kind,
                frequency,
                stored_at: now,
                last_used: now,
            },
        );
    }

    fn evict(&mut self, type_id: ModelTypeId) -> Option<StoreEntry> {
        let entry = self.entries.remove(&type_id)?;
        self.used_bytes -= entry.descriptor.size_bytes;
        Some(entry)
    }
}
