use std::collections::{BTreeMap, VecDeque};

use log::warn;

use super::{Action, CacheStats, InferenceJob, SerialServer, ServiceTimes, TimerKind};
use crate::protocol::{
    EventId, LeafId, Message, ModelDescriptor, ModelKind, ModelTypeId, NfId, NodeId,
};
use crate::store::{InsertOutcome, ModelStore};

/// Work parked until a model transfer arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PendingWork {
    Request { event_id: EventId, nf_id: NfId },
    Delivery { nf_id: NfId },
}

#[derive(Debug, Clone, Default)]
struct PendingFetch {
    /// A ModelRequest or ModelSubscribe is outstanding for this type.
    in_flight: bool,
    queue: VecDeque<PendingWork>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subscription {
    /// Event that created the subscription; every delivery answers it.
    pub event_id: EventId,
    /// Duplicate subscribe events answered by the next delivery.
    pub awaiting: Vec<EventId>,
    pub next_delivery: Option<f64>,
    generation: u64,
}

/// Inference-only NWDAF collocated with one or more NFs.
#[derive(Debug, Clone)]
pub struct LeafNode {
    pub leaf_id: LeafId,
    pub attached_nf_ids: Vec<NfId>,
    pub store: ModelStore,
    pub stats: CacheStats,
    pub protocol_errors: u64,
    subscriptions: BTreeMap<(NfId, ModelTypeId), Subscription>,
    pending_fetches: BTreeMap<ModelTypeId, PendingFetch>,
    server: SerialServer,
    times: ServiceTimes,
    delivery_period_s: f64,
    next_generation: u64,
}

impl LeafNode {
    pub fn new(
        leaf_id: LeafId,
        attached_nf_ids: Vec<NfId>,
        capacity_bytes: u64,
        times: ServiceTimes,
        delivery_period_s: f64,
    ) -> Self {
        Self {
            leaf_id,
            attached_nf_ids,
            store: ModelStore::new(capacity_bytes),
            stats: CacheStats::default(),
            protocol_errors: 0,
            subscriptions: BTreeMap::new(),
            pending_fetches: BTreeMap::new(),
            server: SerialServer::default(),
            times,
            delivery_period_s,
            next_generation: 0,
        }
    }

    pub fn node_id(&self) -> NodeId {
        NodeId::Leaf(self.leaf_id)
    }

    pub fn subscription(&self, nf_id: NfId, type_id: ModelTypeId) -> Option<&Subscription> {
        self.subscriptions.get(&(nf_id, type_id))
    }

    pub fn has_subscribers(&self, type_id: ModelTypeId) -> bool {
        self.subscriptions.keys().any(|(_, t)| *t == type_id)
    }

    /// Queued work waiting for a transfer of `type_id`, in FIFO order.
    pub fn pending(&self, type_id: ModelTypeId) -> Vec<PendingWork> {
        self.pending_fetches
            .get(&type_id)
            .map(|p| p.queue.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn fetch_in_flight(&self, type_id: ModelTypeId) -> bool {
        self.pending_fetches
            .get(&type_id)
            .is_some_and(|p| p.in_flight)
    }

    pub fn handle(&mut self, msg: Message, now: f64) -> Vec<Action> {
        match msg {
            Message::AnalyticsRequest {
                event_id,
                nf_id,
                type_id,
            } => self.handle_analytics_request(event_id, nf_id, type_id, now),
            Message::AnalyticsSubscribe {
                event_id,
                nf_id,
                type_id,
            } => self.handle_subscribe(event_id, nf_id, type_id, now),
            Message::AnalyticsUnsubscribe { nf_id, type_id } => {
                self.handle_unsubscribe(nf_id, type_id, now)
            }
            Message::ModelTransfer { descriptor } => self.handle_model_transfer(descriptor, now),
            other => {
                warn!("{}: unexpected {} message", self.node_id(), other.kind());
                self.protocol_errors += 1;
                Vec::new()
            }
        }
    }

    fn check_attached(&mut self, nf_id: NfId) -> bool {
        if self.attached_nf_ids.contains(&nf_id) {
            return true;
        }
        warn!("{}: NF{nf_id} is not attached", self.node_id());
        self.protocol_errors += 1;
        false
    }

    pub fn handle_analytics_request(
        &mut self,
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
        now: f64,
    ) -> Vec<Action> {
        if !self.check_attached(nf_id) {
            return Vec::new();
        }
        self.store.record_use(type_id, now);
        if self.store.contains(type_id) {
            self.stats.hits += 1;
            let done = self.server.reserve(now, self.times.inference_s);
            return vec![Action::Inference {
                done,
                job: InferenceJob::Request {
                    event_id,
                    nf_id,
                    type_id,
                },
            }];
        }
        self.stats.misses += 1;
        self.enqueue_fetch(type_id, PendingWork::Request { event_id, nf_id }, now)
    }

    pub fn handle_subscribe(
        &mut self,
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
        now: f64,
    ) -> Vec<Action> {
        if !self.check_attached(nf_id) {
            return Vec::new();
        }
        let resident = self.store.contains(type_id);

        if let Some(sub) = self.subscriptions.get_mut(&(nf_id, type_id)) {
            // Already subscribed: no new upstream traffic.
            if resident {
                let done = self.server.reserve(now, self.times.inference_s);
                return vec![Action::Inference {
                    done,
                    job: InferenceJob::Request {
                        event_id,
                        nf_id,
                        type_id,
                    },
                }];
            }
            sub.awaiting.push(event_id);
            return Vec::new();
        }

        self.store.record_use(type_id, now);
        let first_local = !self.has_subscribers(type_id);
        let generation = self.next_generation;
        self.next_generation += 1;
        self.subscriptions.insert(
            (nf_id, type_id),
            Subscription {
                event_id,
                awaiting: Vec::new(),
                next_delivery: None,
                generation,
            },
        );

        let mut actions = Vec::new();
        if first_local {
            actions.push(Action::Send {
                depart: now,
                dst: NodeId::Root,
                msg: Message::ModelSubscribe {
                    leaf_id: self.leaf_id,
                    type_id,
                },
            });
        }

        if resident {
            self.stats.hits += 1;
            let descriptor = self.store.lookup(type_id).map(|e| e.descriptor);
            if let Some(d) = descriptor {
                self.store.insert(d, ModelKind::Subscribed, now);
            }
            actions.extend(self.deliver(nf_id, type_id, now));
        } else {
            self.stats.misses += 1;
            let entry = self.pending_fetches.entry(type_id).or_default();
            entry.queue.push_back(PendingWork::Delivery { nf_id });
            if first_local {
                entry.in_flight = true;
            } else if !entry.in_flight {
                entry.in_flight = true;
                actions.push(self.model_request(type_id, now));
            }
        }
        actions
    }

    pub fn handle_unsubscribe(&mut self, nf_id: NfId, type_id: ModelTypeId, now: f64) -> Vec<Action> {
        if self.subscriptions.remove(&(nf_id, type_id)).is_none() {
            warn!(
                "{}: NF{nf_id} unsubscribed from type {type_id} without a subscription",
                self.node_id()
            );
            return Vec::new();
        }
        if self.has_subscribers(type_id) {
            return Vec::new();
        }
        self.store.remove(type_id);
        vec![Action::Send {
            depart: now,
            dst: NodeId::Root,
            msg: Message::ModelUnsubscribe {
                leaf_id: self.leaf_id,
                type_id,
            },
        }]
    }

    pub fn handle_model_transfer(&mut self, descriptor: ModelDescriptor, now: f64) -> Vec<Action> {
        let type_id = descriptor.type_id;
        let kind = if self.has_subscribers(type_id) {
            ModelKind::Subscribed
        } else {
            ModelKind::Requested
        };
        match self.store.insert(descriptor, kind, now) {
            InsertOutcome::Stored => {}
            InsertOutcome::StoredAfterEviction(evicted) => {
                self.stats.evictions += evicted.len() as u64;
            }
            InsertOutcome::RejectedTransient => self.stats.rejections += 1,
        }

        // Whatever was waiting is served with this copy, resident or not.
        let Some(pending) = self.pending_fetches.remove(&type_id) else {
            return Vec::new();
        };
        let mut actions = Vec::new();
        for work in pending.queue {
            match work {
                PendingWork::Request { event_id, nf_id } => {
                    let done = self.server.reserve(now, self.times.inference_s);
                    actions.push(Action::Inference {
                        done,
                        job: InferenceJob::Request {
                            event_id,
                            nf_id,
                            type_id,
                        },
                    });
                }
                PendingWork::Delivery { nf_id } => {
                    actions.extend(self.deliver(nf_id, type_id, now));
                }
            }
        }
        actions
    }

    pub fn on_delivery_timer(
        &mut self,
        nf_id: NfId,
        type_id: ModelTypeId,
        generation: u64,
        now: f64,
    ) -> Vec<Action> {
        let Some(sub) = self.subscriptions.get_mut(&(nf_id, type_id)) else {
            return Vec::new();
        };
        if sub.generation != generation {
            return Vec::new();
        }
        let next = now + self.delivery_period_s;
        sub.next_delivery = Some(next);
        let mut actions = vec![Action::Timer {
            at: next,
            timer: TimerKind::LeafDelivery {
                nf_id,
                type_id,
                generation,
            },
        }];
        if self.store.contains(type_id) {
            let done = self.server.reserve(now, self.times.inference_s);
            actions.push(Action::Inference {
                done,
                job: InferenceJob::LeafDelivery { nf_id, type_id },
            });
        } else {
            // Transient mode: fetch again for this period.
            actions.extend(self.enqueue_fetch(type_id, PendingWork::Delivery { nf_id }, now));
        }
        actions
    }

    /// Turns a finished inference into analytics responses.
    pub fn on_inference_done(&mut self, job: InferenceJob, now: f64) -> Vec<Action> {
        match job {
            InferenceJob::Request {
                event_id,
                nf_id,
                type_id,
            } => vec![self.response(event_id, nf_id, type_id, now)],
            InferenceJob::LeafDelivery { nf_id, type_id } => {
                let Some(sub) = self.subscriptions.get_mut(&(nf_id, type_id)) else {
                    return Vec::new();
                };
                let ids: Vec<EventId> = std::iter::once(sub.event_id)
                    .chain(sub.awaiting.drain(..))
                    .collect();
                ids.into_iter()
                    .map(|e| self.response(e, nf_id, type_id, now))
                    .collect()
            }
            InferenceJob::DirectDelivery { .. } => {
                self.protocol_errors += 1;
                Vec::new()
            }
        }
    }

    /// Runs one delivery now and arms the periodic timer if it is not yet
    /// running.
    fn deliver(&mut self, nf_id: NfId, type_id: ModelTypeId, now: f64) -> Vec<Action> {
        let Some(sub) = self.subscriptions.get_mut(&(nf_id, type_id)) else {
            return Vec::new();
        };
        let mut actions = Vec::new();
        if sub.next_delivery.is_none() {
            let next = now + self.delivery_period_s;
            sub.next_delivery = Some(next);
            actions.push(Action::Timer {
                at: next,
                timer: TimerKind::LeafDelivery {
                    nf_id,
                    type_id,
                    generation: sub.generation,
                },
            });
        }
        let done = self.server.reserve(now, self.times.inference_s);
        actions.push(Action::Inference {
            done,
            job: InferenceJob::LeafDelivery { nf_id, type_id },
        });
        actions
    }

    fn enqueue_fetch(&mut self, type_id: ModelTypeId, work: PendingWork, now: f64) -> Vec<Action> {
        let entry = self.pending_fetches.entry(type_id).or_default();
        entry.queue.push_back(work);
        if entry.in_flight {
            return Vec::new();
        }
        entry.in_flight = true;
        vec![self.model_request(type_id, now)]
    }

    fn model_request(&self, type_id: ModelTypeId, now: f64) -> Action {
        Action::Send {
            depart: now,
            dst: NodeId::Root,
            msg: Message::ModelRequest {
                leaf_id: self.leaf_id,
                type_id,
            },
        }
    }

    fn response(&self, event_id: EventId, nf_id: NfId, type_id: ModelTypeId, now: f64) -> Action {
        Action::Send {
            depart: now,
            dst: NodeId::Nf(nf_id),
            msg: Message::AnalyticsResponse {
                event_id,
                nf_id,
                type_id,
            },
        }
    }
}
