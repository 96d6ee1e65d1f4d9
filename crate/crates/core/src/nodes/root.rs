use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use super::{Action, InferenceJob, SerialServer, ServiceTimes, TimerKind};
use crate::protocol::{EventId, LeafId, Message, ModelDescriptor, ModelTypeId, NfId, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMode {
    /// Trains and distributes models to leaves; never answers analytics.
    Hierarchical,
    /// Stand-alone NWDAF (CONV/MULTI) answering its NFs directly.
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DirectSubscription {
    event_id: EventId,
    nf_id: NfId,
    type_id: ModelTypeId,
}

/// Fully featured NWDAF: data collection, MTLF, AnLF and a model store.
///
/// A single serial server executes message handling, training and (in
/// baseline mode) inference.
#[derive(Debug, Clone)]
pub struct RootNode {
    pub id: NodeId,
    pub mode: RootMode,
    pub attached_nf_ids: Vec<NfId>,
    pub protocol_errors: u64,
    /// Every model this node can train, keyed by type.
    known_models: BTreeMap<ModelTypeId, ModelDescriptor>,
    /// Time at which each trained (or in-training) model becomes available.
    trained_at: BTreeMap<ModelTypeId, f64>,
    model_subscriptions: BTreeMap<ModelTypeId, BTreeSet<LeafId>>,
    push_armed: BTreeSet<ModelTypeId>,
    direct_subscriptions: BTreeMap<u64, DirectSubscription>,
    next_sub_id: u64,
    server: SerialServer,
    times: ServiceTimes,
    delivery_period_s: f64,
    model_push_period_s: Option<f64>,
}

impl RootNode {
    pub fn new(
        id: NodeId,
        mode: RootMode,
        attached_nf_ids: Vec<NfId>,
        times: ServiceTimes,
        delivery_period_s: f64,
        model_push_period_s: Option<f64>,
    ) -> Self {
        Self {
            id,
            mode,
            attached_nf_ids,
            protocol_errors: 0,
            known_models: BTreeMap::new(),
            trained_at: BTreeMap::new(),
            model_subscriptions: BTreeMap::new(),
            push_armed: BTreeSet::new(),
            direct_subscriptions: BTreeMap::new(),
            next_sub_id: 0,
            server: SerialServer::default(),
            times,
            delivery_period_s,
            model_push_period_s,
        }
    }

    /// Registers a model type; `trained` marks it as available from t = 0.
    pub fn install_model(&mut self, descriptor: ModelDescriptor, trained: bool) {
        self.known_models.insert(descriptor.type_id, descriptor);
        if trained {
            self.trained_at.insert(descriptor.type_id, 0.0);
        }
    }

    pub fn is_trained(&self, type_id: ModelTypeId, now: f64) -> bool {
        self.trained_at.get(&type_id).is_some_and(|t| *t <= now)
    }

    pub fn descriptor(&self, type_id: ModelTypeId) -> Option<&ModelDescriptor> {
        self.known_models.get(&type_id)
    }

    pub fn subscribed_leaves(&self, type_id: ModelTypeId) -> Vec<LeafId> {
        self.model_subscriptions
            .get(&type_id)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn busy_until(&self) -> f64 {
        self.server.busy_until()
    }

    pub fn handle(&mut self, src: NodeId, msg: Message, now: f64) -> Vec<Action> {
        match (self.mode, msg) {
            (RootMode::Hierarchical, Message::ModelRequest { leaf_id, type_id }) => {
                self.handle_model_request(leaf_id, type_id, false, now)
            }
            (RootMode::Hierarchical, Message::ModelSubscribe { leaf_id, type_id }) => {
                self.handle_model_request(leaf_id, type_id, true, now)
            }
            (RootMode::Hierarchical, Message::ModelUnsubscribe { leaf_id, type_id }) => {
                self.handle_model_unsubscribe(leaf_id, type_id)
            }
            (
                RootMode::Baseline,
                Message::AnalyticsRequest {
                    event_id,
                    nf_id,
                    type_id,
                },
            ) => self.handle_analytics_direct(event_id, nf_id, type_id, false, now),
            (
                RootMode::Baseline,
                Message::AnalyticsSubscribe {
                    event_id,
                    nf_id,
                    type_id,
                },
            ) => self.handle_analytics_direct(event_id, nf_id, type_id, true, now),
            (RootMode::Baseline, Message::AnalyticsUnsubscribe { nf_id, type_id }) => {
                self.direct_subscriptions
                    .retain(|_, s| !(s.nf_id == nf_id && s.type_id == type_id));
                Vec::new()
            }
            (_, other) => {
                warn!("{}: unexpected {} from {src}", self.id, other.kind());
                self.protocol_errors += 1;
                Vec::new()
            }
        }
    }

    /// Returns when `type_id` is available on this node's server, queueing
    /// a training job behind current work if it has never been trained.
    fn ensure_trained(&mut self, type_id: ModelTypeId, now: f64) -> f64 {
        if let Some(t) = self.trained_at.get(&type_id) {
            return now.max(*t);
        }
        let done = self.server.reserve(now, self.times.training_s);
        self.trained_at.insert(type_id, done);
        done
    }

    fn descriptor_or_default(&mut self, type_id: ModelTypeId) -> ModelDescriptor {
        *self.known_models.entry(type_id).or_insert_with(|| {
            warn!("unknown model type {type_id}; assuming default size");
            ModelDescriptor::new(type_id, crate::protocol::DEFAULT_MODEL_SIZE_BYTES)
        })
    }

    /// Handles a leaf's ModelRequest (`subscribe = false`) or
    /// ModelSubscribe (`subscribe = true`).
    pub fn handle_model_request(
        &mut self,
        leaf_id: LeafId,
        type_id: ModelTypeId,
        subscribe: bool,
        now: f64,
    ) -> Vec<Action> {
        let descriptor = self.descriptor_or_default(type_id);
        let handled = self.server.reserve(now, self.times.root_proc_s);
        let ready = self.ensure_trained(type_id, handled);

        let mut actions = vec![Action::Send {
            depart: ready,
            dst: NodeId::Leaf(leaf_id),
            msg: Message::ModelTransfer { descriptor },
        }];
        if subscribe {
            self.model_subscriptions
                .entry(type_id)
                .or_default()
                .insert(leaf_id);
            if let Some(period) = self.model_push_period_s {
                if self.push_armed.insert(type_id) {
                    actions.push(Action::Timer {
                        at: ready + period,
                        timer: TimerKind::ModelPush { type_id },
                    });
                }
            }
        }
        actions
    }

    pub fn handle_model_unsubscribe(&mut self, leaf_id: LeafId, type_id: ModelTypeId) -> Vec<Action> {
        if let Some(leaves) = self.model_subscriptions.get_mut(&type_id) {
            leaves.remove(&leaf_id);
            if leaves.is_empty() {
                self.model_subscriptions.remove(&type_id);
            }
        }
        Vec::new()
    }

    /// Retrains a subscribed model and pushes the new version to every
    /// subscribed leaf.
    pub fn on_model_push(&mut self, type_id: ModelTypeId, now: f64) -> Vec<Action> {
        let leaves = self.subscribed_leaves(type_id);
        let Some(period) = self.model_push_period_s.filter(|_| !leaves.is_empty()) else {
            self.push_armed.remove(&type_id);
            return Vec::new();
        };
        let done = self.server.reserve(now, self.times.training_s);
        let descriptor = {
            let d = self.descriptor_or_default(type_id);
            let next = ModelDescriptor {
                version: d.version + 1,
                ..d
            };
            self.known_models.insert(type_id, next);
            next
        };
        let mut actions: Vec<Action> = leaves
            .into_iter()
            .map(|leaf_id| Action::Send {
                depart: done,
                dst: NodeId::Leaf(leaf_id),
                msg: Message::ModelTransfer { descriptor },
            })
            .collect();
        actions.push(Action::Timer {
            at: now + period,
            timer: TimerKind::ModelPush { type_id },
        });
        actions
    }

    /// Baseline path: handle, train if needed, infer, all on one server.
    pub fn handle_analytics_direct(
        &mut self,
        event_id: EventId,
        nf_id: NfId,
        type_id: ModelTypeId,
        subscribe: bool,
        now: f64,
    ) -> Vec<Action> {
        if !self.attached_nf_ids.contains(&nf_id) {
            warn!("{}: NF{nf_id} is not attached", self.id);
            self.protocol_errors += 1;
            return Vec::new();
        }
        self.descriptor_or_default(type_id);
        let handled = self.server.reserve(now, self.times.root_proc_s);
        self.ensure_trained(type_id, handled);
        let done = self.server.reserve(handled, self.times.baseline_inference());

        if !subscribe {
            return vec![Action::Inference {
                done,
                job: InferenceJob::Request {
                    event_id,
                    nf_id,
                    type_id,
                },
            }];
        }
        let sub_id = self.next_sub_id;
        self.next_sub_id += 1;
        self.direct_subscriptions.insert(
            sub_id,
            DirectSubscription {
                event_id,
                nf_id,
                type_id,
            },
        );
        vec![
            Action::Inference {
                done,
                job: InferenceJob::DirectDelivery { sub_id },
            },
            Action::Timer {
                at: now + self.delivery_period_s,
                timer: TimerKind::DirectDelivery { sub_id },
            },
        ]
    }

    pub fn on_delivery_timer(&mut self, sub_id: u64, now: f64) -> Vec<Action> {
        if !self.direct_subscriptions.contains_key(&sub_id) {
            return Vec::new();
        }
        let done = self.server.reserve(now, self.times.baseline_inference());
        vec![
            Action::Inference {
                done,
                job: InferenceJob::DirectDelivery { sub_id },
            },
            Action::Timer {
                at: now + self.delivery_period_s,
                timer: TimerKind::DirectDelivery { sub_id },
            },
        ]
    }

    pub fn on_inference_done(&mut self, job: InferenceJob, now: f64) -> Vec<Action> {
        let (event_id, nf_id, type_id) = match job {
            InferenceJob::Request {
                event_id,
                nf_id,
                type_id,
            } => (event_id, nf_id, type_id),
            InferenceJob::DirectDelivery { sub_id } => {
                let Some(s) = self.direct_subscriptions.get(&sub_id) else {
                    return Vec::new();
                };
                (s.event_id, s.nf_id, s.type_id)
            }
            InferenceJob::LeafDelivery { .. } => {
                self.protocol_errors += 1;
                return Vec::new();
            }
        };
        vec![Action::Send {
            depart: now,
            dst: NodeId::Nf(nf_id),
            msg: Message::AnalyticsResponse {
                event_id,
                nf_id,
                type_id,
            },
        }]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: ModelTypeId = ModelTypeId(0);

    fn times() -> ServiceTimes {
        ServiceTimes::default()
    }

    fn root(trained: bool) -> RootNode {
        let mut r = RootNode::new(NodeId::Root, RootMode::Hierarchical, vec![], times(), 5.0, None);
        for id in 0..3 {
            r.install_model(ModelDescriptor::new(ModelTypeId(id), 15_000_000), trained);
        }
        r
    }

    fn departures(actions: &[Action]) -> Vec<f64> {
        actions
            .iter()
            .filter_map(|a| match a {
                Action::Send { depart, .. } => Some(*depart),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn trained_model_departs_after_processing() {
        let mut r = root(true);
        let a = r.handle_model_request(0, T, false, 10.0);
        assert_eq!(departures(&a), vec![10.0 + 0.01]);
        assert!(matches!(
            a[0],
            Action::Send { dst: NodeId::Leaf(0), msg: Message::ModelTransfer { .. }, .. }
        ));
    }

    #[test]
    fn untrained_model_waits_for_training() {
        let mut r = root(false);
        let a = r.handle_model_request(0, T, false, 10.0);
        assert_eq!(departures(&a), vec![10.0 + 0.01 + 30.0]);
        assert!(r.is_trained(T, 40.01));
    }

    #[test]
    fn training_is_serial() {
        let mut r = root(false);
        let first = departures(&r.handle_model_request(0, ModelTypeId(0), false, 0.0))[0];
        let second = departures(&r.handle_model_request(1, ModelTypeId(1), false, 0.0))[0];
        assert!((first - 30.01).abs() < 1e-9);
        // Second message is handled after the first training, then trains.
        assert!((second - (first + 0.01 + 30.0)).abs() < 1e-9);
        // A third request for an already queued model does not retrain.
        let third = departures(&r.handle_model_request(2, ModelTypeId(0), false, 0.0))[0];
        assert!((third - (second + 0.01)).abs() < 1e-9);
    }

    #[test]
    fn subscribe_registers_leaf() {
        let mut r = root(true);
        r.handle_model_request(3, T, true, 0.0);
        r.handle_model_request(4, T, true, 0.0);
        assert_eq!(r.subscribed_leaves(T), vec![3, 4]);
        r.handle_model_unsubscribe(3, T);
        assert_eq!(r.subscribed_leaves(T), vec![4]);
    }

    #[test]
    fn push_timer_retrains_and_bumps_version() {
        let mut r = RootNode::new(NodeId::Root, RootMode::Hierarchical, vec![], times(), 5.0, Some(60.0));
        r.install_model(ModelDescriptor::new(T, 15_000_000), true);
        let a = r.handle_model_request(0, T, true, 0.0);
        assert!(a.iter().any(|x| matches!(x, Action::Timer { at, .. } if (*at - 60.01).abs() < 1e-9)));
        let a = r.on_model_push(T, 60.01);
        match a[0] {
            Action::Send {
                depart,
                msg: Message::ModelTransfer { descriptor },
                ..
            } => {
                assert!((depart - 90.01).abs() < 1e-9);
                assert_eq!(descriptor.version, 1);
            }
            ref other => panic!("unexpected {other:?}"),
        }
        r.handle_model_unsubscribe(0, T);
        assert!(r.on_model_push(T, 120.0).is_empty());
    }

    #[test]
    fn hierarchical_root_refuses_analytics() {
        let mut r = root(true);
        let msg = Message::AnalyticsRequest {
            event_id: 0,
            nf_id: 0,
            type_id: T,
        };
        assert!(r.handle(NodeId::Nf(0), msg, 0.0).is_empty());
        assert_eq!(r.protocol_errors, 1);
    }

    fn baseline() -> RootNode {
        let mut r = RootNode::new(NodeId::Nwdaf(0), RootMode::Baseline, (0..9).collect(), times(), 5.0, None);
        r.install_model(ModelDescriptor::new(T, 15_000_000), true);
        r
    }

    fn inference_done(actions: &[Action]) -> Vec<f64> {
        actions
            .iter()
            .filter_map(|a| match a {
                Action::Inference { done, .. } => Some(*done),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn direct_request_on_idle_node() {
        let mut r = baseline();
        let a = r.handle_analytics_direct(0, 0, T, false, 10.0);
        assert!((inference_done(&a)[0] - 10.06).abs() < 1e-12);
    }

    #[test]
    fn simultaneous_direct_requests_queue() {
        let mut r = baseline();
        for k in 1..=5u64 {
            let a = r.handle_analytics_direct(k, 0, T, false, 0.0);
            let expected = k as f64 * (0.01 + 0.05);
            assert!((inference_done(&a)[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_subscription_is_periodic() {
        let mut r = baseline();
        let a = r.handle_analytics_direct(0, 1, T, true, 0.0);
        assert!(a.iter().any(|x| matches!(x, Action::Timer { at, .. } if *at == 5.0)));
        let a = r.on_delivery_timer(0, 5.0);
        assert_eq!(inference_done(&a), vec![5.05]);
        r.handle(
            NodeId::Nf(1),
            Message::AnalyticsUnsubscribe { nf_id: 1, type_id: T },
            6.0,
        );
        assert!(r.on_delivery_timer(0, 10.0).is_empty());
    }
}
