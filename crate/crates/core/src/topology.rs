//! The node set of one scenario and the routing between NFs and NWDAFs.

use std::collections::BTreeMap;

use log::warn;

use crate::engine::{Payload, World};
use crate::nodes::{Action, CacheStats, LeafNode, RootNode, TimerKind};
use crate::protocol::{EventId, Message, ModelCatalog, NfId, NodeId};
use crate::store::Utilization;

#[derive(Debug, Clone)]
pub struct Topology {
    pub leaves: Vec<LeafNode>,
    /// Root NWDAF (H-NDAF only).
    pub root: Option<RootNode>,
    /// Stand-alone NWDAFs (CONV/MULTI only).
    pub nwdafs: Vec<RootNode>,
    /// Serving node of each NF, indexed by NF id.
    pub serving: Vec<NodeId>,
    first_response: BTreeMap<EventId, f64>,
    unroutable: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafReport {
    pub leaf_id: u32,
    pub utilization: Utilization,
    pub stats: CacheStats,
}

impl Topology {
    pub fn new(
        leaves: Vec<LeafNode>,
        root: Option<RootNode>,
        nwdafs: Vec<RootNode>,
        serving: Vec<NodeId>,
    ) -> Self {
        Self {
            leaves,
            root,
            nwdafs,
            serving,
            first_response: BTreeMap::new(),
            unroutable: 0,
        }
    }

    pub fn n_nfs(&self) -> usize {
        self.serving.len()
    }

    pub fn serving_node(&self, nf_id: NfId) -> NodeId {
        self.serving[nf_id as usize]
    }

    /// Makes every catalog model known to the training nodes.
    pub fn install_catalog(&mut self, catalog: &ModelCatalog, pretrained: bool) {
        for node in self.root.iter_mut().chain(self.nwdafs.iter_mut()) {
            for d in catalog.descriptors() {
                node.install_model(*d, pretrained);
            }
        }
    }

    pub fn first_responses(&self) -> &BTreeMap<EventId, f64> {
        &self.first_response
    }

    pub fn completed(&self) -> usize {
        self.first_response.len()
    }

    pub fn protocol_errors(&self) -> u64 {
        self.unroutable
            + self.leaves.iter().map(|l| l.protocol_errors).sum::<u64>()
            + self
                .root
                .iter()
                .chain(self.nwdafs.iter())
                .map(|r| r.protocol_errors)
                .sum::<u64>()
    }

    pub fn cache_stats(&self) -> CacheStats {
        let mut total = CacheStats::default();
        for l in &self.leaves {
            total += l.stats;
        }
        total
    }

    pub fn leaf_reports(&self) -> Vec<LeafReport> {
        self.leaves
            .iter()
            .map(|l| LeafReport {
                leaf_id: l.leaf_id,
                utilization: l.store.utilization(),
                stats: l.stats,
            })
            .collect()
    }

    fn leaf_mut(&mut self, id: u32) -> Option<&mut LeafNode> {
        self.leaves.get_mut(id as usize).filter(|l| l.leaf_id == id)
    }

    fn nwdaf_mut(&mut self, node: NodeId) -> Option<&mut RootNode> {
        match node {
            NodeId::Root => self.root.as_mut(),
            NodeId::Nwdaf(i) => self.nwdafs.get_mut(i as usize),
            _ => None,
        }
    }

    fn deliver(&mut self, now: f64, src: NodeId, dst: NodeId, msg: Message) -> Vec<Action> {
        match dst {
            NodeId::Nf(_) => {
                if let Message::AnalyticsResponse { event_id, .. } = msg {
                    self.first_response.entry(event_id).or_insert(now);
                }
                Vec::new()
            }
            NodeId::Leaf(id) => match self.leaf_mut(id) {
                Some(leaf) => leaf.handle(msg, now),
                None => self.drop_unroutable(dst),
            },
            NodeId::Root | NodeId::Nwdaf(_) => match self.nwdaf_mut(dst) {
                Some(node) => node.handle(src, msg, now),
                None => self.drop_unroutable(dst),
            },
        }
    }

    fn drop_unroutable(&mut self, dst: NodeId) -> Vec<Action> {
        warn!("no node {dst} in this topology");
        self.unroutable += 1;
        Vec::new()
    }
}

impl World for Topology {
    fn dispatch(&mut self, now: f64, payload: Payload) -> Vec<(NodeId, Action)> {
        let (node, actions) = match payload {
            Payload::Deliver { msg, src, dst } => (dst, self.deliver(now, src, dst, msg)),
            Payload::Timer { node, timer } => {
                let actions = match (node, timer) {
                    (
                        NodeId::Leaf(id),
                        TimerKind::LeafDelivery {
                            nf_id,
                            type_id,
                            generation,
                        },
                    ) => self
                        .leaf_mut(id)
                        .map(|l| l.on_delivery_timer(nf_id, type_id, generation, now))
                        .unwrap_or_default(),
                    (_, TimerKind::DirectDelivery { sub_id }) => self
                        .nwdaf_mut(node)
                        .map(|r| r.on_delivery_timer(sub_id, now))
                        .unwrap_or_default(),
                    (_, TimerKind::ModelPush { type_id }) => self
                        .nwdaf_mut(node)
                        .map(|r| r.on_model_push(type_id, now))
                        .unwrap_or_default(),
                    _ => self.drop_unroutable(node),
                };
                (node, actions)
            }
            Payload::InferenceDone { node, job } => {
                let actions = match node {
                    NodeId::Leaf(id) => self
                        .leaf_mut(id)
                        .map(|l| l.on_inference_done(job, now))
                        .unwrap_or_default(),
                    _ => self
                        .nwdaf_mut(node)
                        .map(|r| r.on_inference_done(job, now))
                        .unwrap_or_default(),
                };
                (node, actions)
            }
        };
        actions.into_iter().map(|a| (node, a)).collect()
    }
}
