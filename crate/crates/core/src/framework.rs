//! Analytics frameworks as interchangeable strategies.
//!
//! A [`Framework`] knows how to lay out NWDAFs for a scenario and which
//! store domain an NF's model reuse is scoped to. Frameworks are registered
//! by name and looked up at runtime from the scenario config.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::ConfigError;
use crate::nodes::{LeafNode, RootMode, RootNode};
use crate::protocol::{NfId, NodeId};
use crate::scenario::ScenarioConfig;
use crate::topology::Topology;

pub trait Framework: Send + Sync {
    /// Registry key, e.g. `"HNDAF"`.
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Framework-specific config checks on top of the generic ones.
    fn validate(&self, _config: &ScenarioConfig) -> Result<(), ConfigError> {
        Ok(())
    }

    fn build_topology(&self, config: &ScenarioConfig) -> Topology;

    /// Store domain whose history bounds model reuse for `nf_id`.
    fn reuse_domain(&self, config: &ScenarioConfig, nf_id: NfId) -> u32;
}

/// Root NWDAF plus one leaf NWDAF collocated with every NF.
#[derive(Debug, Default, Clone, Copy)]
pub struct Hierarchical;

impl Framework for Hierarchical {
    fn name(&self) -> &'static str {
        "HNDAF"
    }

    fn description(&self) -> &'static str {
        "root NWDAF trains, per-NF leaf NWDAFs cache models and infer"
    }

    fn build_topology(&self, config: &ScenarioConfig) -> Topology {
        let leaves = (0..config.n_nfs)
            .map(|i| {
                LeafNode::new(
                    i,
                    vec![i],
                    config.leaf_capacity_bytes,
                    config.service_times,
                    config.delivery_period_s,
                )
            })
            .collect();
        let root = RootNode::new(
            NodeId::Root,
            RootMode::Hierarchical,
            Vec::new(),
            config.service_times,
            config.delivery_period_s,
            config.model_push_period_s,
        );
        let serving = (0..config.n_nfs).map(NodeId::Leaf).collect();
        Topology::new(leaves, Some(root), Vec::new(), serving)
    }

    fn reuse_domain(&self, _config: &ScenarioConfig, nf_id: NfId) -> u32 {
        nf_id
    }
}

/// One monolithic NWDAF serving every NF.
#[derive(Debug, Default, Clone, Copy)]
pub struct Conventional;

impl Framework for Conventional {
    fn name(&self) -> &'static str {
        "CONV"
    }

    fn description(&self) -> &'static str {
        "a single NWDAF trains and infers for all NFs"
    }

    fn build_topology(&self, config: &ScenarioConfig) -> Topology {
        let nfs: Vec<NfId> = (0..config.n_nfs).collect();
        let node = baseline_node(0, nfs, config);
        Topology::new(
            Vec::new(),
            None,
            vec![node],
            vec![NodeId::Nwdaf(0); config.n_nfs as usize],
        )
    }

    fn reuse_domain(&self, _config: &ScenarioConfig, _nf_id: NfId) -> u32 {
        0
    }
}

/// Several independent NWDAFs, each covering a fixed group of NFs.
#[derive(Debug, Default, Clone, Copy)]
pub struct Multi;

impl Framework for Multi {
    fn name(&self) -> &'static str {
        "MULTI"
    }

    fn description(&self) -> &'static str {
        "one stand-alone NWDAF per group of nfs_per_multi_nwdaf NFs"
    }

    fn validate(&self, config: &ScenarioConfig) -> Result<(), ConfigError> {
        if config.nfs_per_multi_nwdaf == 0 {
            return Err(ConfigError::EmptyGroup);
        }
        if !config.n_nfs.is_multiple_of(config.nfs_per_multi_nwdaf) {
            return Err(ConfigError::MultiGrouping {
                n_nfs: config.n_nfs,
                group: config.nfs_per_multi_nwdaf,
            });
        }
        Ok(())
    }

    fn build_topology(&self, config: &ScenarioConfig) -> Topology {
        let group = config.nfs_per_multi_nwdaf;
        let nwdafs = (0..config.n_nfs / group)
            .map(|j| baseline_node(j, (j * group..(j + 1) * group).collect(), config))
            .collect();
        let serving = (0..config.n_nfs).map(|i| NodeId::Nwdaf(i / group)).collect();
        Topology::new(Vec::new(), None, nwdafs, serving)
    }

    fn reuse_domain(&self, config: &ScenarioConfig, nf_id: NfId) -> u32 {
        nf_id / config.nfs_per_multi_nwdaf.max(1)
    }
}

fn baseline_node(index: u32, nfs: Vec<NfId>, config: &ScenarioConfig) -> RootNode {
    RootNode::new(
        NodeId::Nwdaf(index),
        RootMode::Baseline,
        nfs,
        config.service_times,
        config.delivery_period_s,
        None,
    )
}

#[derive(Default)]
pub struct FrameworkRegistry {
    frameworks: BTreeMap<&'static str, Box<dyn Framework>>,
}

impl FrameworkRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Box::new(Hierarchical));
        r.register(Box::new(Conventional));
        r.register(Box::new(Multi));
        r
    }

    /// Adds or replaces a framework under its own name.
    pub fn register(&mut self, framework: Box<dyn Framework>) {
        self.frameworks.insert(framework.name(), framework);
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Result<&dyn Framework, ConfigError> {
        self.frameworks
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, f)| f.as_ref())
            .ok_or_else(|| ConfigError::UnknownFramework(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.frameworks.keys().copied()
    }
}

/// Process-wide registry holding the built-in frameworks.
pub fn registry() -> &'static FrameworkRegistry {
    static REGISTRY: OnceLock<FrameworkRegistry> = OnceLock::new();
    REGISTRY.get_or_init(FrameworkRegistry::with_builtins)
}
