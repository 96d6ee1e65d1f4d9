//! Scripted UE throughput prediction walk-through on a one-leaf hierarchy.
//!
//! The PCF (NF0) sits next to LEAF0. The root collects data, trains a
//! predictor, stores it, and the leaf fetches it on the PCF's first request.

use std::fmt::Write as _;

use crate::engine::{transfer_delay, Engine, SimRng};
use crate::error::ScenarioError;
use crate::framework::{Framework, Hierarchical};
use crate::predictor::{evaluate, generate_synthetic_dataset, predict, train, FeatureSet};
use crate::protocol::{decode_message, Message, ModelCatalog, NodeId};
use crate::scenario::ScenarioConfig;

pub const SAMPLES: usize = 1000;
/// Time the PCF takes to apply the analytics to its policy.
pub const POLICY_UPDATE_S: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: u8,
    pub time_s: f64,
    pub description: String,
    /// Event log lines produced during this step.
    pub log_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UseCaseTrace {
    pub steps: Vec<TraceStep>,
}

impl UseCaseTrace {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let _ = writeln!(out, "step {} t={:.6} {}", s.step, s.time_s, s.description);
            for l in &s.log_lines {
                let _ = writeln!(out, "step {}   {}", s.step, l);
            }
        }
        out
    }
}

pub fn run_usecase(seed: u64) -> Result<UseCaseTrace, ScenarioError> {
    let config = ScenarioConfig {
        n_nfs: 1,
        n_t: 1,
        seed,
        ..ScenarioConfig::default()
    };
    let times = config.service_times;
    let mut steps = Vec::new();
    let mut step = |n: u8, t: f64, d: String, log: Vec<String>| {
        steps.push(TraceStep {
            step: n,
            time_s: t,
            description: d,
            log_lines: log,
        })
    };

    let mut rng = SimRng::new(seed);
    let data = generate_synthetic_dataset(SAMPLES, &mut rng);
    step(
        1,
        0.0,
        format!("data collection: {} samples from {} UEs", data.samples.len(), data.n_ues),
        Vec::new(),
    );

    let model = train(&data, FeatureSet::D5, 0.0)?;
    let metrics = evaluate(&model, data.test(), FeatureSet::D5)?;
    let t_trained = times.training_s;
    step(
        2,
        t_trained,
        format!(
            "MTLF training: {} weights, test rmse {:.4} Mbps, {} bytes serialized",
            model.weights.len(),
            metrics.rmse,
            model.serialized_size()
        ),
        Vec::new(),
    );

    let mut catalog = ModelCatalog::new();
    let type_id = catalog.new_type(config.model_size_bytes);
    let mut topology = Hierarchical.build_topology(&config);
    topology.install_catalog(&catalog, true);
    let t_stored = t_trained + times.root_proc_s;
    step(
        3,
        t_stored,
        format!("model store insert at ROOT: type {type_id}, {} bytes", config.model_size_bytes),
        Vec::new(),
    );

    let mut log = Vec::new();
    {
        let mut engine = Engine::new(config.links).with_log(&mut log);
        engine.send(
            t_stored,
            NodeId::Nf(0),
            NodeId::Leaf(0),
            Message::AnalyticsRequest {
                event_id: 0,
                nf_id: 0,
                type_id,
            },
        )?;
        engine.run(&mut topology, config.horizon_s, |t| t.completed() >= 1)?;
    }
    let response_at = topology.first_responses()[&0];
    let (fetch, deliver): (Vec<String>, Vec<String>) = log
        .into_iter()
        .partition(|l| !matches!(decode_message(l), Ok(r) if r.msg.kind() == "ARSP"));
    let transfer_at = fetch
        .iter()
        .filter_map(|l| decode_message(l).ok())
        .filter(|r| r.msg.kind() == "MXFER")
        .map(|r| r.time)
        .next()
        .unwrap_or(t_stored);
    step(4, transfer_at, "leaf model request and transfer".into(), fetch);

    let sample = data.test().last().unwrap_or(&data.samples[0]);
    let value = predict(&model, sample, FeatureSet::D5)?;
    let inferred_at = response_at - transfer_delay(0, &config.links.nf_leaf);
    step(
        5,
        inferred_at,
        format!("leaf inference: UE{} throughput {value:.3} Mbps", sample.ue_id),
        Vec::new(),
    );
    step(6, response_at, "analytics delivered to PCF".into(), deliver);
    step(
        7,
        response_at + POLICY_UPDATE_S,
        "PCF policy update (no-op)".into(),
        Vec::new(),
    );
    Ok(UseCaseTrace { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_seven_steps_in_order() {
        let t = run_usecase(1).unwrap();
        let ids: Vec<u8> = t.steps.iter().map(|s| s.step).collect();
        assert_eq!(ids, vec![1, 2, 3, 4, 5, 6, 7]);
        assert!(t.steps.windows(2).all(|w| w[0].time_s < w[1].time_s));
    }

    #[test]
    fn fetch_and_delivery_are_logged() {
        let t = run_usecase(1).unwrap();
        let kinds = |s: &TraceStep| -> Vec<&'static str> {
            s.log_lines.iter().map(|l| decode_message(l).unwrap().msg.kind()).collect()
        };
        assert_eq!(kinds(&t.steps[3]), vec!["AREQ", "MREQ", "MXFER"]);
        assert_eq!(kinds(&t.steps[5]), vec!["ARSP"]);
    }

    #[test]
    fn deterministic() {
        assert_eq!(run_usecase(4).unwrap().render(), run_usecase(4).unwrap().render());
    }
}
