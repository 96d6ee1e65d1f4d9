//! Scenario configuration, workload generation, experiment runs and sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, Links, LinkModel, SimRng};
use crate::error::{ConfigError, MetricsError, ScenarioError};
use crate::framework::{registry, Framework};
use crate::nodes::{CacheStats, ServiceTimes};
use crate::protocol::{EventId, Message, ModelCatalog, ModelTypeId, NfId, NodeId, DEFAULT_MODEL_SIZE_BYTES};
use crate::topology::LeafReport;

/// One experiment. Missing JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub framework: String,
    pub n_nfs: u32,
    pub nfs_per_multi_nwdaf: u32,
    /// Total number of analytics requests plus subscriptions.
    #[serde(rename = "N_T")]
    pub n_t: u32,
    /// Probability that an event reuses a model type already seen by its
    /// serving store domain.
    pub alpha: f64,
    /// Probability that an event uses the request method.
    pub beta: f64,
    pub request_interval_s: f64,
    pub model_size_bytes: u64,
    pub leaf_capacity_bytes: u64,
    /// Every catalog model is trained before the run starts.
    pub pretrained: bool,
    pub service_times: ServiceTimes,
    pub links: Links,
    pub delivery_period_s: f64,
    /// Retrain-and-push period for subscribed models at the root; `null`
    /// disables pushes.
    pub model_push_period_s: Option<f64>,
    pub horizon_s: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            framework: "HNDAF".into(),
            n_nfs: 9,
            nfs_per_multi_nwdaf: 3,
            n_t: 30,
            alpha: 0.5,
            beta: 0.5,
            request_interval_s: 5.0,
            model_size_bytes: DEFAULT_MODEL_SIZE_BYTES,
            leaf_capacity_bytes: 100_000_000,
            pretrained: true,
            service_times: ServiceTimes::default(),
            links: Links::default(),
            delivery_period_s: 5.0,
            model_push_period_s: None,
            horizon_s: 86_400.0,
            seed: 1,
        }
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::NonPositive { field, value })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Negative { field, value })
    }
}

fn link(prefix: &'static str, bw: &'static str, l: &LinkModel) -> Result<(), ConfigError> {
    positive(bw, l.bandwidth_bps)?;
    non_negative(prefix, l.latency_s)
}

/// Inference time of a stand-alone NWDAF in [`ScenarioConfig::calibrated`].
pub const CALIBRATED_BASELINE_INFERENCE_S: f64 = 3.5;

impl ScenarioConfig {
    /// Defaults with a heavy stand-alone NWDAF inference cost, so CONV and
    /// MULTI congest as N_T grows. Leaves keep the default inference time.
    pub fn calibrated() -> Self {
        let mut c = Self::default();
        c.service_times.baseline_inference_s = Some(CALIBRATED_BASELINE_INFERENCE_S);
        c
    }

    /// [`ScenarioConfig::calibrated`] with one NF and one leaf, so that every
    /// event lands in the same model store.
    pub fn single_leaf() -> Self {
        Self {
            n_nfs: 1,
            ..Self::calibrated()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The registered framework this config names.
    pub fn framework(&self) -> Result<&'static dyn Framework, ConfigError> {
        registry().get(&self.framework)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let framework = self.framework()?;
        if self.n_nfs == 0 {
            return Err(ConfigError::NoNfs);
        }
        if self.n_t == 0 {
            return Err(ConfigError::NoEvents);
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(ConfigError::Beta(self.beta));
        }
        positive("request_interval_s", self.request_interval_s)?;
        positive("delivery_period_s", self.delivery_period_s)?;
        positive("horizon_s", self.horizon_s)?;
        if let Some(p) = self.model_push_period_s {
            positive("model_push_period_s", p)?;
        }
        if self.model_size_bytes == 0 {
            return Err(ConfigError::ZeroBytes { field: "model_size_bytes" });
        }
        if self.leaf_capacity_bytes == 0 {
            return Err(ConfigError::ZeroBytes { field: "leaf_capacity_bytes" });
        }
        non_negative("service_times.inference_s", self.service_times.inference_s)?;
        non_negative("service_times.training_s", self.service_times.training_s)?;
        non_negative("service_times.root_proc_s", self.service_times.root_proc_s)?;
        if let Some(v) = self.service_times.baseline_inference_s {
            non_negative("service_times.baseline_inference_s", v)?;
        }
        link("links.nf_leaf.latency_s", "links.nf_leaf.bandwidth_bps", &self.links.nf_leaf)?;
        link("links.leaf_root.latency_s", "links.leaf_root.bandwidth_bps", &self.links.leaf_root)?;
        link(
            "links.nf_baseline.latency_s",
            "links.nf_baseline.bandwidth_bps",
            &self.links.nf_baseline,
        )?;
        framework.validate(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Request,
    Subscribe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkloadEvent {
    pub event_id: EventId,
    pub issue_time_s: OrderedTime,
    pub nf_id: NfId,
    pub method: Method,
    pub type_id: ModelTypeId,
}

/// Issue time that compares bitwise, so workloads can derive `Eq`.
#[derive(Debug, Clone, Copy)]
pub struct OrderedTime(pub f64);

impl PartialEq for OrderedTime {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for OrderedTime {}

#[derive(Debug, Clone)]
pub struct Workload {
    pub events: Vec<WorkloadEvent>,
    pub catalog: ModelCatalog,
}

/// Draws the event list. Each event consumes exactly three uniforms in the
/// order method, reuse, selection, whatever the outcome.
pub fn generate_workload(config: &ScenarioConfig, rng: &mut SimRng) -> Result<Workload, ConfigError> {
    let framework = config.framework()?;
    let mut catalog = ModelCatalog::new();
    let mut used: BTreeMap<u32, Vec<ModelTypeId>> = BTreeMap::new();
    let mut events = Vec::with_capacity(config.n_t as usize);
    for i in 0..config.n_t {
        let nf_id = i % config.n_nfs;
        let u_method = rng.next_f64();
        let u_reuse = rng.next_f64();
        let u_pick = rng.next_f64();
        let method = if u_method < config.beta {
            Method::Request
        } else {
            Method::Subscribe
        };
        let history = used.entry(framework.reuse_domain(config, nf_id)).or_default();
        let type_id = if u_reuse < config.alpha && !history.is_empty() {
            history[SimRng::index_from(u_pick, history.len())]
        } else {
            let t = catalog.new_type(config.model_size_bytes);
            history.push(t);
            t
        };
        events.push(WorkloadEvent {
            event_id: i as EventId,
            issue_time_s: OrderedTime(i as f64 * config.request_interval_s),
            nf_id,
            method,
            type_id,
        });
    }
    Ok(Workload { events, catalog })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub event_id: EventId,
    pub issue_time_s: f64,
    pub first_response_s: Option<f64>,
}

/// Last first-response minus first issue.
pub fn provision_time(records: &[EventRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let missing = records.iter().filter(|r| r.first_response_s.is_none()).count();
    if missing > 0 {
        return Err(MetricsError::Incomplete(missing));
    }
    let last = records
        .iter()
        .filter_map(|r| r.first_response_s)
        .fold(f64::NEG_INFINITY, f64::max);
    let first = records
        .iter()
        .map(|r| r.issue_time_s)
        .fold(f64::INFINITY, f64::min);
    Ok(last - first)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub config: ScenarioConfig,
    pub records: Vec<EventRecord>,
    /// `f64::INFINITY` when the run is incomplete.
    pub provision_time_s: f64,
    pub complete: bool,
    pub stats: CacheStats,
    pub leaves: Vec<LeafReport>,
    pub final_time_s: f64,
    pub events_processed: u64,
    pub protocol_errors: u64,
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub framework: String,
    pub n_nfs: u32,
    #[serde(rename = "N_T")]
    pub n_t: u32,
    pub alpha: f64,
    pub beta: f64,
    pub capacity_bytes: u64,
    pub seed: u64,
    pub provision_time_s: f64,
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub rejections: u64,
}

impl MetricsReport {
    pub fn row(&self) -> ResultRow {
        ResultRow {
            framework: self.config.framework.clone(),
            n_nfs: self.config.n_nfs,
            n_t: self.config.n_t,
            alpha: self.config.alpha,
            beta: self.config.beta,
            capacity_bytes: self.config.leaf_capacity_bytes,
            seed: self.config.seed,
            provision_time_s: self.provision_time_s,
            hits: self.stats.hits,
            misses: self.stats.misses,
            evictions: self.stats.evictions,
            rejections: self.stats.rejections,
        }
    }
}

pub fn run_experiment(config: &ScenarioConfig) -> Result<MetricsReport, ScenarioError> {
    run(config, None)
}

/// Like [`run_experiment`], also returning the event log lines.
pub fn run_experiment_logged(config: &ScenarioConfig) -> Result<(MetricsReport, Vec<String>), ScenarioError> {
    let mut log = Vec::new();
    let report = run(config, Some(&mut log))?;
    Ok((report, log))
}

fn run(config: &ScenarioConfig, log: Option<&mut Vec<String>>) -> Result<MetricsReport, ScenarioError> {
    config.validate()?;
    let framework = config.framework()?;
    let mut rng = SimRng::new(config.seed);
    let workload = generate_workload(config, &mut rng)?;

    let mut topology = framework.build_topology(config);
    topology.install_catalog(&workload.catalog, config.pretrained);

    let mut engine = Engine::new(config.links);
    if let Some(log) = log {
        engine = engine.with_log(log);
    }
    for ev in &workload.events {
        let msg = match ev.method {
            Method::Request => Message::AnalyticsRequest {
                event_id: ev.event_id,
                nf_id: ev.nf_id,
                type_id: ev.type_id,
            },
            Method::Subscribe => Message::AnalyticsSubscribe {
                event_id: ev.event_id,
                nf_id: ev.nf_id,
                type_id: ev.type_id,
            },
        };
        engine.send(ev.issue_time_s.0, NodeId::Nf(ev.nf_id), topology.serving_node(ev.nf_id), msg)?;
    }

    let n = workload.events.len();
    let outcome = engine.run(&mut topology, config.horizon_s, |t| t.completed() >= n)?;

    let responses = topology.first_responses();
    let records: Vec<EventRecord> = workload
        .events
        .iter()
        .map(|ev| EventRecord {
            event_id: ev.event_id,
            issue_time_s: ev.issue_time_s.0,
            first_response_s: responses.get(&ev.event_id).copied(),
        })
        .collect();
    let provision = provision_time(&records);
    Ok(MetricsReport {
        config: config.clone(),
        complete: provision.is_ok(),
        provision_time_s: provision.unwrap_or(f64::INFINITY),
        records,
        stats: topology.cache_stats(),
        leaves: topology.leaf_reports(),
        final_time_s: outcome.final_time,
        events_processed: outcome.events_processed,
        protocol_errors: topology.protocol_errors(),
    })
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    NT,
    Alpha,
    Beta,
    Capacity,
}

impl Axis {
    /// Frameworks compared along this axis.
    pub fn frameworks(self) -> &'static [&'static str] {
        match self {
            Axis::NT | Axis::Alpha => &["HNDAF", "CONV", "MULTI"],
            Axis::Beta | Axis::Capacity => &["HNDAF"],
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) -> Result<(), ConfigError> {
        match self {
            Axis::NT => config.n_t = whole("N_T", value)? as u32,
            Axis::Alpha => config.alpha = value,
            Axis::Beta => config.beta = value,
            Axis::Capacity => config.leaf_capacity_bytes = whole("leaf_capacity_bytes", value)?,
        }
        Ok(())
    }

    /// Configs for every (framework, value) cell, framework-major.
    pub fn expand(self, base: &ScenarioConfig, values: &[f64]) -> Result<Vec<ScenarioConfig>, ConfigError> {
        let mut out = Vec::new();
        for fw in self.frameworks() {
            for &v in values {
                let mut c = base.clone();
                c.framework = (*fw).to_string();
                self.apply(&mut c, v)?;
                c.validate()?;
                out.push(c);
            }
        }
        Ok(out)
    }
}

fn whole(field: &'static str, value: f64) -> Result<u64, ConfigError> {
    if value >= 1.0 && value.fract() == 0.0 && value < u64::MAX as f64 {
        Ok(value as u64)
    } else {
        Err(ConfigError::NonPositive { field, value })
    }
}

impl FromStr for Axis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N_T" | "n_t" => Ok(Axis::NT),
            "alpha" => Ok(Axis::Alpha),
            "beta" => Ok(Axis::Beta),
            "capacity" => Ok(Axis::Capacity),
            other => Err(ConfigError::Parse(format!(
                "axis: expected one of N_T, alpha, beta, capacity, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::NT => "N_T",
            Axis::Alpha => "alpha",
            Axis::Beta => "beta",
            Axis::Capacity => "capacity",
        })
    }
}

/// Mean over the repetitions of one config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRow {
    pub framework: String,
    pub n_nfs: u32,
    #[serde(rename = "N_T")]
    pub n_t: u32,
    pub alpha: f64,
    pub beta: f64,
    pub capacity_bytes: u64,
    pub reps: u32,
    pub complete_runs: u32,
    pub mean_provision_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Per-config reports, each in seed order.
    pub reports: Vec<Vec<MetricsReport>>,
}

impl SweepResult {
    pub fn rows(&self) -> impl Iterator<Item = ResultRow> + '_ {
        self.reports.iter().flatten().map(MetricsReport::row)
    }

    pub fn means(&self) -> Vec<MeanRow> {
        self.reports
            .iter()
            .map(|reps| {
                let c = &reps[0].config;
                let mean = reps.iter().map(|r| r.provision_time_s).sum::<f64>() / reps.len() as f64;
                MeanRow {
                    framework: c.framework.clone(),
                    n_nfs: c.n_nfs,
                    n_t: c.n_t,
                    alpha: c.alpha,
                    beta: c.beta,
                    capacity_bytes: c.leaf_capacity_bytes,
                    reps: reps.len() as u32,
                    complete_runs: reps.iter().filter(|r| r.complete).count() as u32,
                    mean_provision_time_s: mean,
                }
            })
            .collect()
    }

    pub fn mean_provision_times(&self) -> Vec<f64> {
        self.means().iter().map(|m| m.mean_provision_time_s).collect()
    }
}

/// Runs every config `repetitions` times with seeds `seed + rep`.
/// `jobs = None` uses rayon's default pool size.
pub fn sweep(configs: &[ScenarioConfig], repetitions: u32, jobs: Option<usize>) -> Result<SweepResult, ScenarioError> {
    if repetitions == 0 {
        return Err(ScenarioError::NoRepetitions);
    }
    let cells: Vec<ScenarioConfig> = configs
        .iter()
        .flat_map(|c| {
            (0..repetitions).map(move |rep| ScenarioConfig {
                seed: c.seed.wrapping_add(rep as u64),
                ..c.clone()
            })
        })
        .collect();
    let work = || cells.par_iter().map(run_experiment).collect::<Result<Vec<_>, _>>();
    let flat = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ScenarioError::Pool(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut it = flat.into_iter();
    let reports = configs
        .iter()
        .map(|_| it.by_ref().take(repetitions as usize).collect())
        .collect();
    Ok(SweepResult { reports })
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: impl IntoIterator<Item = R>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafRow {
    pub seed: u64,
    pub leaf_id: u32,
    pub used_bytes: u64,
    pub capacity_bytes: u64,
    pub resident_count: usize,
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
    pub rejections: u64,
}

pub fn leaf_rows(report: &MetricsReport) -> Vec<LeafRow> {
    report
        .leaves
        .iter()
        .map(|l| LeafRow {
            seed: report.config.seed,
            leaf_id: l.leaf_id,
            used_bytes: l.utilization.used_bytes,
            capacity_bytes: l.utilization.capacity_bytes,
            resident_count: l.utilization.resident_count,
            hits: l.stats.hits,
            misses: l.stats.misses,
            evictions: l.stats.evictions,
            rejections: l.stats.rejections,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(framework: &str) -> ScenarioConfig {
        ScenarioConfig {
            framework: framework.into(),
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn defaults_validate() {
        for fw in ["HNDAF", "CONV", "MULTI"] {
            cfg(fw).validate().unwrap();
        }
    }

    #[test]
    fn json_uses_n_t_key() {
        let c = ScenarioConfig::from_json(r#"{"framework":"CONV","N_T":12}"#).unwrap();
        assert_eq!(c.n_t, 12);
        assert_eq!(c.framework, "CONV");
        assert_eq!(c.n_nfs, 9);
        let back = ScenarioConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let err = ScenarioConfig::from_json(r#"{"n_nfz":3}"#).unwrap_err();
        assert!(err.to_string().contains("n_nfz"), "{err}");
    }

    #[test]
    fn validation_names_the_field() {
        let cases: Vec<(ScenarioConfig, &str)> = vec![
            (ScenarioConfig { n_nfs: 10, ..cfg("MULTI") }, "n_nfs"),
            (ScenarioConfig { alpha: 1.5, ..cfg("HNDAF") }, "alpha"),
            (ScenarioConfig { beta: -0.1, ..cfg("HNDAF") }, "beta"),
            (ScenarioConfig { n_t: 0, ..cfg("HNDAF") }, "N_T"),
            (ScenarioConfig { request_interval_s: 0.0, ..cfg("HNDAF") }, "request_interval_s"),
            (ScenarioConfig { leaf_capacity_bytes: 0, ..cfg("HNDAF") }, "leaf_capacity_bytes"),
            (cfg("MESH"), "framework"),
        ];
        for (c, field) in cases {
            let msg = c.validate().unwrap_err().to_string();
            assert!(msg.starts_with(field), "{msg} should name {field}");
        }
    }

    fn workload(c: &ScenarioConfig) -> Vec<WorkloadEvent> {
        generate_workload(c, &mut SimRng::new(c.seed)).unwrap().events
    }

    #[test]
    fn fresh_requests_only() {
        let c = ScenarioConfig { n_t: 4, alpha: 0.0, beta: 1.0, ..cfg("HNDAF") };
        let ev = workload(&c);
        let times: Vec<f64> = ev.iter().map(|e| e.issue_time_s.0).collect();
        assert_eq!(times, vec![0.0, 5.0, 10.0, 15.0]);
        assert!(ev.iter().all(|e| e.method == Method::Request));
        let types: Vec<u32> = ev.iter().map(|e| e.type_id.0).collect();
        assert_eq!(types, vec![0, 1, 2, 3]);
    }

    #[test]
    fn full_reuse_single_nf() {
        let c = ScenarioConfig { n_t: 4, alpha: 1.0, beta: 1.0, n_nfs: 1, ..cfg("HNDAF") };
        let types: Vec<u32> = workload(&c).iter().map(|e| e.type_id.0).collect();
        assert_eq!(types, vec![0, 0, 0, 0]);
    }

    #[test]
    fn beta_zero_subscribes() {
        let c = ScenarioConfig { n_t: 2, beta: 0.0, ..cfg("HNDAF") };
        assert!(workload(&c).iter().all(|e| e.method == Method::Subscribe));
    }

    #[test]
    fn round_robin_nfs_and_dense_ids() {
        let ev = workload(&cfg("MULTI"));
        for (i, e) in ev.iter().enumerate() {
            assert_eq!(e.event_id, i as u64);
            assert_eq!(e.nf_id, i as u32 % 9);
        }
    }

    #[test]
    fn reuse_stays_in_domain() {
        let c = ScenarioConfig { alpha: 0.9, n_t: 90, ..cfg("HNDAF") };
        let ev = workload(&c);
        let mut owner = BTreeMap::new();
        for e in &ev {
            assert_eq!(*owner.entry(e.type_id).or_insert(e.nf_id), e.nf_id);
        }
    }

    #[test]
    fn provision_time_examples() {
        let rec = |t: f64| EventRecord { event_id: 0, issue_time_s: 0.0, first_response_s: Some(t) };
        assert_eq!(provision_time(&[rec(1.282)]).unwrap(), 1.282);
        assert_eq!(provision_time(&[rec(3.0), rec(7.5), rec(6.1)]).unwrap(), 7.5);
        assert_eq!(provision_time(&[]), Err(MetricsError::Empty));
        let open = EventRecord { first_response_s: None, ..rec(0.0) };
        assert_eq!(provision_time(&[rec(1.0), open]), Err(MetricsError::Incomplete(1)));
    }

    #[test]
    fn horizon_marks_incomplete() {
        let c = ScenarioConfig { horizon_s: 1.0, ..cfg("HNDAF") };
        let r = run_experiment(&c).unwrap();
        assert!(!r.complete);
        assert!(r.provision_time_s.is_infinite());
        assert_eq!(r.records.len(), 30);
    }

    #[test]
    fn sweep_keeps_config_and_seed_order() {
        let base = ScenarioConfig { n_t: 6, ..cfg("HNDAF") };
        let configs = Axis::NT.expand(&base, &[3.0, 6.0]).unwrap();
        assert_eq!(configs.len(), 6);
        let s = sweep(&configs, 3, Some(2)).unwrap();
        let rows: Vec<ResultRow> = s.rows().collect();
        assert_eq!(rows.len(), 18);
        assert_eq!(rows[0].framework, "HNDAF");
        assert_eq!((rows[0].seed, rows[1].seed, rows[2].seed), (1, 2, 3));
        assert_eq!(rows[3].n_t, 6);
        assert_eq!(rows[6].framework, "CONV");
        assert_eq!(s.means().len(), 6);
    }

    #[test]
    fn capacity_axis_sweeps_hndaf_only() {
        let configs = Axis::Capacity.expand(&cfg("CONV"), &[1e8, 4e8]).unwrap();
        assert_eq!(configs.len(), 2);
        assert!(configs.iter().all(|c| c.framework == "HNDAF"));
        assert_eq!(configs[1].leaf_capacity_bytes, 400_000_000);
    }

    #[test]
    fn csv_header_is_stable() {
        let r = run_experiment(&ScenarioConfig { n_t: 2, ..cfg("CONV") }).unwrap();
        let mut buf = Vec::new();
        write_rows(&mut buf, [r.row()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "framework,n_nfs,N_T,alpha,beta,capacity_bytes,seed,provision_time_s,hits,misses,evictions,rejections"
        );
    }
}
