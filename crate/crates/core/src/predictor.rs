//! Ridge autoregression of UE throughput over synthetic traces.
//!
//! Samples are generated time-major: at each step every UE moves, its cell
//! load and signal change, and a new throughput value is drawn from
//!
//! ```text
//! current = base(ue) * g(x, y) + C_RAN * ran + C_SIGNAL * signal
//!           + sum_k AR[k] * past[k] + noise
//! ```
//!
//! with `g(x, y) = 0.5 + 0.8 x - 0.4 y`. All inputs are already normalized:
//! location and RAN load lie in `[0, 1]`, signal is `1 - 2 * distance to the
//! cell centre` plus a small jitter. Throughput is in Mbps. The first 80% of
//! the samples (by index) form the training split.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::engine::SimRng;
use crate::error::PredictorError;

pub const DEFAULT_LAGS: usize = 3;
pub const DEFAULT_UES: usize = 8;
pub const TRAIN_FRACTION: f64 = 0.8;

/// Generator constants.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_ues: usize,
    pub lags: usize,
    /// Per-UE base rate is `base_mbps + base_step_mbps * ue_id`.
    pub base_mbps: f64,
    pub base_step_mbps: f64,
    pub c_ran: f64,
    pub c_signal: f64,
    /// One coefficient per lag, most recent first.
    pub ar: Vec<f64>,
    pub noise_sd: f64,
    /// Steps simulated before the first recorded sample.
    pub burn_in: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            n_ues: DEFAULT_UES,
            lags: DEFAULT_LAGS,
            base_mbps: 20.0,
            base_step_mbps: 5.0,
            c_ran: -30.0,
            c_signal: 15.0,
            ar: vec![0.4, 0.15, 0.05],
            noise_sd: 2.0,
            burn_in: 20,
        }
    }
}

impl GeneratorParams {
    /// Noise-free target for a sample's inputs.
    pub fn expected(&self, s: &ThroughputSample) -> f64 {
        let (x, y) = s.location;
        let base = self.base_mbps + self.base_step_mbps * s.ue_id as f64;
        let ar: f64 = self.ar.iter().zip(&s.past_throughput).map(|(a, p)| a * p).sum();
        base * (0.5 + 0.8 * x - 0.4 * y) + self.c_ran * s.ran_status + self.c_signal * s.signal_strength + ar
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputSample {
    pub ue_id: u32,
    pub ran_status: f64,
    pub location: (f64, f64),
    pub signal_strength: f64,
    /// Most recent first.
    pub past_throughput: Vec<f64>,
    pub current_throughput: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<ThroughputSample>,
    pub n_ues: usize,
    pub lags: usize,
}

impl Dataset {
    pub fn train_len(&self) -> usize {
        (self.samples.len() as f64 * TRAIN_FRACTION).floor() as usize
    }

    pub fn train(&self) -> &[ThroughputSample] {
        &self.samples[..self.train_len()]
    }

    pub fn test(&self) -> &[ThroughputSample] {
        &self.samples[self.train_len()..]
    }
}

fn reflect(v: f64) -> f64 {
    let v = v.abs();
    if v > 1.0 {
        2.0 - v
    } else {
        v
    }
}

pub fn generate_synthetic_dataset(n: usize, rng: &mut SimRng) -> Dataset {
    generate_with(n, &GeneratorParams::default(), rng)
}

pub fn generate_with(n: usize, params: &GeneratorParams, rng: &mut SimRng) -> Dataset {
    assert!(params.lags >= 1 && params.ar.len() == params.lags);
    assert!(params.n_ues >= 1);
    struct Ue {
        loc: (f64, f64),
        ran: f64,
        past: Vec<f64>,
    }
    let mut ues: Vec<Ue> = (0..params.n_ues)
        .map(|_| Ue {
            loc: (rng.next_f64(), rng.next_f64()),
            ran: rng.next_f64(),
            past: vec![0.0; params.lags],
        })
        .collect();

    let mut samples = Vec::with_capacity(n);
    let mut step = 0;
    while samples.len() < n {
        for (id, ue) in ues.iter_mut().enumerate() {
            ue.loc.0 = reflect(ue.loc.0 + 0.05 * rng.normal());
            ue.loc.1 = reflect(ue.loc.1 + 0.05 * rng.normal());
            ue.ran = (0.9 * ue.ran + 0.05 + 0.08 * rng.normal()).clamp(0.0, 1.0);
            let dist = ((ue.loc.0 - 0.5).powi(2) + (ue.loc.1 - 0.5).powi(2)).sqrt();
            let signal = 1.0 - 2.0 * dist + 0.1 * rng.normal();
            let mut s = ThroughputSample {
                ue_id: id as u32,
                ran_status: ue.ran,
                location: ue.loc,
                signal_strength: signal,
                past_throughput: ue.past.clone(),
                current_throughput: 0.0,
            };
            let noise = rng.normal();
            s.current_throughput = params.expected(&s) + params.noise_sd * noise;
            ue.past.rotate_right(1);
            ue.past[0] = s.current_throughput;
            if step >= params.burn_in && samples.len() < n {
                samples.push(s);
            }
        }
        step += 1;
    }
    Dataset {
        samples,
        n_ues: params.n_ues,
        lags: params.lags,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeatureSet {
    /// UE id, RAN status, location, signal, past throughput.
    D5,
    /// Drops location and RAN status.
    D3,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::D5 => "D5",
            FeatureSet::D3 => "D3",
        }
    }

    pub fn column_count(self, n_ues: usize, lags: usize) -> usize {
        let extra = match self {
            FeatureSet::D5 => 3,
            FeatureSet::D3 => 0,
        };
        (n_ues - 1) + extra + 1 + lags
    }

    /// Expanded feature columns, without the bias. UE id is one-hot with
    /// UE 0 as the reference level.
    pub fn columns(self, s: &ThroughputSample, n_ues: usize) -> Vec<f64> {
        let mut row = vec![0.0; n_ues - 1];
        if s.ue_id > 0 && (s.ue_id as usize) < n_ues {
            row[s.ue_id as usize - 1] = 1.0;
        }
        if self == FeatureSet::D5 {
            row.extend([s.ran_status, s.location.0, s.location.1]);
        }
        row.push(s.signal_strength);
        row.extend(&s.past_throughput);
        row
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    /// Bias first, then one weight per column.
    pub weights: Vec<f64>,
    pub ridge_lambda: f64,
    pub feature_set: FeatureSet,
    pub n_ues: usize,
    pub lags: usize,
}

impl LinearModel {
    /// Size of the JSON encoding in bytes.
    pub fn serialized_size(&self) -> usize {
        serde_json::to_vec(self).map(|v| v.len()).unwrap_or(0)
    }

    fn apply(&self, cols: &[f64]) -> f64 {
        self.weights[0] + self.weights[1..].iter().zip(cols).map(|(w, x)| w * x).sum::<f64>()
    }
}

fn design(rows: &[ThroughputSample], fs: FeatureSet, n_ues: usize) -> (DMatrix<f64>, DVector<f64>) {
    let cols = fs.column_count(n_ues, rows[0].past_throughput.len()) + 1;
    let mut x = DMatrix::zeros(rows.len(), cols);
    for (i, s) in rows.iter().enumerate() {
        x[(i, 0)] = 1.0;
        for (j, v) in fs.columns(s, n_ues).into_iter().enumerate() {
            x[(i, j + 1)] = v;
        }
    }
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|s| s.current_throughput));
    (x, y)
}

/// Fits on the dataset's training split.
pub fn train(dataset: &Dataset, fs: FeatureSet, ridge_lambda: f64) -> Result<LinearModel, PredictorError> {
    fit(dataset.train(), dataset.n_ues, fs, ridge_lambda)
}

/// Solves `(XᵀX + λ D) w = Xᵀy` where `D` leaves the bias unpenalized.
pub fn fit(
    rows: &[ThroughputSample],
    n_ues: usize,
    fs: FeatureSet,
    ridge_lambda: f64,
) -> Result<LinearModel, PredictorError> {
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(PredictorError::BadLambda);
    }
    if rows.len() < 2 {
        return Err(PredictorError::TooFewRows { needed: 2, got: rows.len() });
    }
    let (x, y) = design(rows, fs, n_ues);
    let mut a = x.transpose() * &x;
    for i in 1..a.nrows() {
        a[(i, i)] += ridge_lambda;
    }
    let b = x.transpose() * &y;
    let scale = a.diagonal().max().max(1.0);
    let chol = a.clone().cholesky().ok_or(PredictorError::Singular)?;
    if chol.l().diagonal().iter().any(|d| d * d < 1e-12 * scale) {
        return Err(PredictorError::Singular);
    }
    let mut w = chol.solve(&b);
    // One step of iterative refinement.
    let r = &b - &a * &w;
    w += chol.solve(&r);
    Ok(LinearModel {
        weights: w.iter().copied().collect(),
        ridge_lambda,
        feature_set: fs,
        n_ues,
        lags: rows[0].past_throughput.len(),
    })
}

pub fn predict(model: &LinearModel, sample: &ThroughputSample, fs: FeatureSet) -> Result<f64, PredictorError> {
    if fs != model.feature_set {
        return Err(PredictorError::FeatureSetMismatch {
            trained: model.feature_set,
            requested: fs,
        });
    }
    Ok(model.apply(&fs.columns(sample, model.n_ues)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
}

pub fn evaluate(model: &LinearModel, rows: &[ThroughputSample], fs: FeatureSet) -> Result<ErrorMetrics, PredictorError> {
    if rows.is_empty() {
        return Err(PredictorError::EmptySplit);
    }
    let mut se = 0.0;
    let mut ae = 0.0;
    for s in rows {
        let e = predict(model, s, fs)? - s.current_throughput;
        se += e * e;
        ae += e.abs();
    }
    let n = rows.len() as f64;
    let mse = se / n;
    Ok(ErrorMetrics {
        mse,
        mae: ae / n,
        rmse: mse.sqrt(),
    })
}

/// Ridge objective `(|y - Xw|² + λ|w_cols|²) / n` at arbitrary weights.
pub fn ridge_loss(weights: &[f64], rows: &[ThroughputSample], n_ues: usize, fs: FeatureSet, ridge_lambda: f64) -> f64 {
    let (x, y) = design(rows, fs, n_ues);
    let w = DVector::from_column_slice(weights);
    let r = y - x * w;
    let penalty: f64 = weights[1..].iter().map(|v| v * v).sum();
    (r.norm_squared() + ridge_lambda * penalty) / rows.len() as f64
}

/// One line of the predictor study CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub feature_set: &'static str,
    pub seed: u64,
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
}

/// Trains and tests both feature sets on one dataset per seed.
pub fn study(n: usize, seeds: impl IntoIterator<Item = u64>, ridge_lambda: f64) -> Result<Vec<StudyRow>, PredictorError> {
    let mut rows = Vec::new();
    for seed in seeds {
        let data = generate_synthetic_dataset(n, &mut SimRng::new(seed));
        for fs in [FeatureSet::D5, FeatureSet::D3] {
            let model = train(&data, fs, ridge_lambda)?;
            let m = evaluate(&model, data.test(), fs)?;
            rows.push(StudyRow {
                feature_set: fs.name(),
                seed,
                mse: m.mse,
                mae: m.mae,
                rmse: m.rmse,
            });
        }
    }
    Ok(rows)
}
