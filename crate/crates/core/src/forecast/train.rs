use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureRow, Normalization, INPUT_DIM};
use super::gru::{self, GruParameters};
use super::model::{predict_horizon, ForecastModel, TrainReport};
use super::ForecastError;
use crate::metrics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Number of past weeks fed to the network.
    pub window: usize,
    pub epochs: usize,
    pub hidden_dim: usize,
    /// Dropout on the final hidden state during training.
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub seed: u64,
    /// Share of the sliding windows held out, taken from the end.
    pub test_fraction: f64,
    /// Windows per optimizer step; 0 means the whole training split.
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Multiplies the learning rate after every epoch; 1 keeps it fixed.
    pub lr_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window: 12,
            epochs: 100,
            hidden_dim: 64,
            dropout_rate: 0.2,
            learning_rate: 1e-3,
            seed: 0,
            test_fraction: 0.2,
            batch_size: 0,
            adam: AdamConfig::default(),
            lr_decay: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        let bad = |m: &str| Err(ForecastError::InvalidConfig(m.to_string()));
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must be in [0, 1)");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test_fraction must be in (0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must be in (0, 1]");
        }
        Ok(())
    }
}

/// Target row indices of the training and held-out windows. A window with
/// target `t` reads rows `t - window .. t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSplit {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Chronological split: the last `test_fraction` of the windows (at least
/// one) are held out, at least one remains for training.
pub fn split_windows(
    len: usize,
    window: usize,
    test_fraction: f64,
) -> Result<WindowSplit, ForecastError> {
    let needed = window + 2;
    if len < needed {
        return Err(ForecastError::SeriesTooShort { len, needed });
    }
    let windows = len - window;
    let test = ((test_fraction * windows as f64).round() as usize).clamp(1, windows - 1);
    let boundary = len - test;
    Ok(WindowSplit {
        train: window..boundary,
        test: boundary..len,
    })
}

struct Adam {
    config: AdamConfig,
    lr: f64,
    m: GruParameters,
    v: GruParameters,
    t: i32,
}

impl Adam {
    fn new(params: &GruParameters, lr: f64, config: AdamConfig) -> Self {
        let zeros = GruParameters::zeros(params.input_dim, params.hidden_dim);
        Adam {
            config,
            lr,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, params: &mut GruParameters, grads: &GruParameters) {
        self.t += 1;
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
            .zip(grads.tensors());
        for (((p, m), v), g) in tensors {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                p[i] -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + epsilon);
            }
        }
    }
}

fn dropout_mask(rng: &mut ChaCha8Rng, hidden: usize, rate: f64) -> Option<Vec<f64>> {
    (rate > 0.0).then(|| {
        let keep = 1.0 / (1.0 - rate);
        (0..hidden)
            .map(|_| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    keep
                }
            })
            .collect()
    })
}

/// Fits a model on the chronological training split of `rows` by
/// minimizing the RMSE of one-step predictions.
pub fn train(
    article_type: &str,
    rows: &[FeatureRow],
    config: &TrainConfig,
) -> Result<ForecastModel, ForecastError> {
    config.validate()?;
    let k = config.window;
    let split = split_windows(rows.len(), k, config.test_fraction)?;
    let normalization = Normalization::fit(&rows[..split.train.end]);
    let inputs: Vec<Vec<f64>> = rows.iter().map(|r| normalization.input_vector(r)).collect();
    let targets: Vec<f64> = rows
        .iter()
        .map(|r| normalization.normalize_value(r.value))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = GruParameters::init_uniform(INPUT_DIM, config.hidden_dim, &mut rng);
    let mut adam = Adam::new(&params, config.learning_rate, config.adam);
    let mut order: Vec<usize> = split.train.clone().collect();
    let batch = if config.batch_size == 0 {
        order.len()
    } else {
        config.batch_size
    };
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if batch < order.len() {
            order.shuffle(&mut rng);
        }
        let mut epoch_sq = 0.0;
        for chunk in order.chunks(batch) {
            let mut grads = GruParameters::zeros(INPUT_DIM, config.hidden_dim);
            let mut batch_sq = 0.0;
            for &t in chunk {
                let mask = dropout_mask(&mut rng, config.hidden_dim, config.dropout_rate);
                let g =
                    gru::gradients_masked(&params, &inputs[t - k..t], targets[t], mask.as_deref())?;
                grads.add_assign(&g.grads);
                batch_sq += g.squared_error;
            }
            let batch_rmse = (batch_sq / chunk.len() as f64).sqrt();
            if !batch_rmse.is_finite() {
                return Err(ForecastError::Divergence { epoch });
            }
            // ∂ sqrt(mean e²) = Σ ∂(e²) / (2 n rmse)
            if batch_rmse > 0.0 {
                grads.scale(1.0 / (2.0 * chunk.len() as f64 * batch_rmse));
                adam.step(&mut params, &grads);
            }
            epoch_sq += batch_sq;
        }
        let loss = (epoch_sq / order.len() as f64).sqrt();
        if !loss.is_finite() || params.check().is_err() {
            return Err(ForecastError::Divergence { epoch });
        }
        epoch_losses.push(loss);
        adam.lr *= config.lr_decay;
    }

    let mut model = ForecastModel {
        article_type: article_type.to_string(),
        params,
        config: config.clone(),
        normalization,
        train_report: TrainReport {
            epoch_losses,
            train_targets: (split.train.start, split.train.end),
            test_targets: (split.test.start, split.test.end),
            ..TrainReport::default()
        },
    };
    let (actual, predicted) = one_step_predictions(&model, rows, split.test.clone())?;
    model.train_report.test_rmse = metrics::rmse(&actual, &predicted).ok();
    if let Ok(m) = metrics::mape(&actual, &predicted) {
        model.train_report.test_mape = Some(m.value);
        model.train_report.test_mape_skipped = m.skipped;
    }
    Ok(model)
}

/// `(actual, predicted)` for each target in `targets`, predicting from the
/// true preceding window.
pub fn one_step_predictions<F: super::Forecaster + ?Sized>(
    model: &F,
    rows: &[FeatureRow],
    targets: Range<usize>,
) -> Result<(Vec<f64>, Vec<f64>), ForecastError> {
    let k = model.window_len();
    let mut actual = Vec::with_capacity(targets.len());
    let mut predicted = Vec::with_capacity(targets.len());
    for t in targets {
        actual.push(rows[t].value);
        predicted.push(predict_horizon(model, &rows[t - k..t], 1, None)?[0]);
    }
    Ok((actual, predicted))
}
