//! Training: categorical cross-entropy, categorical accuracy, the Adam
//! optimizer, and the epoch loop with best-on-validation checkpointing.
//!
//! Epoch metrics are computed in evaluation mode over the full split after
//! that epoch's updates, so histories are comparable across batch sizes. A
//! checkpoint is written whenever validation accuracy strictly improves; ties
//! keep the earlier epoch.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;

use crate::data::{Dataset, Label, RngSeed};
use crate::error::{Error, Result};
use crate::nn::{
    model_forward_batch_eval, model_step_batch, one_hot, save_checkpoint, ModelGrads, ModelParams,
};
use crate::rng::{rng_from, stream, subseed2};

/// Loss clamp: probabilities below this floor are treated as the floor so the
/// loss stays finite.
pub const PROB_FLOOR: f64 = 1e-12;

/// −log p(true class), with the clamp above.
pub fn categorical_crossentropy(probs: &Array1<f64>, y: &Array1<f64>) -> Result<f64> {
    if probs.len() != y.len() {
        return Err(Error::LengthMismatch {
            got: y.len(),
            expected: probs.len(),
        });
    }
    let sum = probs.sum();
    if probs.iter().any(|&p| p.is_nan() || p < 0.0) || sum.is_nan() || (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidDistribution(format!(
            "entries must be non-negative and sum to 1, got sum {sum}"
        )));
    }
    let true_idx = y
        .iter()
        .position(|&v| v == 1.0)
        .ok_or_else(|| Error::InvalidDistribution("target is not one-hot".into()))?;
    Ok(-probs[true_idx].max(PROB_FLOOR).ln())
}

/// Fraction of samples whose argmax prediction matches the label; argmax ties
/// break toward the lowest class index.
pub fn categorical_accuracy(probs: &[Array1<f64>], labels: &[Label]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if probs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            got: labels.len(),
            expected: probs.len(),
        });
    }
    let correct = probs
        .iter()
        .zip(labels)
        .filter(|(p, l)| crate::nn::argmax(p) == l.index())
        .count();
    Ok(correct as f64 / probs.len() as f64)
}

/// Adam optimizer state; moments are shaped exactly like the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: ModelGrads,
    pub v: ModelGrads,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ModelParams, lr: f64) -> AdamState {
        AdamState {
            m: ModelGrads::zeros_like(params),
            v: ModelGrads::zeros_like(params),
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update: biased moment updates, bias correction, then
/// θ ← θ − α·m̂/(√v̂ + ε).
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelGrads,
    state: &mut AdamState,
) -> Result<()> {
    if !grads.shape_matches(params) || !state.m.shape_matches(params) {
        return Err(Error::ShapeMismatch {
            got: vec![],
            expected: vec![],
        });
    }
    state.t += 1;
    let bc1 = 1.0 - state.beta1.powi(state.t as i32);
    let bc2 = 1.0 - state.beta2.powi(state.t as i32);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.epsilon);

    let mut theta = params.flat_views_mut();
    let g = grads.flat_views();
    let mut m = state.m.flat_views_mut();
    let mut v = state.v.flat_views_mut();
    for i in 0..theta.len() {
        for (((t, &g), m), v) in theta[i]
            .iter_mut()
            .zip(g[i].iter())
            .zip(m[i].iter_mut())
            .zip(v[i].iter_mut())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *t -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: RngSeed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 197,
            batch_size: 64,
            lr: 1e-3,
            seed: RngSeed::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// 1-based epoch whose checkpoint is the best (first maximum on ties).
    pub best_epoch: usize,
}

/// The "save on improvement" policy: strict improvements in validation
/// accuracy trigger a checkpoint; the first maximum wins on ties.
#[derive(Debug, Clone, Copy)]
pub struct BestTracker {
    best_acc: f64,
    best_epoch: usize,
}

impl BestTracker {
    pub fn new() -> BestTracker {
        BestTracker {
            best_acc: f64::NEG_INFINITY,
            best_epoch: 0,
        }
    }

    /// Records epoch's validation accuracy; returns whether it strictly
    /// improved (and should be checkpointed).
    pub fn observe(&mut self, epoch: usize, val_acc: f64) -> bool {
        if val_acc > self.best_acc {
            self.best_acc = val_acc;
            self.best_epoch = epoch;
            true
        } else {
            false
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_acc(&self) -> f64 {
        self.best_acc
    }
}

impl Default for BestTracker {
    fn default() -> Self {
        Self::new()
    }
}

/// Mean loss and accuracy of a split in evaluation mode.
pub fn evaluate_split(params: &ModelParams, ds: &Dataset) -> Result<(f64, f64)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut loss_sum = 0.0;
    let mut probs = Vec::with_capacity(ds.len());
    for chunk in ds.samples().chunks(256) {
        let xs: Vec<&Array2<f64>> = chunk.iter().map(|s| &s.features).collect();
        let rows = model_forward_batch_eval(&xs, params)?;
        for (row, s) in rows.rows().into_iter().zip(chunk) {
            let p = row.to_owned();
            loss_sum += categorical_crossentropy(&p, &one_hot(s.label, p.len()))?;
            probs.push(p);
        }
    }
    let acc = categorical_accuracy(&probs, &ds.labels())?;
    Ok((loss_sum / ds.len() as f64, acc))
}

/// Runs the full training loop and returns the best-on-validation parameters
/// with the per-epoch history.
///
/// When `checkpoint_dir` is given, every improvement writes
/// `ckpt_epoch_<n>.bin` and refreshes `ckpt_best.bin`. A non-finite epoch
/// loss aborts with [`Error::DivergedLoss`]; checkpoints written so far stay
/// on disk.
pub fn train(
    model: ModelParams,
    train_ds: &Dataset,
    val_ds: &Dataset,
    cfg: &TrainConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<(ModelParams, TrainHistory)> {
    assert!(cfg.epochs >= 1, "epochs must be at least 1");
    assert!(cfg.batch_size >= 1, "batch_size must be at least 1");
    if train_ds.is_empty() || val_ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train_ds.feature_dim != model.layer1.input_dim() {
        return Err(Error::ShapeMismatch {
            got: vec![train_ds.timesteps, train_ds.feature_dim],
            expected: vec![train_ds.timesteps, model.layer1.input_dim()],
        });
    }

    let mut params = model;
    let mut adam = AdamState::new(&params, cfg.lr);
    let mut tracker = BestTracker::new();
    let mut best_params = params.clone();
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut step: u64 = 0;

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..train_ds.len()).collect();
        let mut rng = rng_from(subseed2(cfg.seed.0, stream::SHUFFLE, epoch as u64));
        order.shuffle(&mut rng);

        for batch in order.chunks(cfg.batch_size) {
            let xs: Vec<&Array2<f64>> = batch
                .iter()
                .map(|&i| &train_ds.samples()[i].features)
                .collect();
            let labels: Vec<Label> = batch.iter().map(|&i| train_ds.samples()[i].label).collect();
            let seeds: Vec<u64> = batch
                .iter()
                .map(|_| {
                    step += 1;
                    subseed2(cfg.seed.0, stream::DROPOUT, step)
                })
                .collect();
            let out = model_step_batch(&xs, &labels, &params, &seeds)?;
            adam_step(&mut params, &out.grads, &mut adam)?;
        }

        // a model that stops emitting valid distributions has diverged
        let diverged = |e| match e {
            Error::InvalidDistribution(_) => Error::DivergedLoss { epoch },
            other => other,
        };
        let (train_loss, train_acc) = evaluate_split(&params, train_ds).map_err(diverged)?;
        let (val_loss, val_acc) = evaluate_split(&params, val_ds).map_err(diverged)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::DivergedLoss { epoch });
        }
        records.push(EpochRecord {
            epoch,
            train_loss,
            train_acc,
            val_loss,
            val_acc,
        });

        if tracker.observe(epoch, val_acc) {
            best_params = params.clone();
            if let Some(dir) = checkpoint_dir {
                save_checkpoint(&best_params, &dir.join(format!("ckpt_epoch_{epoch}.bin")))?;
                save_checkpoint(&best_params, &dir.join("ckpt_best.bin"))?;
            }
        }
    }

    Ok((
        best_params,
        TrainHistory {
            records,
            best_epoch: tracker.best_epoch(),
        },
    ))
}

// --- history CSV --------------------------------------------------------

/// Writes the per-epoch curves as CSV: the data behind loss/accuracy plots.
pub fn write_history(history: &TrainHistory, path: &Path) -> Result<()> {
    let mut text = String::from("epoch,train_loss,train_acc,val_loss,val_acc\n");
    for r in &history.records {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc
        ));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a history CSV back; `best_epoch` is recomputed with the same
/// first-maximum rule the training loop uses.
pub fn read_history(path: &Path) -> Result<TrainHistory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut tracker = BestTracker::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::MalformedLine {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::MalformedLine {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("non-numeric field `{s}`"),
            })
        };
        let record = EpochRecord {
            epoch: parse(fields[0])? as usize,
            train_loss: parse(fields[1])?,
            train_acc: parse(fields[2])?,
            val_loss: parse(fields[3])?,
            val_acc: parse(fields[4])?,
        };
        tracker.observe(record.epoch, record.val_acc);
        records.push(record);
    }
    Ok(TrainHistory {
        records,
        best_epoch: tracker.best_epoch(),
    })
}
