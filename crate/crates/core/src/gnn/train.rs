// SPDX-License-Identifier: Apache-2.0

//! Adam training loop, loss balancing and evaluation.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::ZNorm;

use super::model::{predict_batch, weighted_loss, ModelWeights, ENCODER, HIDDEN};
use super::{Example, GnnError, GraphSample, ModelKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    /// Fixes initialization and batch order.
    pub seed: u64,
    /// Iterations over which the subtype-loss weight is calibrated.
    pub warmup_iters: usize,
    pub hidden: usize,
    /// Route subtype losses by the true topology instead of the predicted.
    pub teacher_forcing: bool,
    pub bn_momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            epochs: 200,
            learning_rate: 1e-3,
            batch_size: 16,
            weight_decay: 1e-5,
            seed: 0,
            warmup_iters: 100,
            hidden: HIDDEN,
            teacher_forcing: false,
            bn_momentum: 0.1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), GnnError> {
        let bad = |what: &str| Err(GnnError::Config(what.to_string()));
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return bad("epochs, batch size and hidden width must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.weight_decay >= 0.0) {
            return bad("learning rate must be positive and weight decay non-negative");
        }
        if !(0.0..=1.0).contains(&self.bn_momentum) {
            return bad("batch-norm momentum must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Running means of the squared encoder-gradient norms of the two loss
/// streams.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlphaCalibrator {
    topo_sq: f64,
    sub_sq: f64,
    iters: usize,
}

impl AlphaCalibrator {
    /// Records one iteration's squared Frobenius norms.
    pub fn push(&mut self, topo_sq: f64, sub_sq: f64) {
        self.topo_sq += topo_sq;
        self.sub_sq += sub_sq;
        self.iters += 1;
    }

    pub fn iterations(&self) -> usize {
        self.iters
    }

    /// `sqrt(mean topo / mean sub)`, or `None` without a subtype gradient.
    pub fn alpha(&self) -> Option<f64> {
        if self.iters == 0 || !(self.sub_sq > 0.0) {
            return None;
        }
        let a = (self.topo_sq / self.sub_sq).sqrt();
        a.is_finite().then_some(a)
    }
}

fn encoder_sq_norm(grads: &[Array2<f64>]) -> f64 {
    grads[..ENCODER].iter().map(|g| g.iter().map(|v| v * v).sum::<f64>()).sum()
}

/// Topology-only and subtype-only gradients of one batch.
fn split_gradients(
    w: &ModelWeights,
    batch: &[&Example],
    teacher: bool,
) -> Result<(super::LossOutput, super::LossOutput), GnnError> {
    Ok((
        weighted_loss(w, batch, 1.0, 0.0, teacher)?,
        weighted_loss(w, batch, 0.0, 1.0, teacher)?,
    ))
}

/// Subtype-loss weight from the gradient norms over `warmup_batches` at
/// fixed weights. Falls back to 1 when no batch yields a subtype gradient.
pub fn calibrate_alpha(w: &ModelWeights, warmup_batches: &[Vec<&Example>]) -> Result<f64, GnnError> {
    let mut cal = AlphaCalibrator::default();
    for b in warmup_batches {
        let (t, s) = split_gradients(w, b, false)?;
        cal.push(encoder_sq_norm(&t.grads), encoder_sq_norm(&s.grads));
    }
    Ok(cal.alpha().unwrap_or_else(|| {
        log::warn!("no subtype gradient during warm-up; using alpha = 1");
        1.0
    }))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub alpha: f64,
    /// Mean training loss per epoch.
    pub epoch_loss: Vec<f64>,
    /// Epoch, from 1, whose weights were kept.
    pub best_epoch: usize,
    pub best_accuracy: f64,
    pub misrouted: usize,
}

struct Adam {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn step(&mut self, params: &mut [Array2<f64>], grads: &[Array2<f64>], lr: f64, wd: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                let g = g + wd * *p;
                *m = Self::B1 * *m + (1.0 - Self::B1) * g;
                *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
            });
        }
    }
}

/// Fraction of `examples` whose label ranks among the top `k`.
pub fn accuracy(w: &ModelWeights, examples: &[Example], k: usize) -> Result<f64, GnnError> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let graphs: Vec<&GraphSample> = examples.iter().map(|e| &e.graph).collect();
    let preds = predict_batch(w, &graphs)?;
    let hits = preds
        .iter()
        .zip(examples)
        .filter(|(p, e)| p.rank_of(w.kind, e.label).is_some_and(|r| r < k))
        .count();
    Ok(hits as f64 / examples.len() as f64)
}

/// Trains a model of `kind` and returns the weights with the best top-1
/// accuracy on `validation` (on the training set when it is empty).
///
/// For FSA models the first `warmup_iters` iterations use a subtype weight
/// of 1 while the gradient norms are averaged; the calibrated weight is
/// used from then on.
pub fn train(
    kind: ModelKind,
    train_set: &[Example],
    validation: &[Example],
    cfg: &TrainConfig,
) -> Result<(ModelWeights, TrainReport), GnnError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut w = ModelWeights::new(kind, cfg.hidden, cfg.seed);
    w.norm = ZNorm::fit(&train_set.iter().map(|e| e.graph.scalars.clone()).collect::<Vec<_>>());
    let mut adam = Adam {
        m: w.zeros_like_params(),
        v: w.zeros_like_params(),
        t: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_ba7c);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let eval_set = if validation.is_empty() { train_set } else { validation };
    let mut cal = AlphaCalibrator::default();
    let mut calibrated = kind == ModelKind::Ppa;
    let mut report = TrainReport {
        alpha: 1.0,
        ..TrainReport::default()
    };
    let mut best: Option<(f64, ModelWeights)> = None;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (bi, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &train_set[i]).collect();
            let out = if calibrated {
                weighted_loss(&w, &batch, 1.0, w.alpha, cfg.teacher_forcing)?
            } else {
                let (mut t, s) = split_gradients(&w, &batch, cfg.teacher_forcing)?;
                cal.push(encoder_sq_norm(&t.grads), encoder_sq_norm(&s.grads));
                for (a, b) in t.grads.iter_mut().zip(&s.grads) {
                    *a += &(b * w.alpha);
                }
                t.loss = t.topo_loss + w.alpha * s.sub_loss;
                if cal.iterations() >= cfg.warmup_iters {
                    w.alpha = cal.alpha().unwrap_or(1.0);
                    calibrated = true;
                    log::info!("alpha calibrated to {:.4} over {} iterations", w.alpha, cal.iterations());
                }
                t
            };
            if !out.loss.is_finite() || out.grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
                return Err(GnnError::Diverged { epoch: epoch + 1, batch: bi });
            }
            report.misrouted += out.misrouted;
            total += out.loss;
            batches += 1;
            adam.step(&mut w.params, &out.grads, cfg.learning_rate, cfg.weight_decay);
            if let Some((mean, var)) = &out.batch_stats {
                let m = cfg.bn_momentum;
                w.bn_running_mean = &w.bn_running_mean * (1.0 - m) + mean * m;
                w.bn_running_var = &w.bn_running_var * (1.0 - m) + var * m;
            }
        }
        report.epoch_loss.push(total / batches as f64);
        let acc = accuracy(&w, eval_set, 1)?;
        if best.as_ref().is_none_or(|(b, _)| acc >= *b) {
            best = Some((acc, w.clone()));
            report.best_epoch = epoch + 1;
            report.best_accuracy = acc;
        }
        log::debug!("epoch {} loss {:.5} accuracy {:.3}", epoch + 1, report.epoch_loss[epoch], acc);
    }
    let mut kept = best.map(|b| b.1).unwrap_or(w);
    if !calibrated {
        kept.alpha = cal.alpha().unwrap_or(1.0);
        log::info!("alpha calibrated to {:.4} over only {} iterations", kept.alpha, cal.iterations());
    }
    report.alpha = kept.alpha;
    Ok((kept, report))
}
