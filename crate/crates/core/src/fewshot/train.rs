use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FewShotError, TrainConfig};
use crate::analysis::macro_f1;
use crate::model::{Classifier, GraphMode, MlpHead, ModelParameters, PreparedInstance};

/// Adaptive-moment optimizer over every model tensor.
#[derive(Debug, Clone)]
pub struct Adam {
    m: ModelParameters,
    v: ModelParameters,
    t: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    pub fn new(params: &ModelParameters, config: &TrainConfig) -> Self {
        Adam {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            lr: config.learning_rate,
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: config.epsilon,
        }
    }

    /// Apply one update with gradient `grad * scale`.
    pub fn step(&mut self, params: &mut ModelParameters, grad: &ModelParameters, scale: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        let grads = grad.tensors();
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads)
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            for i in 0..p.data.len() {
                let gi = g.data[i] * scale;
                m.data[i] = b1 * m.data[i] + (1.0 - b1) * gi;
                v.data[i] = b2 * v.data[i] + (1.0 - b2) * gi * gi;
                let mhat = m.data[i] / c1;
                let vhat = v.data[i] / c2;
                p.data[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    NoImprovement,
    Stop,
}

/// Patience counter over strictly improving scores.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best: Option<f64>,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            best: None,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, score: f64) -> StopDecision {
        if self.best.is_none_or(|b| score > b) {
            self.best = Some(score);
            self.best_epoch = epoch;
            self.stale = 0;
            return StopDecision::Improved;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::NoImprovement
        }
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// 1-based epoch of the returned weights.
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub dev_f1: f64,
    pub dev_history: Vec<f64>,
}

pub fn predict_all(model: &Classifier, data: &[PreparedInstance]) -> Result<Vec<usize>, FewShotError> {
    data.iter().map(|x| Ok(model.predict(x)?)).collect()
}

fn golds(data: &[PreparedInstance]) -> Result<Vec<usize>, FewShotError> {
    data.iter()
        .map(|x| {
            x.label
                .ok_or_else(|| FewShotError::Invalid(format!("instance {} has no label", x.id)))
        })
        .collect()
}

/// Macro-F1 (percent) of `model` on labeled `data`.
pub fn evaluate(model: &Classifier, data: &[PreparedInstance]) -> Result<f64, FewShotError> {
    let preds = predict_all(model, data)?;
    Ok(macro_f1(&preds, &golds(data)?, model.config.num_classes)?)
}

/// Train with cross-entropy and Adam, evaluating dev macro-F1 after each
/// epoch; returns the weights from the best dev epoch.
pub fn train_until_early_stop(
    mut model: Classifier,
    train: &[PreparedInstance],
    dev: &[PreparedInstance],
    config: &TrainConfig,
    shuffle_seed: u64,
) -> Result<(Classifier, TrainOutcome), FewShotError> {
    config.validate()?;
    if train.is_empty() {
        return Err(FewShotError::EmptyTrainingSet);
    }
    if dev.is_empty() {
        return Err(FewShotError::Invalid("empty dev set".into()));
    }
    let labels = golds(train)?;
    let mut adam = Adam::new(&model.params, config);
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopper = EarlyStopper::new(config.patience);
    let mut best = model.clone();
    let mut history = Vec::new();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grad = model.params.zeros_like();
            let mut loss = 0.0;
            for &i in batch {
                loss += model.loss_and_gradient(&train[i], labels[i], &mut grad)?;
            }
            if !loss.is_finite() || !grad.all_finite() {
                return Err(FewShotError::Diverged {
                    epoch,
                    batch: b + 1,
                    loss,
                });
            }
            adam.step(&mut model.params, &grad, 1.0 / batch.len() as f64);
        }
        let f1 = evaluate(&model, dev)?;
        history.push(f1);
        match stopper.observe(epoch, f1) {
            StopDecision::Improved => best = model.clone(),
            StopDecision::NoImprovement => {}
            StopDecision::Stop => break,
        }
    }
    let outcome = TrainOutcome {
        best_epoch: stopper.best_epoch(),
        epochs_run: history.len(),
        dev_f1: stopper.best().unwrap_or(0.0),
        dev_history: history,
    };
    Ok((best, outcome))
}

/// Copy a trained model's encoder and convolution weights and attach a
/// fresh head for `num_classes` target classes.
pub fn transfer_init(
    source: &Classifier,
    target_mode: GraphMode,
    num_classes: usize,
    head_seed: u64,
) -> Result<Classifier, FewShotError> {
    if source.config.graph_mode != target_mode {
        return Err(FewShotError::ModeMismatch {
            source_mode: source.config.graph_mode,
            target_mode,
        });
    }
    if num_classes < 2 {
        return Err(FewShotError::Invalid(format!("{num_classes} target classes")));
    }
    let mut config = source.config.clone();
    config.num_classes = num_classes;
    let h = config.hidden();
    let mut rng = ChaCha8Rng::seed_from_u64(head_seed);
    Ok(Classifier {
        params: ModelParameters {
            encoder: source.params.encoder.clone(),
            conv: source.params.conv.clone(),
            head: MlpHead::new(3 * h, h, num_classes, &mut rng),
        },
        config,
    })
}
