//! Optimizers, the plateau learning-rate scheduler, seeded data
//! generation, and the full-batch training loop.
//!
//! Training is deliberately full-batch: the benchmark sample counts are
//! small enough that one pass per epoch is cheap, and full batches make
//! every loss trace an exact function of (seed, config). Adam/AdamW follow
//! the standard bias-corrected moment updates; AdamW applies its weight
//! decay decoupled from the adaptive step.

use crate::networks::{Batch, Model, ModNetParams, NetError, PlainNetParams};
use crate::rng::Xoshiro256;
use crate::targets::Target;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    AdamW,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled decay; only applied by AdamW.
    pub weight_decay: f64,
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }

    pub fn adamw(lr: f64, weight_decay: f64) -> Self {
        OptimizerConfig { kind: OptimizerKind::AdamW, weight_decay, ..Self::adam(lr) }
    }

    fn validate(&self) -> Result<(), TrainError> {
        let ok = self.lr >= 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.weight_decay >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(TrainError::BadConfig(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    /// Loss left the finite range; the offending epoch is recorded.
    NonFiniteLoss { epoch: usize, loss: f64 },
    StateMismatch { expected: usize, got: usize },
    BadConfig(String),
    Net(NetError),
}

impl std::fmt::Display for TrainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrainError::NonFiniteLoss { epoch, loss } => {
                write!(f, "non-finite loss {loss} at epoch {epoch}")
            }
            TrainError::StateMismatch { expected, got } => {
                write!(f, "optimizer state has {got} slots, parameters {expected}")
            }
            TrainError::BadConfig(msg) => write!(f, "bad training config: {msg}"),
            TrainError::Net(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TrainError {}

impl From<NetError> for TrainError {
    fn from(e: NetError) -> Self {
        TrainError::Net(e)
    }
}

/// First/second moment estimates plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        AdamState { m: vec![0.0; param_count], v: vec![0.0; param_count], step: 0 }
    }
}

/// One bias-corrected Adam/AdamW step, in place. `lr` overrides the config
/// learning rate so schedulers can drive it.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    config: &OptimizerConfig,
    lr: f64,
) -> Result<(), TrainError> {
    config.validate()?;
    if state.m.len() != params.len() || grads.len() != params.len() {
        return Err(TrainError::StateMismatch {
            expected: params.len(),
            got: state.m.len().min(grads.len()),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - config.beta1.powi(t);
    let bc2 = 1.0 - config.beta2.powi(t);
    for i in 0..params.len() {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        let mut update = lr * m_hat / (v_hat.sqrt() + config.eps);
        if config.kind == OptimizerKind::AdamW {
            update += lr * config.weight_decay * params[i];
        }
        params[i] -= update;
    }
    Ok(())
}

/// Plateau scheduler configuration. The benchmark uses factor 0.9 with
/// patience 100 / cooldown 200 in one dimension and 50 / 100 in two, both
/// with a 1e-8 learning-rate floor.
#[derive(Clone, Copy, Debug)]
pub struct PlateauConfig {
    pub factor: f64,
    pub patience: usize,
    pub cooldown: usize,
    pub min_lr: f64,
    /// Improvement means `loss < best - threshold`; zero by default.
    pub threshold: f64,
}

impl PlateauConfig {
    pub fn new(factor: f64, patience: usize, cooldown: usize, min_lr: f64) -> Self {
        assert!((0.0..1.0).contains(&factor));
        assert!(patience >= 1);
        assert!(min_lr > 0.0);
        PlateauConfig { factor, patience, cooldown, min_lr, threshold: 0.0 }
    }

    /// The 1-D benchmark schedule.
    pub fn benchmark_1d() -> Self {
        Self::new(0.9, 100, 200, 1e-8)
    }

    /// The 2-D benchmark schedule.
    pub fn benchmark_2d() -> Self {
        Self::new(0.9, 50, 100, 1e-8)
    }
}

/// Scheduler state machine. `step` is called once per epoch with that
/// epoch's loss and returns the learning rate for the next step.
///
/// Rule: a strict improvement of the best-so-far loss resets the bad-epoch
/// count; during cooldown bad epochs are not counted; otherwise `patience`
/// consecutive bad epochs multiply the rate by `factor` (floored at
/// `min_lr`) and start the cooldown. On a constant loss sequence with
/// patience 100 / cooldown 200 the reductions land at epochs 101, 401,
/// 701, ...
#[derive(Clone, Debug)]
pub struct PlateauScheduler {
    pub config: PlateauConfig,
    lr: f64,
    best: f64,
    bad_epochs: usize,
    cooldown_left: usize,
    epoch: usize,
    reductions: Vec<usize>,
}

impl PlateauScheduler {
    pub fn new(config: PlateauConfig, initial_lr: f64) -> Self {
        PlateauScheduler {
            config,
            lr: initial_lr,
            best: f64::INFINITY,
            bad_epochs: 0,
            cooldown_left: 0,
            epoch: 0,
            reductions: Vec::new(),
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Epochs (1-indexed) at which the rate was reduced.
    pub fn reduction_epochs(&self) -> &[usize] {
        &self.reductions
    }

    pub fn step(&mut self, epoch_loss: f64) -> f64 {
        self.epoch += 1;
        let improved = epoch_loss < self.best - self.config.threshold;
        if improved {
            self.best = epoch_loss;
            self.bad_epochs = 0;
        }
        if self.cooldown_left > 0 {
            // The cooldown is an absolute window of epochs after a
            // reduction; it elapses whether or not the loss improves.
            self.cooldown_left -= 1;
            self.bad_epochs = 0;
        } else if !improved {
            self.bad_epochs += 1;
            if self.bad_epochs >= self.config.patience {
                self.lr = (self.lr * self.config.factor).max(self.config.min_lr);
                self.reductions.push(self.epoch);
                self.cooldown_left = self.config.cooldown;
                self.bad_epochs = 0;
            }
        }
        self.lr
    }
}

/// Which architecture a run trains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Modulation,
    Plain,
}

/// Training data source. One-dimensional runs draw seed-dependent uniform
/// samples; two-dimensional runs use a deterministic uniform grid (only the
/// weight initialization is randomized there).
#[derive(Clone, Debug)]
pub enum DataSpec {
    RandomUniform { count: usize },
    Grid { per_axis: usize },
}

/// Full experiment setup for one run.
#[derive(Clone, Debug)]
pub struct TrainSetup {
    pub kind: ModelKind,
    pub units: usize,
    pub domain: Vec<(f64, f64)>,
    pub data: DataSpec,
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub scheduler: Option<PlateauConfig>,
    pub seed: u64,
    /// Fixed constants of the modulation atoms.
    pub t: f64,
    pub tau: f64,
}

/// One training run's record: per-epoch losses (index 0 is the initial
/// loss), learning rates, and wall time.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub seed: u64,
    pub losses: Vec<f64>,
    pub lrs: Vec<f64>,
    pub wall_secs: f64,
}

impl RunRecord {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().unwrap()
    }

    /// CSV rows: epoch, loss, lr.
    pub fn csv(&self) -> String {
        let mut out = String::from("epoch,loss,lr\n");
        for (e, (loss, lr)) in self.losses.iter().zip(&self.lrs).enumerate() {
            out.push_str(&format!("{e},{loss},{lr}\n"));
        }
        out
    }
}

/// Builds the training batch for a target.
pub fn make_batch(target: &Target, domain: &[(f64, f64)], data: &DataSpec, rng: &mut Xoshiro256) -> Batch {
    let dim = domain.len();
    let mut inputs = Vec::new();
    match data {
        DataSpec::RandomUniform { count } => {
            for _ in 0..*count {
                for &(lo, hi) in domain {
                    inputs.push(rng.uniform(lo, hi));
                }
            }
        }
        DataSpec::Grid { per_axis } => {
            assert!(*per_axis >= 2);
            match dim {
                1 => {
                    let (lo, hi) = domain[0];
                    let step = (hi - lo) / (*per_axis - 1) as f64;
                    for i in 0..*per_axis {
                        inputs.push(lo + step * i as f64);
                    }
                }
                2 => {
                    let (lo0, hi0) = domain[0];
                    let (lo1, hi1) = domain[1];
                    let s0 = (hi0 - lo0) / (*per_axis - 1) as f64;
                    let s1 = (hi1 - lo1) / (*per_axis - 1) as f64;
                    for i in 0..*per_axis {
                        for j in 0..*per_axis {
                            inputs.push(lo0 + s0 * i as f64);
                            inputs.push(lo1 + s1 * j as f64);
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    let count = inputs.len() / dim;
    let mut values = Vec::with_capacity(count);
    let mut grads = Vec::with_capacity(count * dim);
    for i in 0..count {
        let (v, g) = target.eval(&inputs[i * dim..(i + 1) * dim]);
        values.push(v);
        grads.extend_from_slice(&g);
    }
    Batch { dim, inputs, values, grads }
}

/// Initializes the model for a setup, deterministically in the seed.
pub fn init_model(setup: &TrainSetup, rng: &mut Xoshiro256) -> Model {
    match setup.kind {
        ModelKind::Modulation => Model::Modulation(ModNetParams::init(
            setup.domain.len(),
            setup.units,
            &setup.domain,
            setup.t,
            setup.tau,
            rng,
        )),
        ModelKind::Plain => {
            Model::Plain(PlainNetParams::init(setup.domain.len(), setup.units, rng))
        }
    }
}

/// Runs the full-batch training loop. Deterministic per (seed, setup).
pub fn train(target: &Target, setup: &TrainSetup) -> Result<(Model, RunRecord), TrainError> {
    setup.optimizer.validate()?;
    if setup.kind == ModelKind::Modulation {
        // The atoms' nonvanishing condition must hold at the fixed constants.
        crate::relu_stft::check_condition_a(setup.t, setup.tau)
            .map_err(|e| TrainError::BadConfig(e.to_string()))?;
    }
    let start = Instant::now();
    let root = Xoshiro256::seed_from(setup.seed);
    let mut data_rng = root.child(1);
    let mut init_rng = root.child(2);
    let batch = make_batch(target, &setup.domain, &setup.data, &mut data_rng);
    let mut model = init_model(setup, &mut init_rng);

    let mut params = model.flatten();
    let mut state = AdamState::new(params.len());
    let mut scheduler = setup.scheduler.map(|cfg| PlateauScheduler::new(cfg, setup.optimizer.lr));
    let mut current_lr = setup.optimizer.lr;

    let mut losses = Vec::with_capacity(setup.epochs + 1);
    let mut lrs = Vec::with_capacity(setup.epochs + 1);
    let (mut loss, mut grad) = model.loss_and_grad(&batch)?;
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss { epoch: 0, loss });
    }
    losses.push(loss);
    lrs.push(current_lr);
    for epoch in 1..=setup.epochs {
        adam_step(&mut state, &mut params, &grad, &setup.optimizer, current_lr)?;
        model.unflatten(&params);
        let (l, g) = model.loss_and_grad(&batch)?;
        if !l.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch, loss: l });
        }
        loss = l;
        grad = g;
        if let Some(s) = scheduler.as_mut() {
            current_lr = s.step(loss);
        }
        losses.push(loss);
        lrs.push(current_lr);
    }
    let record =
        RunRecord { seed: setup.seed, losses, lrs, wall_secs: start.elapsed().as_secs_f64() };
    Ok((model, record))
}
