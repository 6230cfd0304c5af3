//! Minibatch training loop.

use std::path::PathBuf;

use super::{adam_step, backward, forward, save_checkpoint, AdamState, FeatureMap, Gradients, Head, Parameters};
use crate::dataset::{augment, example_rng, make_commutative_batch, synthesize_example, Batch, BatchEntry, SegmentedSample, SynthesisConfig};
use crate::error::{invalid, Error, Result};
use crate::losses::{bce_loss, l1_loss, mse_loss, regression_loss, LossValue};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// Binary cross-entropy on the segmentation head.
    Bce,
    /// NPS dissimilarity plus range term on the regression head.
    Nps { alpha: f64 },
    L1,
    Mse,
}

impl Objective {
    pub fn head(&self) -> Head {
        match self {
            Objective::Bce => Head::Seg,
            _ => Head::Reg,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::Bce => "bce",
            Objective::Nps { .. } => "nps",
            Objective::L1 => "l1",
            Objective::Mse => "mse",
        }
    }

    /// Parses `bce`, `nps`, `l1` or `mse`; `alpha` only applies to `nps`.
    pub fn parse(name: &str, alpha: f64) -> Result<Objective> {
        match name {
            "bce" => Ok(Objective::Bce),
            "nps" if alpha > 0.0 && alpha.is_finite() => Ok(Objective::Nps { alpha }),
            "nps" => Err(invalid("alpha must be positive")),
            "l1" => Ok(Objective::L1),
            "mse" => Ok(Objective::Mse),
            other => Err(invalid(format!("unknown loss {other:?}"))),
        }
    }

    pub fn evaluate(&self, output: &FeatureMap, entry: &BatchEntry) -> Result<LossValue> {
        match *self {
            Objective::Bce => bce_loss(output, &entry.target),
            Objective::Nps { alpha } => regression_loss(output, &entry.truth, alpha),
            Objective::L1 => l1_loss(output, &entry.truth),
            Objective::Mse => mse_loss(output, &entry.truth),
        }
    }
}

/// Loss and parameter gradient for a single tuple.
pub fn entry_gradient(params: &Parameters, entry: &BatchEntry, objective: Objective) -> Result<(f64, Gradients)> {
    let (out, cache) = forward(params, &entry.pair)?;
    let loss = objective.evaluate(&out, entry)?;
    let grads = backward(params, &cache, &loss.gradient)?;
    Ok((loss.value, grads))
}

/// Mean loss and mean gradient over a batch. Per-entry work runs in
/// parallel; the reduction is sequential in entry order.
pub fn batch_gradient(params: &Parameters, batch: &Batch, objective: Objective) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(invalid("empty batch"));
    }
    let parts = par::map_slice(&batch.entries, |e| entry_gradient(params, e, objective));
    let mut total = Gradients::zeros_like(params);
    let mut loss = 0.0;
    for part in parts {
        let (l, g) = part?;
        loss += l;
        total.add_assign(&g);
    }
    let scale = 1.0 / batch.len() as f64;
    total.scale(scale);
    Ok((loss * scale, total))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub epochs: usize,
    /// Examples per minibatch, before the reversed tuples are added.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Append each example's reversed tuple to its batch.
    pub commutative: bool,
    pub synthesis: SynthesisConfig,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            epochs: 1,
            batch_size: 3,
            learning_rate: 1e-5,
            commutative: true,
            synthesis: SynthesisConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpointing {
    pub dir: PathBuf,
    /// Save after every `every`-th epoch.
    pub every: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingReport {
    /// Mean batch loss per iteration.
    pub iteration_losses: Vec<f64>,
    /// Mean of the iteration losses within each epoch.
    pub epoch_losses: Vec<f64>,
    pub checkpoints: Vec<PathBuf>,
}

impl TrainingReport {
    pub fn iterations(&self) -> usize {
        self.iteration_losses.len()
    }
}

/// Trains `params` in place. Every epoch draws a fresh synthetic example per
/// sample from the stream `example_rng(seed, epoch·n + i)`, so runs are
/// reproducible regardless of thread count.
pub fn train(
    params: &mut Parameters,
    samples: &[SegmentedSample],
    objective: Objective,
    schedule: &Schedule,
    checkpointing: Option<&Checkpointing>,
) -> Result<TrainingReport> {
    train_with_progress(params, samples, objective, schedule, checkpointing, |_, _| {})
}

/// [`train`], calling `on_epoch(epoch, mean_loss)` after every epoch.
pub fn train_with_progress(
    params: &mut Parameters,
    samples: &[SegmentedSample],
    objective: Objective,
    schedule: &Schedule,
    checkpointing: Option<&Checkpointing>,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainingReport> {
    if objective.head() != params.config().head {
        return Err(invalid(format!(
            "{} loss does not match the {:?} head",
            objective.name(),
            params.config().head
        )));
    }
    if schedule.batch_size == 0 || !(schedule.learning_rate > 0.0) {
        return Err(invalid("batch size and learning rate must be positive"));
    }
    schedule.synthesis.validate()?;
    if samples.is_empty() && schedule.epochs > 0 {
        return Err(invalid("no training samples"));
    }
    if let Some(c) = checkpointing {
        if c.every == 0 {
            return Err(invalid("checkpoint interval must be positive"));
        }
        std::fs::create_dir_all(&c.dir)?;
    }

    let mut adam = AdamState::for_parameters(params, schedule.learning_rate);
    let mut report = TrainingReport::default();
    let n = samples.len() as u64;
    let cfg = &schedule.synthesis;
    for epoch in 0..schedule.epochs {
        let indices: Vec<u64> = (0..n).map(|i| epoch as u64 * n + i).collect();
        let examples = par::map_slice(&indices, |&idx| {
            let mut rng = example_rng(cfg.seed, idx);
            let e = synthesize_example(&samples[(idx % n) as usize], cfg, &mut rng)?;
            Ok(augment(&e, cfg, &mut rng))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let mut epoch_total = 0.0;
        let mut batches = 0;
        for (b, chunk) in examples.chunks(schedule.batch_size).enumerate() {
            let batch = if schedule.commutative {
                make_commutative_batch(chunk)?
            } else {
                Batch::plain(chunk)?
            };
            let (loss, grads) = batch_gradient(params, &batch, objective)?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            adam_step(params, &grads, &mut adam)?;
            report.iteration_losses.push(loss);
            epoch_total += loss;
            batches += 1;
        }
        let mean = epoch_total / batches as f64;
        report.epoch_losses.push(mean);
        on_epoch(epoch, mean);

        if let Some(c) = checkpointing {
            if (epoch + 1) % c.every == 0 {
                let path = c.dir.join(format!("epoch-{:04}.mfhg", epoch + 1));
                save_checkpoint(params, &path)?;
                report.checkpoints.push(path);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_procedural_sample;
    use crate::network::{init_parameters, HourglassConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn samples(k: usize) -> Vec<SegmentedSample> {
        (0..k)
            .map(|i| generate_procedural_sample(16, 16, 2, &mut ChaCha8Rng::seed_from_u64(i as u64)).unwrap())
            .collect()
    }

    fn params(head: Head) -> Parameters {
        let cfg = HourglassConfig {
            depth: 1,
            base_channels: 4,
            head,
        };
        init_parameters(cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap()
    }

    fn schedule(epochs: usize) -> Schedule {
        Schedule {
            epochs,
            batch_size: 2,
            learning_rate: 1e-3,
            commutative: true,
            synthesis: SynthesisConfig {
                crop: 16,
                ..SynthesisConfig::default()
            },
        }
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let mut p = params(Head::Seg);
        let before = p.clone();
        let r = train(&mut p, &samples(2), Objective::Bce, &schedule(0), None).unwrap();
        assert_eq!(p, before);
        assert!(r.iteration_losses.is_empty() && r.epoch_losses.is_empty());
    }

    #[test]
    fn traces_have_expected_lengths() {
        let mut p = params(Head::Reg);
        let r = train(&mut p, &samples(3), Objective::Nps { alpha: 6.0 }, &schedule(2), None).unwrap();
        assert_eq!(r.iterations(), 4);
        assert_eq!(r.epoch_losses.len(), 2);
        assert!(r.iteration_losses.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn head_mismatch_is_rejected() {
        let mut p = params(Head::Seg);
        assert!(train(&mut p, &samples(1), Objective::L1, &schedule(1), None).is_err());
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut p = params(Head::Seg);
            train(&mut p, &samples(2), Objective::Bce, &schedule(2), None).unwrap();
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn checkpoints_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = params(Head::Seg);
        let c = Checkpointing {
            dir: dir.path().join("ckpt"),
            every: 1,
        };
        let r = train(&mut p, &samples(1), Objective::Bce, &schedule(2), Some(&c)).unwrap();
        assert_eq!(r.checkpoints.len(), 2);
        assert!(r.checkpoints.iter().all(|p| p.exists()));
    }

    #[test]
    fn parse_objectives() {
        assert_eq!(Objective::parse("nps", 6.0).unwrap(), Objective::Nps { alpha: 6.0 });
        assert!(Objective::parse("nps", 0.0).is_err());
        assert!(Objective::parse("huber", 1.0).is_err());
    }
}
