use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::config::ModelConfig;
use super::network::{forward, loss, loss_and_grads, RunMode};
use super::params::ModelParams;
use crate::error::Result;
use crate::rng::seeded;

/// One probed scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GradProbe {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

/// Inputs for a loss evaluation: frames, target signal and masks for a batch.
#[derive(Debug, Clone)]
pub struct GradCheckBatch {
    pub frames: Vec<f64>,
    pub signal: Vec<f64>,
    pub masks: Vec<f64>,
    pub batch: usize,
}

/// Relative error with a floor of `1e-6` on the denominator. Gradients that
/// are structurally zero (e.g. a bias ahead of a normalization) come out of
/// central differences as round-off of order 1e-12.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Central-difference check of `per_family` scalars from every parameter
/// family (tensor name with numeric parts removed), in training
/// normalization with dropout off. Probes whose `+-eps` step flips any ReLU
/// are replaced by another draw.
pub fn gradient_check(
    params: &ModelParams,
    cfg: &ModelConfig,
    data: &GradCheckBatch,
    per_family: usize,
    eps: f64,
    seed: u64,
) -> Result<BTreeMap<String, Vec<GradProbe>>> {
    let (_, grads, _) = loss_and_grads(
        params,
        cfg,
        &data.frames,
        &data.signal,
        &data.masks,
        data.batch,
        RunMode::train_without_dropout(),
    )?;
    let probe = |p: &ModelParams| -> Result<(f64, u64)> {
        let (out, cache, _) = forward(p, cfg, &data.frames, data.batch, RunMode::train_without_dropout())?;
        let (l, _) = loss(&out, &data.signal, &data.masks, cfg)?;
        Ok((l.total, cache.relu_signature()))
    };
    let (_, base_sig) = probe(params)?;

    let mut families: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    for (ti, t) in params.tensors.iter().enumerate().filter(|(_, t)| t.trainable) {
        let pool = families.entry(ModelParams::family(&t.name)).or_default();
        pool.extend((0..t.len()).map(|j| (ti, j)));
    }
    let mut rng = seeded(seed, 0);
    let mut work = params.clone();
    let mut report = BTreeMap::new();
    for (family, mut pool) in families {
        pool.shuffle(&mut rng);
        let mut probes = Vec::new();
        for (ti, j) in pool {
            if probes.len() == per_family {
                break;
            }
            let orig = work.tensors[ti].data[j];
            work.tensors[ti].data[j] = orig + eps;
            let (plus, sig_plus) = probe(&work)?;
            work.tensors[ti].data[j] = orig - eps;
            let (minus, sig_minus) = probe(&work)?;
            work.tensors[ti].data[j] = orig;
            if sig_plus != base_sig || sig_minus != base_sig {
                continue;
            }
            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.data[ti][j];
            probes.push(GradProbe {
                tensor: params.tensors[ti].name.clone(),
                index: j,
                analytic,
                numeric,
                rel_error: relative_error(analytic, numeric),
            });
        }
        report.insert(family, probes);
    }
    Ok(report)
}
