use super::config::{OptimizerConfig, OptimizerKind};
use super::params::{Grads, ModelParams};
use crate::error::{Error, Result};
use crate::io::{Checkpoint, NamedTensor};

const M_PREFIX: &str = "adam.m.";
const V_PREFIX: &str = "adam.v.";

fn round_f32(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = *x as f32 as f64);
}

/// Plain SGD or Adam. Parameters and moment estimates are kept on the f32
/// grid after every step so a saved and reloaded run continues bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    pub config: OptimizerConfig,
    /// Completed update steps.
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(config: &OptimizerConfig, params: &ModelParams) -> Self {
        let zeros = || -> Vec<Vec<f64>> {
            match config.kind {
                OptimizerKind::Sgd => Vec::new(),
                OptimizerKind::Adam => params.tensors.iter().map(|t| vec![0.0; t.len()]).collect(),
            }
        };
        Self {
            config: config.clone(),
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    /// Applies one update to every trainable tensor.
    pub fn update(&mut self, params: &mut ModelParams, grads: &Grads) {
        self.step += 1;
        let lr = self.config.learning_rate;
        for (i, (t, g)) in params.tensors.iter_mut().zip(&grads.data).enumerate() {
            if !t.trainable {
                continue;
            }
            match self.config.kind {
                OptimizerKind::Sgd => {
                    for (p, d) in t.data.iter_mut().zip(g) {
                        *p -= lr * d;
                    }
                }
                OptimizerKind::Adam => {
                    let (b1, b2, eps) = (self.config.beta1, self.config.beta2, self.config.epsilon);
                    let c1 = 1.0 - b1.powf(self.step as f64);
                    let c2 = 1.0 - b2.powf(self.step as f64);
                    let (m, v) = (&mut self.m[i], &mut self.v[i]);
                    for j in 0..g.len() {
                        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
                        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
                        t.data[j] -= lr * (m[j] / c1) / ((v[j] / c2).sqrt() + eps);
                    }
                    round_f32(m);
                    round_f32(v);
                }
            }
            round_f32(&mut t.data);
        }
    }

    /// Moment tensors named `adam.m.<param>` / `adam.v.<param>`.
    pub fn state_tensors(&self, params: &ModelParams) -> Vec<NamedTensor> {
        let mut out = Vec::new();
        for (prefix, store) in [(M_PREFIX, &self.m), (V_PREFIX, &self.v)] {
            for (t, s) in params.tensors.iter().zip(store.iter()) {
                if t.trainable {
                    out.push(NamedTensor {
                        name: format!("{prefix}{}", t.name),
                        dims: t.shape.clone(),
                        data: s.iter().map(|&x| x as f32).collect(),
                    });
                }
            }
        }
        out
    }

    /// Restores moment estimates saved by [`Self::state_tensors`].
    pub fn load_state(&mut self, params: &ModelParams, ckpt: &Checkpoint, step: u64) -> Result<()> {
        self.step = step;
        if self.config.kind == OptimizerKind::Sgd {
            return Ok(());
        }
        for (prefix, store) in [(M_PREFIX, &mut self.m), (V_PREFIX, &mut self.v)] {
            for (t, s) in params.tensors.iter().zip(store.iter_mut()) {
                if !t.trainable {
                    continue;
                }
                let name = format!("{prefix}{}", t.name);
                let src = ckpt
                    .get(&name)
                    .ok_or_else(|| Error::Format(format!("checkpoint lacks optimizer tensor {name}")))?;
                if src.data.len() != s.len() {
                    return Err(Error::Format(format!("optimizer tensor {name} has the wrong size")));
                }
                *s = src.data.iter().map(|&x| x as f64).collect();
            }
        }
        Ok(())
    }
}
