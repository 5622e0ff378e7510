use std::collections::HashMap;

use rand::Rng;

use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::io::{Checkpoint, NamedTensor};
use crate::rng::seeded;

const STREAM_INIT: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    /// Running normalization statistics are stored but not trained.
    pub trainable: bool,
}

impl Tensor {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Every tensor of the model in a fixed order, addressable by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub tensors: Vec<Tensor>,
    index: HashMap<String, usize>,
}

/// Names used by encoder block `i`.
pub(crate) fn enc_names(i: usize) -> [String; 6] {
    [
        format!("enc.{i}.conv.weight"),
        format!("enc.{i}.conv.bias"),
        format!("enc.{i}.bn.gamma"),
        format!("enc.{i}.bn.beta"),
        format!("enc.{i}.bn.running_mean"),
        format!("enc.{i}.bn.running_var"),
    ]
}

enum Init {
    Uniform(f64),
    Const(f64),
}

impl ModelParams {
    pub fn from_tensors(tensors: Vec<Tensor>) -> Self {
        let index = tensors.iter().enumerate().map(|(i, t)| (t.name.clone(), i)).collect();
        Self { tensors, index }
    }

    /// Fresh parameters. Weights and biases are uniform on
    /// `+-1/sqrt(fan_in)`; normalization scales start at 1, shifts at 0;
    /// LSTM forget-gate biases get an extra +1.
    pub fn init(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let mut specs: Vec<(String, Vec<usize>, Init, bool)> = Vec::new();
        let k3 = cfg.kernel.pow(3);
        let c = cfg.channels;
        let nb = cfg.blocks();
        let bn = |specs: &mut Vec<(String, Vec<usize>, Init, bool)>, prefix: &str, ch: usize| {
            specs.push((format!("{prefix}.bn.gamma"), vec![ch], Init::Const(1.0), true));
            specs.push((format!("{prefix}.bn.beta"), vec![ch], Init::Const(0.0), true));
            specs.push((format!("{prefix}.bn.running_mean"), vec![ch], Init::Const(0.0), false));
            specs.push((format!("{prefix}.bn.running_var"), vec![ch], Init::Const(1.0), false));
        };
        for i in 0..nb {
            let cin = if i == 0 { 1 } else { c };
            let b = 1.0 / ((cin * k3) as f64).sqrt();
            let k = cfg.kernel;
            specs.push((format!("enc.{i}.conv.weight"), vec![c, cin, k, k, k], Init::Uniform(b), true));
            specs.push((format!("enc.{i}.conv.bias"), vec![c], Init::Uniform(b), true));
            bn(&mut specs, &format!("enc.{i}"), c);
        }
        let head = |specs: &mut Vec<(String, Vec<usize>, Init, bool)>, prefix: &str, input: usize| {
            let mut widths = vec![input];
            widths.extend(&cfg.head_widths);
            widths.push(1);
            for (j, w) in widths.windows(2).enumerate() {
                let b = 1.0 / (w[0] as f64).sqrt();
                specs.push((format!("{prefix}.{j}.weight"), vec![w[1], w[0]], Init::Uniform(b), true));
                specs.push((format!("{prefix}.{j}.bias"), vec![w[1]], Init::Uniform(b), true));
            }
        };
        let decoder = |specs: &mut Vec<(String, Vec<usize>, Init, bool)>, prefix: &str| {
            for i in (0..nb).rev() {
                let cin = if cfg.skip_connections && i + 1 < nb { 2 * c } else { c };
                let cout = if i == 0 { 1 } else { c };
                let b = 1.0 / ((cout * k3) as f64).sqrt();
                let k = cfg.kernel;
                specs.push((format!("{prefix}.{i}.weight"), vec![cin, cout, k, k, k], Init::Uniform(b), true));
                specs.push((format!("{prefix}.{i}.bias"), vec![cout], Init::Uniform(b), true));
                if i > 0 {
                    bn(specs, &format!("{prefix}.{i}"), c);
                }
            }
        };
        let d = cfg.embedding_width();
        let hdim = cfg.lstm_hidden;
        head(&mut specs, "head_local", d);
        decoder(&mut specs, "dec_local");
        let dirs: &[&str] = if cfg.bidirectional { &["fwd", "bwd"] } else { &["fwd"] };
        for l in 0..cfg.lstm_layers {
            let input = if l == 0 { d } else { cfg.lstm_output_width() };
            let b = 1.0 / (hdim as f64).sqrt();
            for dir in dirs {
                specs.push((format!("lstm.{l}.{dir}.w_ih"), vec![4 * hdim, input], Init::Uniform(b), true));
                specs.push((format!("lstm.{l}.{dir}.w_hh"), vec![4 * hdim, hdim], Init::Uniform(b), true));
                specs.push((format!("lstm.{l}.{dir}.bias"), vec![4 * hdim], Init::Uniform(b), true));
            }
        }
        head(&mut specs, "head_global", cfg.lstm_output_width());
        let b = 1.0 / (cfg.lstm_output_width() as f64).sqrt();
        specs.push(("proj.weight".into(), vec![d, cfg.lstm_output_width()], Init::Uniform(b), true));
        specs.push(("proj.bias".into(), vec![d], Init::Uniform(b), true));
        decoder(&mut specs, "dec_global");

        let mut rng = seeded(cfg.init_seed, STREAM_INIT);
        let tensors = specs
            .into_iter()
            .map(|(name, shape, init, trainable)| {
                let n: usize = shape.iter().product();
                let mut data: Vec<f64> = match init {
                    Init::Uniform(b) => (0..n).map(|_| rng.gen_range(-b..b)).collect(),
                    Init::Const(v) => vec![v; n],
                };
                if name.starts_with("lstm.") && name.ends_with(".bias") {
                    data[hdim..2 * hdim].iter_mut().for_each(|v| *v += 1.0);
                }
                // parameters live on the f32 grid so checkpoints are lossless
                data.iter_mut().for_each(|v| *v = *v as f32 as f64);
                Tensor {
                    name,
                    shape,
                    data,
                    trainable,
                }
            })
            .collect();
        Ok(Self::from_tensors(tensors))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> &Tensor {
        &self.tensors[self.index[name]]
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        let i = self.index[name];
        &mut self.tensors[i]
    }

    pub fn data(&self, name: &str) -> &[f64] {
        &self.get(name).data
    }

    pub fn num_trainable(&self) -> usize {
        self.tensors.iter().filter(|t| t.trainable).map(Tensor::len).sum()
    }

    /// Family of a tensor name: the name without numeric components, e.g.
    /// `enc.2.conv.weight -> enc.conv.weight`.
    pub fn family(name: &str) -> String {
        name.split('.').filter(|s| s.parse::<usize>().is_err()).collect::<Vec<_>>().join(".")
    }

    pub fn to_checkpoint(&self, config_text: &str) -> Checkpoint {
        Checkpoint {
            config: config_text.to_string(),
            tensors: self
                .tensors
                .iter()
                .map(|t| NamedTensor {
                    name: t.name.clone(),
                    dims: t.shape.clone(),
                    data: t.data.iter().map(|&v| v as f32).collect(),
                })
                .collect(),
        }
    }

    /// Loads values into a parameter set built from the same config. Every
    /// tensor must be present with a matching shape.
    pub fn load_checkpoint(&mut self, ckpt: &Checkpoint) -> Result<()> {
        for t in &mut self.tensors {
            let src = ckpt
                .get(&t.name)
                .ok_or_else(|| Error::Format(format!("checkpoint lacks tensor {}", t.name)))?;
            if src.dims != t.shape {
                return Err(Error::Format(format!(
                    "tensor {} has shape {:?} in the checkpoint, model expects {:?}",
                    t.name, src.dims, t.shape
                )));
            }
            t.data = src.data.iter().map(|&v| v as f64).collect();
        }
        Ok(())
    }
}

/// One gradient buffer per parameter tensor, same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub data: Vec<Vec<f64>>,
}

impl Grads {
    pub fn zeros_like(p: &ModelParams) -> Self {
        Self {
            data: p.tensors.iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Grads) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Adds `v` into the gradient of the tensor called `name`.
    pub fn add_named(&mut self, p: &ModelParams, name: &str, v: &[f64]) {
        let i = p.index_of(name).unwrap_or_else(|| panic!("unknown tensor {name}"));
        for (a, b) in self.data[i].iter_mut().zip(v) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().flatten().for_each(|v| *v *= s);
    }
}
