//! Feed-forward barrier network: logistic hidden layers, softmax output,
//! trained by mini-batch SGD on the squared error between the softmax output
//! and the multi-hot barrier vector.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey_data::{DemographicProfile, FeatureSchema};

pub const MLP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub hidden_layers: usize,
    pub hidden_width: usize,
}

impl Default for Architecture {
    /// Three hidden layers of ten logistic units.
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            hidden_width: 10,
        }
    }
}

impl Architecture {
    /// Single hidden layer of ten units.
    pub fn single_hidden() -> Self {
        Self {
            hidden_layers: 1,
            hidden_width: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.1,
            batch_size: 32,
            seed: 0,
            init_scale: 0.5,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate >= 0.0 && self.init_scale >= 0.0) {
            return Err(Error::Config(
                "learning_rate and init_scale must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Dense layer; `weights` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            out.push(row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.biases[o]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Layer widths from input to output, e.g. `[22, 10, 10, 10, 18]`.
    pub layout: Vec<usize>,
    pub layers: Vec<Layer>,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

pub fn init_mlp(
    input_dim: usize,
    outputs: usize,
    arch: Architecture,
    init_scale: f64,
    seed: u64,
) -> Result<MlpModel> {
    if input_dim == 0 || outputs == 0 || arch.hidden_width == 0 {
        return Err(Error::Config("network dimensions must be positive".into()));
    }
    let mut layout = vec![input_dim];
    layout.extend(std::iter::repeat_n(arch.hidden_width, arch.hidden_layers));
    layout.push(outputs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if init_scale > 0.0 {
                    rng.random_range(-init_scale..init_scale)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let layers = layout
        .windows(2)
        .map(|w| Layer {
            inputs: w[0],
            outputs: w[1],
            weights: draw(w[0] * w[1]),
            biases: draw(w[1]),
        })
        .collect();
    Ok(MlpModel { layout, layers })
}

/// Per-layer activations of one forward pass; the last entry is the softmax output.
struct Trace {
    activations: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layout[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layout.last().expect("layout has input and output")
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Dimension {
                expected: self.parameter_count(),
                found: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(activations.last().expect("non-empty"), &mut z);
            if li == last {
                softmax_in_place(&mut z);
            } else {
                z.iter_mut().for_each(|v| *v = logistic(*v));
            }
            activations.push(z);
        }
        Trace { activations }
    }

    /// Softmax probabilities over the output units.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).activations.pop().expect("output layer"))
    }

    /// Mean over examples of `Σₖ (pₖ − tₖ)²`.
    pub fn loss(&self, xs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
        check_batch(self, xs, targets)?;
        let mut total = 0.0;
        for (x, t) in xs.iter().zip(targets) {
            let p = self.forward(x)?;
            total += p.iter().zip(t).map(|(p, t)| (p - t).powi(2)).sum::<f64>();
        }
        Ok(total / xs.len() as f64)
    }

    /// Loss and its gradient, flattened in [`parameters`](Self::parameters) order.
    pub fn loss_and_gradient(
        &self,
        xs: &[Vec<f64>],
        targets: &[Vec<f64>],
    ) -> Result<(f64, Vec<f64>)> {
        check_batch(self, xs, targets)?;
        let scale = 1.0 / xs.len() as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
            .collect();
        let mut loss = 0.0;
        for (x, t) in xs.iter().zip(targets) {
            let tr = self.trace(x);
            let p = tr.activations.last().expect("output");
            loss += p.iter().zip(t).map(|(p, t)| (p - t).powi(2)).sum::<f64>();

            // d loss / d p, then through the softmax Jacobian.
            let g: Vec<f64> = p
                .iter()
                .zip(t)
                .map(|(p, t)| 2.0 * (p - t) * scale)
                .collect();
            let gp: f64 = g.iter().zip(p).map(|(g, p)| g * p).sum();
            let mut delta: Vec<f64> = p.iter().zip(&g).map(|(p, g)| p * (g - gp)).collect();

            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let input = &tr.activations[li];
                let (gw, gb) = &mut grads[li];
                for o in 0..layer.outputs {
                    gb[o] += delta[o];
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (w, &a) in row.iter_mut().zip(input) {
                        *w += delta[o] * a;
                    }
                }
                if li > 0 {
                    let mut back = vec![0.0; layer.inputs];
                    for o in 0..layer.outputs {
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (b, w) in back.iter_mut().zip(row) {
                            *b += w * delta[o];
                        }
                    }
                    // logistic'(z) = a(1 − a)
                    for (b, a) in back.iter_mut().zip(input) {
                        *b *= a * (1.0 - a);
                    }
                    delta = back;
                }
            }
        }
        let flat = grads
            .into_iter()
            .flat_map(|(w, b)| w.into_iter().chain(b))
            .collect();
        Ok((loss * scale, flat))
    }
}

fn check_batch(model: &MlpModel, xs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Empty("MLP batch"));
    }
    if xs.len() != targets.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            found: targets.len(),
        });
    }
    for (x, t) in xs.iter().zip(targets) {
        model.check_input(x)?;
        if t.len() != model.output_dim() {
            return Err(Error::Dimension {
                expected: model.output_dim(),
                found: t.len(),
            });
        }
    }
    Ok(())
}

/// Mini-batch SGD with seeded shuffling. The history holds the full-data
/// loss after each epoch.
pub fn train_mlp(
    model: &MlpModel,
    xs: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    config.validate()?;
    check_batch(model, xs, targets)?;
    if targets.iter().flatten().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Config("targets must be multi-hot".into()));
    }
    let mut model = model.clone();
    let mut params = model.parameters();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let bx: Vec<Vec<f64>> = batch.iter().map(|&i| xs[i].clone()).collect();
            let bt: Vec<Vec<f64>> = batch.iter().map(|&i| targets[i].clone()).collect();
            let (_, grad) = model.loss_and_gradient(&bx, &bt)?;
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= config.learning_rate * g;
            }
            model.set_parameters(&params)?;
        }
        history.push(model.loss(xs, targets)?);
    }
    Ok((model, history))
}

/// A trained network together with the barrier codes of its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRanker {
    pub format_version: u32,
    pub schema_hash: String,
    pub barriers: Vec<String>,
    pub network: MlpModel,
}

impl MlpRanker {
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, schema: &FeatureSchema) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let r: MlpRanker = serde_json::from_slice(&bytes)?;
        if r.schema_hash != schema.hash() {
            return Err(Error::SchemaMismatch {
                expected: r.schema_hash,
                found: schema.hash(),
            });
        }
        Ok(r)
    }
}

/// All barriers for `profile`, most probable first, catalog order on ties.
pub fn mlp_rank(
    ranker: &MlpRanker,
    schema: &FeatureSchema,
    profile: &DemographicProfile,
) -> Result<Vec<(String, f64)>> {
    let x = schema.encode(profile)?;
    let p = ranker.network.forward(&x)?;
    Ok(crate::svm::ranked(&ranker.barriers, &p))
}
