//! Dense networks, batched forward passes and reverse-mode gradients.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-layer nonlinearity. Sine layers compute `sin(omega0 * (Wx + b))`
/// using the owning network's `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Sine,
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Sine => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
            Activation::Identity => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Activation::Sine,
            1 => Activation::Relu,
            2 => Activation::Tanh,
            3 => Activation::Identity,
            _ => return None,
        })
    }
}

/// One affine layer plus its activation. Weights are `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// Fully connected network. Immutable during inference, so shared
/// read-only use across worker threads is safe.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
    pub omega0: f64,
}

/// Intermediates of one batched forward pass, kept for [`DenseNet::backward`].
pub struct ForwardCache {
    /// Input to each layer, batch-major `(batch, dim)`.
    layer_inputs: Vec<Array2<f64>>,
    /// Scaled pre-activations (after the omega0 factor for sine layers).
    preacts: Vec<Array2<f64>>,
    /// Network output `(batch, out)`.
    pub output: Array2<f64>,
}

/// Parameter-shaped gradient (or accumulator) storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl DenseNet {
    /// Validates adjacent layer dimensions and the sine frequency scale.
    pub fn new(layers: Vec<Layer>, omega0: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::invalid(format!(
                    "layer {i} output dim {} does not feed layer {} input dim {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        let has_sine = layers.iter().any(|l| l.activation == Activation::Sine);
        if has_sine && !(omega0 > 0.0) {
            return Err(Error::invalid(format!(
                "sine networks need omega0 > 0, got {omega0}"
            )));
        }
        for layer in &layers {
            if layer.bias.len() != layer.out_dim() {
                return Err(Error::ShapeMismatch {
                    context: "layer bias",
                    expected: layer.out_dim(),
                    got: layer.bias.len(),
                });
            }
        }
        Ok(DenseNet { layers, omega0 })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Total number of scalar parameters.
    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "network input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let batch = ArrayView2::from_shape((1, x.len()), x).expect("contiguous input");
        let out = self.forward_batch(batch);
        Ok(out.row(0).to_vec())
    }

    /// Batched forward pass, `x` is `(batch, in_dim)`.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward_batch_cached(x).output
    }

    /// Batched forward pass that keeps the intermediates needed for the
    /// backward pass.
    pub fn forward_batch_cached(&self, x: ArrayView2<f64>) -> ForwardCache {
        assert_eq!(
            x.ncols(),
            self.input_dim(),
            "input dim mismatch in forward_batch"
        );
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_owned();
        for layer in &self.layers {
            layer_inputs.push(cur.clone());
            let mut z = cur.dot(&layer.weights.t());
            z += &layer.bias;
            if layer.activation == Activation::Sine {
                z *= self.omega0;
            }
            let out = match layer.activation {
                Activation::Sine => z.mapv(f64::sin),
                Activation::Relu => z.mapv(|v| v.max(0.0)),
                Activation::Tanh => z.mapv(f64::tanh),
                Activation::Identity => z.clone(),
            };
            preacts.push(z);
            cur = out;
        }
        ForwardCache {
            layer_inputs,
            preacts,
            output: cur,
        }
    }

    /// Reverse-mode gradients of `sum_batch upstream . output` with
    /// respect to every parameter and to the input batch.
    ///
    /// `upstream` is `(batch, out_dim)`. Gradients are summed over the
    /// batch; divide by the batch size for means.
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>) -> (Gradients, Array2<f64>) {
        assert_eq!(upstream.ncols(), self.output_dim());
        assert_eq!(upstream.nrows(), cache.output.nrows());
        let mut grads = Gradients::zeros_like(self);
        let mut delta = upstream.to_owned();
        for (m, layer) in self.layers.iter().enumerate().rev() {
            let z = &cache.preacts[m];
            // d activation / d scaled-pre-activation, then the omega0
            // chain factor for sine layers.
            match layer.activation {
                Activation::Sine => {
                    delta = &delta * &z.mapv(f64::cos) * self.omega0;
                }
                Activation::Relu => {
                    delta = &delta * &z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                }
                Activation::Tanh => {
                    delta = &delta * &z.mapv(|v| 1.0 - v.tanh() * v.tanh());
                }
                Activation::Identity => {}
            }
            grads.weights[m] = delta.t().dot(&cache.layer_inputs[m]);
            grads.biases[m] = delta.sum_axis(Axis(0));
            delta = delta.dot(&layer.weights);
        }
        (grads, delta)
    }
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            weights: net
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            biases: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.bias.raw_dim()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for w in &mut self.weights {
            *w *= c;
        }
        for b in &mut self.biases {
            *b *= c;
        }
    }

    /// Euclidean norm over every parameter entry.
    pub fn global_norm(&self) -> f64 {
        let mut sq = 0.0;
        for w in &self.weights {
            sq += w.iter().map(|v| v * v).sum::<f64>();
        }
        for b in &self.biases {
            sq += b.iter().map(|v| v * v).sum::<f64>();
        }
        sq.sqrt()
    }

    /// Rescales in place so the global norm is at most `max_norm`.
    pub fn clip_global_norm(&mut self, max_norm: f64) {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
    }
}
