use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::tensor::{axpy, dot, Tensor};
use crate::error::{Error, Result};

/// Fully connected layer, `weights` shaped `[out x in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Tensor,
    pub biases: Tensor,
}

impl Dense {
    pub fn new(weights: Tensor, biases: Tensor) -> Result<Self> {
        let [out, _] = weights.shape() else {
            return Err(Error::shape("rank-2 weights", format!("{:?}", weights.shape())));
        };
        if biases.shape() != [*out] {
            return Err(Error::shape(format!("biases [{out}]"), format!("{:?}", biases.shape())));
        }
        Ok(Dense { weights, biases })
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Dense {
            weights: Tensor::zeros(vec![output, input]),
            biases: Tensor::zeros(vec![output]),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn out_dim(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn zeros_like(&self) -> Dense {
        Dense::zeros(self.in_dim(), self.out_dim())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub hidden: Vec<usize>,
    /// Dropout applied to the last hidden layer in training mode.
    pub dropout: f32,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden: vec![256, 128],
            dropout: 0.2,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::Config("network.hidden sizes must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "network.dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// Activations saved by a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// Input of every layer, `[batch x in_dim]` row-major.
    inputs: Vec<Vec<f32>>,
    /// Inverted-dropout scale factors on the last hidden layer.
    mask: Option<Vec<f32>>,
}

impl ForwardCache {
    pub fn layer_input(&self, layer: usize) -> &[f32] {
        &self.inputs[layer]
    }

    pub fn dropout_mask(&self) -> Option<&[f32]> {
        self.mask.as_deref()
    }
}

/// Rectifier MLP mapping an observation to one Q-value per action.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Dense>,
    dropout_rate: f32,
}

impl QNetwork {
    /// Random network with weights and biases uniform in `±1/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(input: usize, cfg: &NetworkConfig, output: usize, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        if input == 0 || output == 0 {
            return Err(Error::Config("network input and output must be >= 1".into()));
        }
        let dims: Vec<usize> = std::iter::once(input)
            .chain(cfg.hidden.iter().copied())
            .chain(std::iter::once(output))
            .collect();
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f32).sqrt();
                let mut layer = Dense::zeros(fan_in, fan_out);
                for v in layer.weights.data_mut().iter_mut().chain(layer.biases.data_mut()) {
                    *v = rng.random_range(-bound..bound);
                }
                layer
            })
            .collect();
        Ok(QNetwork {
            layers,
            dropout_rate: cfg.dropout,
        })
    }

    pub fn from_layers(layers: Vec<Dense>, dropout_rate: f32) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(
                    format!("layer input {}", pair[0].out_dim()),
                    format!("layer input {}", pair[1].in_dim()),
                ));
            }
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidArgument(format!("dropout {dropout_rate} outside [0, 1)")));
        }
        Ok(QNetwork { layers, dropout_rate })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn dropout_rate(&self) -> f32 {
        self.dropout_rate
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn expect_dims(&self, input: usize, output: usize) -> Result<()> {
        if self.input_dim() != input || self.output_dim() != output {
            return Err(Error::shape(
                format!("{input} -> {output} network"),
                format!("{} -> {} network", self.input_dim(), self.output_dim()),
            ));
        }
        Ok(())
    }

    /// Forward pass over a `[batch x input]` tensor. Dropout is active only
    /// when an rng is supplied.
    pub fn forward(&self, input: &Tensor, dropout: Option<&mut dyn RngCore>) -> Result<Tensor> {
        self.forward_cached(input, dropout).map(|(out, _)| out)
    }

    pub fn forward_cached(
        &self,
        input: &Tensor,
        mut dropout: Option<&mut dyn RngCore>,
    ) -> Result<(Tensor, ForwardCache)> {
        let [batch, width] = input.shape() else {
            return Err(Error::shape("rank-2 input", format!("{:?}", input.shape())));
        };
        let (batch, width) = (*batch, *width);
        if width != self.input_dim() {
            return Err(Error::shape(
                format!("input width {}", self.input_dim()),
                format!("input width {width}"),
            ));
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut mask = None;
        let mut x = input.data().to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let (nin, nout) = (layer.in_dim(), layer.out_dim());
            let w = layer.weights.data();
            let b = layer.biases.data();
            let mut y = vec![0f32; batch * nout];
            for (xr, yr) in x.chunks_exact(nin).zip(y.chunks_exact_mut(nout)) {
                for (o, yo) in yr.iter_mut().enumerate() {
                    *yo = b[o] + dot(&w[o * nin..(o + 1) * nin], xr);
                }
            }
            if li < last {
                for v in &mut y {
                    *v = v.max(0.0);
                }
                if li + 1 == last && self.dropout_rate > 0.0 {
                    if let Some(rng) = dropout.as_deref_mut() {
                        let keep_scale = 1.0 / (1.0 - self.dropout_rate);
                        let m: Vec<f32> = (0..y.len())
                            .map(|_| {
                                if rng.random::<f32>() < self.dropout_rate {
                                    0.0
                                } else {
                                    keep_scale
                                }
                            })
                            .collect();
                        for (v, s) in y.iter_mut().zip(&m) {
                            *v *= s;
                        }
                        mask = Some(m);
                    }
                }
            }
            inputs.push(std::mem::replace(&mut x, y));
        }
        let out = Tensor::new(vec![batch, self.output_dim()], x)?;
        Ok((out, ForwardCache { batch, inputs, mask }))
    }

    /// Evaluation-mode Q-values for a single feature vector.
    pub fn q_values(&self, features: &[f32]) -> Result<Vec<f32>> {
        let input = Tensor::new(vec![1, features.len()], features.to_vec())?;
        Ok(self.forward(&input, None)?.into_data())
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy_action(&self, features: &[f32]) -> Result<usize> {
        Ok(argmax(&self.q_values(features)?))
    }

    /// Backpropagates `grad_out` (`[batch x output]`) through a cached pass.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f32]) -> Vec<Dense> {
        let batch = cache.batch;
        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        let mut g = grad_out.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let (nin, nout) = (layer.in_dim(), layer.out_dim());
            let x = &cache.inputs[li];
            let w = layer.weights.data();
            let grad = &mut grads[li];
            {
                let gw = grad.weights.data_mut();
                for (gr, xr) in g.chunks_exact(nout).zip(x.chunks_exact(nin)) {
                    for (o, &go) in gr.iter().enumerate() {
                        if go != 0.0 {
                            axpy(go, xr, &mut gw[o * nin..(o + 1) * nin]);
                        }
                    }
                }
            }
            {
                let gb = grad.biases.data_mut();
                for gr in g.chunks_exact(nout) {
                    for (bo, go) in gb.iter_mut().zip(gr) {
                        *bo += go;
                    }
                }
            }
            if li == 0 {
                break;
            }
            let mut gx = vec![0f32; batch * nin];
            for (gr, gxr) in g.chunks_exact(nout).zip(gx.chunks_exact_mut(nin)) {
                for (o, &go) in gr.iter().enumerate() {
                    if go != 0.0 {
                        axpy(go, &w[o * nin..(o + 1) * nin], gxr);
                    }
                }
            }
            // through (dropout ∘ relu) of the previous layer
            let scale = (li == self.layers.len() - 1).then_some(cache.mask.as_deref()).flatten();
            for (i, v) in gx.iter_mut().enumerate() {
                if x[i] > 0.0 {
                    if let Some(m) = scale {
                        *v *= m[i];
                    }
                } else {
                    *v = 0.0;
                }
            }
            g = gx;
        }
        grads
    }
}

pub(crate) fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Mean squared error between `Q(s_i, a_i)` and `targets[i]`, with gradients
/// that touch only the chosen action outputs.
pub fn mse_loss_and_grad(
    net: &QNetwork,
    inputs: &Tensor,
    actions: &[usize],
    targets: &[f32],
    dropout: Option<&mut dyn RngCore>,
) -> Result<(f32, Vec<Dense>)> {
    let batch = inputs.rows();
    if batch == 0 || actions.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if actions.len() != batch || targets.len() != batch {
        return Err(Error::shape(
            format!("{batch} actions and targets"),
            format!("{} actions, {} targets", actions.len(), targets.len()),
        ));
    }
    let n_out = net.output_dim();
    if let Some(bad) = actions.iter().find(|a| **a >= n_out) {
        return Err(Error::InvalidArgument(format!("action {bad} out of range 0..{n_out}")));
    }
    let (q, cache) = net.forward_cached(inputs, dropout)?;
    let mut grad_out = vec![0f32; batch * n_out];
    let mut loss = 0f64;
    let scale = 2.0 / batch as f32;
    for (i, (&a, &y)) in actions.iter().zip(targets).enumerate() {
        let diff = q.data()[i * n_out + a] - y;
        loss += f64::from(diff) * f64::from(diff);
        grad_out[i * n_out + a] = scale * diff;
    }
    let grads = net.backward(&cache, &grad_out);
    Ok(((loss / batch as f64) as f32, grads))
}

/// Exact deep copy used as the frozen target network.
pub fn sync_target(source: &QNetwork) -> QNetwork {
    source.clone()
}
