//! Parametric scorers `g: R^d -> R` with exact backpropagation, plus SGD
//! and Adam optimizers.
//!
//! Parameters live in one flat `f64` vector. Layout for the MLP: per layer,
//! all weights in row-major `[out][in]` order, then the biases. The linear
//! scorer is `w . x + b` with layout `[w_0 .. w_{d-1}, b]`.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Architecture {
    Linear,
    /// Hidden widths of a ReLU MLP with a single linear output unit.
    Mlp(Vec<usize>),
}

impl Architecture {
    /// Layer sizes from input to output, e.g. `[d, w1, w2, 1]`.
    fn layer_sizes(&self, d_in: usize) -> Vec<usize> {
        match self {
            Architecture::Linear => vec![d_in, 1],
            Architecture::Mlp(widths) => {
                let mut sizes = Vec::with_capacity(widths.len() + 2);
                sizes.push(d_in);
                sizes.extend_from_slice(widths);
                sizes.push(1);
                sizes
            }
        }
    }

    pub fn param_count(&self, d_in: usize) -> usize {
        let sizes = self.layer_sizes(d_in);
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// A decision function with a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Scorer {
    arch: Architecture,
    d_in: usize,
    params: Vec<f64>,
}

impl Scorer {
    /// Build a scorer with seeded initialization: zeros for the linear
    /// scorer, uniform `+-sqrt(6 / (fan_in + fan_out))` weights with zero
    /// biases for each MLP layer.
    pub fn new(arch: Architecture, d_in: usize, seed: u64) -> Result<Self> {
        if d_in == 0 {
            return Err(Error::invalid("input dimension must be positive"));
        }
        if let Architecture::Mlp(widths) = &arch {
            if widths.contains(&0) {
                return Err(Error::invalid("hidden widths must be positive"));
            }
        }
        let mut params = vec![0.0; arch.param_count(d_in)];
        if let Architecture::Mlp(_) = arch {
            let mut rng = rng_from_seed(seed);
            let sizes = arch.layer_sizes(d_in);
            let mut offset = 0;
            for w in sizes.windows(2) {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                for p in params[offset..offset + fan_in * fan_out].iter_mut() {
                    *p = rng.random_range(-bound..bound);
                }
                offset += fan_in * fan_out + fan_out; // biases stay zero
            }
        }
        Ok(Scorer { arch, d_in, params })
    }

    pub fn from_params(arch: Architecture, d_in: usize, params: Vec<f64>) -> Result<Self> {
        let expected = arch.param_count(d_in);
        if params.len() != expected {
            return Err(Error::LengthMismatch {
                left: expected,
                right: params.len(),
            });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFiniteFeature { index: i });
        }
        Ok(Scorer { arch, d_in, params })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: x.len(),
            });
        }
        match &self.arch {
            Architecture::Linear => {
                let (w, b) = self.params.split_at(self.d_in);
                Ok(w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b[0])
            }
            Architecture::Mlp(_) => Ok(self.forward_cached(x).1),
        }
    }

    /// Forward pass keeping every layer's post-activation values, which the
    /// backward pass consumes. The input counts as layer 0.
    fn forward_cached(&self, x: &[f64]) -> (Vec<Vec<f64>>, f64) {
        let sizes = self.arch.layer_sizes(self.d_in);
        let n_layers = sizes.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(sizes.len());
        acts.push(x.to_vec());
        let mut offset = 0;
        for (layer, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + fan_in * fan_out];
            let biases = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let input = &acts[layer];
            let mut out = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let mut z = biases[o];
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                for (wi, xi) in row.iter().zip(input) {
                    z += wi * xi;
                }
                // hidden layers are ReLU, the output stays linear
                if layer + 1 < n_layers {
                    z = z.max(0.0);
                }
                out.push(z);
            }
            acts.push(out);
            offset += fan_in * fan_out + fan_out;
        }
        let y = acts.last().unwrap()[0];
        (acts, y)
    }

    /// Gradient of `upstream * g(x)` with respect to the parameters.
    pub fn backward(&self, x: &[f64], upstream: f64) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.params.len()];
        self.accumulate_gradient(x, upstream, &mut grad)?;
        Ok(grad)
    }

    /// Add the gradient of `upstream * g(x)` into `into`, avoiding a fresh
    /// allocation per call. ReLU uses derivative 0 at exactly 0.
    pub fn accumulate_gradient(&self, x: &[f64], upstream: f64, into: &mut [f64]) -> Result<()> {
        if x.len() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: x.len(),
            });
        }
        if into.len() != self.params.len() {
            return Err(Error::LengthMismatch {
                left: self.params.len(),
                right: into.len(),
            });
        }
        if upstream == 0.0 {
            return Ok(());
        }
        match &self.arch {
            Architecture::Linear => {
                for (g, xi) in into.iter_mut().zip(x) {
                    *g += upstream * xi;
                }
                into[self.d_in] += upstream;
                Ok(())
            }
            Architecture::Mlp(_) => {
                let sizes = self.arch.layer_sizes(self.d_in);
                let n_layers = sizes.len() - 1;
                let (acts, _) = self.forward_cached(x);

                // offsets of each layer's parameter block
                let mut offsets = Vec::with_capacity(n_layers);
                let mut off = 0;
                for w in sizes.windows(2) {
                    offsets.push(off);
                    off += w[0] * w[1] + w[1];
                }

                let mut delta = vec![upstream]; // d(out)/d(z_L)
                for layer in (0..n_layers).rev() {
                    let (fan_in, fan_out) = (sizes[layer], sizes[layer + 1]);
                    let offset = offsets[layer];
                    let input = &acts[layer];
                    let weights = &self.params[offset..offset + fan_in * fan_out];

                    for o in 0..fan_out {
                        let d = delta[o];
                        if d != 0.0 {
                            let row = &mut into[offset + o * fan_in..offset + (o + 1) * fan_in];
                            for (g, xi) in row.iter_mut().zip(input) {
                                *g += d * xi;
                            }
                            into[offset + fan_in * fan_out + o] += d;
                        }
                    }

                    if layer > 0 {
                        let mut prev = vec![0.0; fan_in];
                        for o in 0..fan_out {
                            let d = delta[o];
                            if d != 0.0 {
                                let row = &weights[o * fan_in..(o + 1) * fan_in];
                                for (p, wi) in prev.iter_mut().zip(row) {
                                    *p += d * wi;
                                }
                            }
                        }
                        // acts[layer] holds post-ReLU values; the gate is open
                        // only where the activation is strictly positive
                        for (p, a) in prev.iter_mut().zip(input) {
                            if *a <= 0.0 {
                                *p = 0.0;
                            }
                        }
                        delta = prev;
                    }
                }
                Ok(())
            }
        }
    }

    /// Text form: a one-line architecture descriptor (`linear d` or
    /// `mlp d w1 w2 ...`) followed by one parameter value per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.arch {
            Architecture::Linear => out.push_str(&format!("linear {}\n", self.d_in)),
            Architecture::Mlp(widths) => {
                out.push_str(&format!("mlp {}", self.d_in));
                for w in widths {
                    out.push_str(&format!(" {w}"));
                }
                out.push('\n');
            }
        }
        for p in &self.params {
            out.push_str(&format!("{p}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::invalid("empty model text"))?;
        let mut fields = header.split_whitespace();
        let kind = fields.next().ok_or(Error::invalid("missing model kind"))?;
        let d_in: usize = fields
            .next()
            .ok_or(Error::invalid("missing input dimension"))?
            .parse()
            .map_err(|_| Error::invalid("bad input dimension"))?;
        let arch = match kind {
            "linear" => {
                if fields.next().is_some() {
                    return Err(Error::invalid("unexpected fields after `linear d`"));
                }
                Architecture::Linear
            }
            "mlp" => {
                let widths: std::result::Result<Vec<usize>, _> =
                    fields.map(|f| f.parse::<usize>()).collect();
                Architecture::Mlp(widths.map_err(|_| Error::invalid("bad hidden width"))?)
            }
            other => return Err(Error::invalid(format!("unknown model kind `{other}`"))),
        };
        let params: std::result::Result<Vec<f64>, _> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<f64>())
            .collect();
        let params = params.map_err(|_| Error::invalid("bad parameter value"))?;
        Scorer::from_params(arch, d_in, params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub const ADAM_DEFAULT: OptimizerKind = OptimizerKind::Adam {
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };
}

/// Optimizer state over one flat parameter vector.
///
/// SGD: `theta <- theta - lr * (g + wd * theta)`.
/// Adam: decoupled weight decay (`theta <- theta - lr * wd * theta`) applied
/// before the bias-corrected moment update.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    weight_decay: f64,
    step_count: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, weight_decay: f64, n_params: usize) -> Self {
        let buf = match kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam { .. } => n_params,
        };
        Optimizer {
            kind,
            learning_rate,
            weight_decay,
            step_count: 0,
            m: vec![0.0; buf],
            v: vec![0.0; buf],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::LengthMismatch {
                left: params.len(),
                right: grads.len(),
            });
        }
        self.step_count += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= lr * (g + self.weight_decay * *p);
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                if self.m.len() != params.len() {
                    return Err(Error::LengthMismatch {
                        left: self.m.len(),
                        right: params.len(),
                    });
                }
                let t = self.step_count as i32;
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                for i in 0..params.len() {
                    params[i] -= lr * self.weight_decay * params[i];
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * grads[i];
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * grads[i] * grads[i];
                    let m_hat = self.m[i] / bc1;
                    let v_hat = self.v[i] / bc2;
                    params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}
