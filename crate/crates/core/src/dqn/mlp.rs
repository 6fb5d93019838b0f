use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hidden widths of the Q-network.
pub const HIDDEN_LAYERS: [usize; 3] = [128, 64, 32];

/// Activation applied after every hidden layer; the output layer is linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    /// Only useful for tests that need a linear network.
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// A fully connected layer. `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }

    #[inline]
    pub fn weight_mut(&mut self, out: usize, inp: usize) -> &mut f64 {
        &mut self.weights[out * self.inputs + inp]
    }

    fn affine(&self, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi)),
        );
    }
}

/// Parameters of a multilayer perceptron with scalar output.
///
/// Gradients share this type: a gradient is a parameter-shaped set of partial
/// derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Dense>,
    pub hidden_activation: Activation,
}

pub type Gradient = MlpParams;

/// Layer widths of the Q-network for a chain of `m` domains:
/// `2(m-1) -> 128 -> 64 -> 32 -> 1`.
pub fn q_network_dims(m: usize) -> Vec<usize> {
    let mut dims = vec![2 * (m - 1)];
    dims.extend(HIDDEN_LAYERS);
    dims.push(1);
    dims
}

impl MlpParams {
    /// All-zero parameters with the given layer widths (input first).
    pub fn zeros(dims: &[usize], hidden_activation: Activation) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) || dims[dims.len() - 1] != 1 {
            return Err(Error::InvalidArgument(format!("bad layer widths {dims:?}")));
        }
        Ok(MlpParams {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            hidden_activation,
        })
    }

    /// Uniform initialization in `+-sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(dims, Activation::Relu)?;
        for layer in &mut p.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.gen_range(-limit..limit);
            }
        }
        Ok(p)
    }

    /// Same shape, all zeros.
    pub fn zeros_like(&self) -> Self {
        MlpParams {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.inputs, l.outputs))
                .collect(),
            hidden_activation: self.hidden_activation,
        }
    }

    /// Layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs];
        d.extend(self.layers.iter().map(|l| l.outputs));
        d
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    /// Every parameter, layer by layer, weights before biases.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    /// `self += scale * other`; shapes must match.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += scale * b;
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::ShapeMismatch {
                expected: self.input_len(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Network output for input `x`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        let mut z = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&a, &mut z);
            if i < last {
                a.clear();
                a.extend(z.iter().map(|&v| self.hidden_activation.apply(v)));
            }
        }
        Ok(z[0])
    }

    /// Gradient of `upstream * forward(x)` with respect to every parameter.
    pub fn backward(&self, x: &[f64], upstream: f64) -> Result<Gradient> {
        let mut grad = self.zeros_like();
        self.accumulate_gradient(x, upstream, &mut grad)?;
        Ok(grad)
    }

    /// Adds `upstream * d forward(x) / d params` into `grad`, returning
    /// `forward(x)`.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        upstream: f64,
        grad: &mut Gradient,
    ) -> Result<f64> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        // activations[i] is the input of layer i; pre[i] its pre-activation
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        activations.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(&activations[i], &mut z);
            if i < last {
                activations.push(z.iter().map(|&v| self.hidden_activation.apply(v)).collect());
            }
            pre.push(z);
        }
        let output = pre[last][0];

        let mut delta = vec![upstream];
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let g = &mut grad.layers[i];
            let input = &activations[i];
            for (o, &d) in delta.iter().enumerate() {
                g.biases[o] += d;
                if d != 0.0 {
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, &a) in row.iter_mut().zip(input) {
                        *gw += d * a;
                    }
                }
            }
            if i == 0 {
                break;
            }
            let mut next = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (n, &w) in next.iter_mut().zip(row) {
                        *n += d * w;
                    }
                }
            }
            for (n, &z) in next.iter_mut().zip(&pre[i - 1]) {
                *n *= self.hidden_activation.derivative(z);
            }
            delta = next;
        }
        Ok(output)
    }
}
