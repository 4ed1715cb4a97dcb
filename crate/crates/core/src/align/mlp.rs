//! Plain multilayer perceptron with hand-written reverse mode.
//!
//! Hidden layers are affine → ReLU → inverted dropout; the last layer is
//! affine only. Generic over the float type so the same code can be checked
//! against finite differences in `f64` and trained in `f32`.

use std::fmt::Debug;

use num_traits::Float;
use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{invalid, Error, Result};

/// The generator used for initialisation, shuffling and dropout.
pub type Rng = rand_chacha::ChaCha8Rng;

pub trait Real: Float + Debug + Default + Send + Sync + 'static {}
impl<T: Float + Debug + Default + Send + Sync + 'static> Real for T {}

pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from(x).expect("representable")
}

pub enum Mode<'a> {
    Eval,
    Train(&'a mut Rng),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim × in_dim`.
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![T::zero(); in_dim * out_dim],
            bias: vec![T::zero(); out_dim],
        }
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        self.weight
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
    dropout: f64,
}

/// Everything `backward` needs from one forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache<T> {
    /// Input to each layer.
    inputs: Vec<Vec<T>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Vec<T>>,
    /// Dropout scale per hidden unit (0 or 1/(1-p)); empty in eval mode.
    masks: Vec<Vec<T>>,
}

impl<T: Real> Mlp<T> {
    pub fn from_layers(layers: Vec<Dense<T>>, dropout: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(invalid("dropout rate must lie in [0, 1)"));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::DimMismatch {
                    what: "layer chain",
                    expected: pair[0].out_dim,
                    found: pair[1].in_dim,
                });
            }
        }
        for l in &layers {
            if l.weight.len() != l.in_dim * l.out_dim || l.bias.len() != l.out_dim || l.in_dim == 0 || l.out_dim == 0 {
                return Err(invalid("layer parameter shapes disagree with its dims"));
            }
        }
        Ok(Self { layers, dropout })
    }

    /// Uniform `±1/sqrt(fan_in)` initialisation for weights and biases.
    pub fn init(dims: &[usize], dropout: f64, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(invalid("need input and output dims"));
        }
        let mut rng = Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|d| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
                let mut sample = || cast::<T>(rng.random_range(-bound..bound));
                Dense {
                    in_dim: fan_in,
                    out_dim: fan_out,
                    weight: (0..fan_in * fan_out).map(|_| sample()).collect(),
                    bias: (0..fan_out).map(|_| sample()).collect(),
                }
            })
            .collect();
        Self::from_layers(layers, dropout)
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// `[input, hidden..., output]`
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn zero_grads(&self) -> Vec<Dense<T>> {
        self.layers.iter().map(|l| Dense::zeros(l.in_dim, l.out_dim)).collect()
    }

    pub fn forward(&self, x: &[T], mode: Mode<'_>) -> Result<(Vec<T>, MlpCache<T>)> {
        if x.len() != self.input_dim() {
            return Err(Error::DimMismatch {
                what: "network input",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut rng = match mode {
            Mode::Train(rng) if self.dropout > 0.0 => Some(rng),
            _ => None,
        };
        let keep_scale = cast::<T>(1.0 / (1.0 - self.dropout));
        let last = self.layers.len() - 1;
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(last),
            masks: Vec::new(),
        };
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&a);
            cache.inputs.push(a);
            if i == last {
                return Ok((z, cache));
            }
            let mut h: Vec<T> = z.iter().map(|&v| v.max(T::zero())).collect();
            if let Some(rng) = rng.as_deref_mut() {
                let mask: Vec<T> = (0..h.len())
                    .map(|_| {
                        if rng.random::<f64>() < self.dropout {
                            T::zero()
                        } else {
                            keep_scale
                        }
                    })
                    .collect();
                for (v, m) in h.iter_mut().zip(&mask) {
                    *v = *v * *m;
                }
                cache.masks.push(mask);
            }
            cache.pre.push(z);
            a = h;
        }
        unreachable!("loop returns at the last layer")
    }

    /// Accumulates parameter gradients for one sample into `grads`, given
    /// the gradient of the loss with respect to the network output.
    pub fn backward(&self, cache: &MlpCache<T>, grad_out: &[T], grads: &mut [Dense<T>]) {
        assert_eq!(grads.len(), self.layers.len());
        let mut g = grad_out.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = &cache.inputs[i];
            let gl = &mut grads[i];
            for (o, &go) in g.iter().enumerate() {
                if go == T::zero() {
                    continue;
                }
                gl.bias[o] = gl.bias[o] + go;
                let row = &mut gl.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (w, &xi) in row.iter_mut().zip(input) {
                    *w = *w + go * xi;
                }
            }
            if i == 0 {
                break;
            }
            let mut prev = vec![T::zero(); layer.in_dim];
            for (o, &go) in g.iter().enumerate() {
                if go == T::zero() {
                    continue;
                }
                let row = &layer.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (p, &w) in prev.iter_mut().zip(row) {
                    *p = *p + go * w;
                }
            }
            let pre = &cache.pre[i - 1];
            let mask = cache.masks.get(i - 1);
            for (j, p) in prev.iter_mut().enumerate() {
                let mut d = if pre[j] > T::zero() { *p } else { T::zero() };
                if let Some(m) = mask {
                    d = d * m[j];
                }
                *p = d;
            }
            g = prev;
        }
    }
}
