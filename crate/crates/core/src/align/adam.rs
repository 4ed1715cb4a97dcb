use super::mlp::{cast, Dense, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> Moments<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }
}

/// One bias-corrected Adam update of `params` in place. `step` counts from 1.
pub fn adam_step<T: Real>(params: &mut [T], grads: &[T], state: &mut Moments<T>, step: u32, config: &AdamConfig) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    let (b1, b2) = (cast::<T>(config.beta1), cast::<T>(config.beta2));
    let one = T::one();
    let m_corr = one - b1.powi(step as i32);
    let v_corr = one - b2.powi(step as i32);
    let lr = cast::<T>(config.learning_rate);
    let eps = cast::<T>(config.eps);
    for ((p, &g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        if config.learning_rate == 0.0 {
            continue;
        }
        let m_hat = *m / m_corr;
        let v_hat = *v / v_corr;
        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Adam over every weight and bias of a layer stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    config: AdamConfig,
    step: u32,
    state: Vec<(Moments<T>, Moments<T>)>,
}

impl<T: Real> Adam<T> {
    pub fn new(layers: &[Dense<T>], config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            state: layers
                .iter()
                .map(|l| (Moments::zeros(l.weight.len()), Moments::zeros(l.bias.len())))
                .collect(),
        }
    }

    pub fn steps(&self) -> u32 {
        self.step
    }

    pub fn step(&mut self, layers: &mut [Dense<T>], grads: &[Dense<T>]) {
        self.step += 1;
        for ((layer, grad), (mw, mb)) in layers.iter_mut().zip(grads).zip(self.state.iter_mut()) {
            adam_step(&mut layer.weight, &grad.weight, mw, self.step, &self.config);
            adam_step(&mut layer.bias, &grad.bias, mb, self.step, &self.config);
        }
    }
}
