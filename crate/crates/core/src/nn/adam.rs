use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use super::mlp::{Dense, Gradients, Mlp, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    cfg: AdamConfig,
    step: i32,
    first: Vec<Dense<T>>,
    second: Vec<Dense<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(model: &Mlp<T>, cfg: AdamConfig) -> Self {
        let zeros = || {
            model
                .layers()
                .iter()
                .map(|l| Dense {
                    weights: Array2::zeros(l.weights.dim()),
                    bias: Array1::zeros(l.bias.dim()),
                })
                .collect::<Vec<_>>()
        };
        Adam {
            cfg,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    /// Applies one update with step size `lr`.
    pub fn step(&mut self, model: &mut Mlp<T>, grads: &Gradients<T>, lr: f64) {
        self.step += 1;
        let b1 = T::of(self.cfg.beta1);
        let b2 = T::of(self.cfg.beta2);
        let one = T::one();
        let eps = T::of(self.cfg.epsilon);
        let c1 = 1.0 - self.cfg.beta1.powi(self.step);
        let c2 = 1.0 - self.cfg.beta2.powi(self.step);
        let step_size = T::of(lr * c2.sqrt() / c1);
        let eps_hat = eps * T::of(c2.sqrt());

        for (((layer, g), m), v) in model
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            // moments of dead units decay geometrically; flushing them at the
            // normal-float floor keeps arithmetic off the slow subnormal path
            let tiny = T::min_positive_value();
            let flush = |x: T| if x.abs() < tiny { T::zero() } else { x };
            let update = |p: &mut T, &g: &T, m: &mut T, v: &mut T| {
                *m = flush(b1 * *m + (one - b1) * g);
                *v = flush(b2 * *v + (one - b2) * g * g);
                *p -= step_size * *m / (v.sqrt() + eps_hat);
            };
            Zip::from(&mut layer.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(update);
            Zip::from(&mut layer.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(update);
        }
    }
}
