//! Dense network with ReLU hidden layers, inverted dropout and a softmax
//! output, trained with hand-derived backpropagation.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign, SubAssign};

use ndarray::{Array1, Array2, ArrayView2, Axis, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::loss::{LossKind, CLIP_EPS};
use crate::corpus::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::util::argmax;

/// Floating-point type the network computes in.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + ndarray::LinalgScalar
    + ScalarOperand
    + AddAssign
    + SubAssign
    + MulAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    const NAME: &'static str;

    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite value")
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
}

impl Real for f64 {
    const NAME: &'static str = "f64";
}

/// Hidden width of the standard network.
pub const HIDDEN_WIDTH: usize = 500;
/// Dropout before the first dense layer and after each hidden layer.
pub const DROPOUT_RATES: [f64; 4] = [0.1, 0.2, 0.2, 0.3];

/// Layer sizes and dropout rates of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    /// `[input, hidden.., output]`.
    pub layer_dims: Vec<usize>,
    /// Dropout rate on the input of each dense layer.
    pub dropout_rates: Vec<f64>,
}

impl Architecture {
    /// Three hidden layers of 500 units and five outputs.
    pub fn standard(input_dim: usize) -> Architecture {
        Self::with_hidden(input_dim, &[HIDDEN_WIDTH; 3])
    }

    /// Same depth and dropout as [`Architecture::standard`] with other widths.
    pub fn with_hidden(input_dim: usize, hidden: &[usize; 3]) -> Architecture {
        let mut layer_dims = vec![input_dim];
        layer_dims.extend_from_slice(hidden);
        layer_dims.push(NUM_CLASSES);
        Architecture {
            layer_dims,
            dropout_rates: DROPOUT_RATES.to_vec(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 || self.layer_dims.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "invalid layer sizes {:?}",
                self.layer_dims
            )));
        }
        if self.dropout_rates.len() != self.layer_dims.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} dropout rates for {} dense layers",
                self.dropout_rates.len(),
                self.layer_dims.len() - 1
            )));
        }
        if self.dropout_rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::InvalidConfig(format!(
                "dropout rates {:?} outside [0, 1)",
                self.dropout_rates
            )));
        }
        Ok(())
    }
}

/// Fully connected layer; `weights` has shape `(fan_in, fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T = f32> {
    pub(crate) layers: Vec<Dense<T>>,
    pub(crate) dropout_rates: Vec<f64>,
}

/// Dropout behaviour of a forward pass.
pub enum Mode<'a> {
    Train(&'a mut dyn RngCore),
    Infer,
}

/// Gradients laid out like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Dense<T>>,
}

impl<T: Real> Gradients<T> {
    /// All entries in [`Mlp::parameters`] order.
    pub fn flatten(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

/// Result of one forward/backward pass over a batch.
pub struct BatchPass<T> {
    /// Mean of the weighted per-sample losses.
    pub loss: f64,
    pub gradients: Gradients<T>,
}

struct Activations<T> {
    /// Input of each dense layer, after dropout.
    inputs: Vec<Array2<T>>,
    /// Dropout multipliers applied to each input (`None` when inactive).
    masks: Vec<Option<Array2<T>>>,
    /// Hidden pre-activations.
    pre: Vec<Array2<T>>,
    probs: Array2<T>,
}

impl<T: Real> Mlp<T> {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let layers = arch
            .layer_dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights =
                    Array2::from_shape_simple_fn((fan_in, fan_out), || T::of(rng.random_range(-limit..limit)));
                Dense {
                    weights,
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Mlp {
            layers,
            dropout_rates: arch.dropout_rates.clone(),
        })
    }

    /// Builds a model from explicit layers.
    pub fn from_layers(layers: Vec<Dense<T>>, dropout_rates: Vec<f64>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("a network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].weights.ncols() != pair[1].weights.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].weights.ncols(),
                    found: pair[1].weights.nrows(),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.weights.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: l.weights.ncols(),
                    found: l.bias.len(),
                });
            }
        }
        let model = Mlp { layers, dropout_rates };
        model.architecture().validate()?;
        Ok(model)
    }

    pub fn architecture(&self) -> Architecture {
        let mut layer_dims = vec![self.input_dim()];
        layer_dims.extend(self.layers.iter().map(|l| l.weights.ncols()));
        Architecture {
            layer_dims,
            dropout_rates: self.dropout_rates.clone(),
        }
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.ncols())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All trainable values, layer by layer: weights row-major, then bias.
    pub fn parameters(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, values: &[T]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                found: values.len(),
            });
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, x: &[f64], mode: Mode<'_>) -> Result<Vec<f64>> {
        let batch = self.to_batch(&[x])?;
        let rng = match mode {
            Mode::Train(rng) => Some(rng),
            Mode::Infer => None,
        };
        let acts = self.forward_batch(batch.view(), rng);
        Ok(acts
            .probs
            .row(0)
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect())
    }

    /// Probabilities for a batch of rows without dropout.
    pub fn predict_proba(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        self.forward_batch(x, None).probs
    }

    /// Most probable class of each row.
    pub fn predict(&self, x: ArrayView2<'_, T>) -> Vec<usize> {
        self.predict_proba(x)
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().expect("standard layout")))
            .collect()
    }

    pub(crate) fn to_batch(&self, rows: &[&[f64]]) -> Result<Array2<T>> {
        let dim = self.input_dim();
        let mut out = Array2::zeros((rows.len(), dim));
        for (mut dst, src) in out.rows_mut().into_iter().zip(rows) {
            if src.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: src.len(),
                });
            }
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d = T::of(*s);
            }
        }
        Ok(out)
    }

    fn forward_batch(&self, x: ArrayView2<'_, T>, mut rng: Option<&mut dyn RngCore>) -> Activations<T> {
        let n_layers = self.layers.len();
        let mut inputs = Vec::with_capacity(n_layers);
        let mut masks = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers - 1);
        let mut current = x.to_owned();
        let mut logits = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let rate = self.dropout_rates[i];
            let mask = match rng.as_deref_mut() {
                Some(rng) if rate > 0.0 => Some(dropout_mask::<T>(current.dim(), rate, rng)),
                _ => None,
            };
            if let Some(m) = &mask {
                current *= m;
            }
            let mut z = current.dot(&layer.weights);
            z += &layer.bias;
            inputs.push(current);
            masks.push(mask);
            if i + 1 < n_layers {
                current = z.mapv(|v| if v > T::zero() { v } else { T::zero() });
                pre.push(z);
            } else {
                logits = Some(z);
                current = Array2::zeros((0, 0));
            }
        }
        let mut probs = logits.expect("at least one layer");
        softmax_rows(&mut probs);
        Activations {
            inputs,
            masks,
            pre,
            probs,
        }
    }

    /// Mean weighted loss of a batch and its gradient.
    ///
    /// `sample_weights` multiplies each sample's loss (class balancing);
    /// for [`LossKind::Oce`] the ordinal factor `1 + w` is taken from the
    /// current prediction and held constant when differentiating. Passing an
    /// rng enables dropout.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<'_, T>,
        y: ArrayView2<'_, T>,
        loss: LossKind,
        sample_weights: &[f64],
        rng: Option<&mut dyn RngCore>,
    ) -> BatchPass<T> {
        let n = x.nrows();
        debug_assert_eq!(y.nrows(), n);
        debug_assert_eq!(sample_weights.len(), n);
        let acts = self.forward_batch(x, rng);

        // d(mean loss)/d(logits)
        let eps = T::of(CLIP_EPS);
        let mut delta = Array2::<T>::zeros(acts.probs.dim());
        let mut total = 0.0;
        let mut p64 = [0.0; NUM_CLASSES];
        let mut y64 = [0.0; NUM_CLASSES];
        for (r, ((p, yr), mut d)) in acts
            .probs
            .rows()
            .into_iter()
            .zip(y.rows())
            .zip(delta.rows_mut())
            .enumerate()
        {
            for j in 0..NUM_CLASSES {
                p64[j] = p[j].to_f64().unwrap_or(f64::NAN);
                y64[j] = yr[j].to_f64().unwrap_or(f64::NAN);
            }
            let scale = loss.scale(&p64, &y64) * sample_weights[r];
            total += scale * super::loss::ce_loss(&p64, &y64);
            // -Σ_i y_i log p_i over unclipped i; clipped terms are constant.
            let live_mass = (0..NUM_CLASSES)
                .filter(|&i| p[i] > eps)
                .fold(T::zero(), |acc, i| acc + yr[i]);
            let s = T::of(scale / n as f64);
            for j in 0..NUM_CLASSES {
                let own = if p[j] > eps { yr[j] } else { T::zero() };
                d[j] = s * (p[j] * live_mass - own);
            }
        }
        let gradients = self.backward(&acts, delta);
        BatchPass {
            loss: total / n as f64,
            gradients,
        }
    }

    fn backward(&self, acts: &Activations<T>, mut delta: Array2<T>) -> Gradients<T> {
        let mut grads: Vec<Dense<T>> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let weights = acts.inputs[i].t().dot(&delta);
            let bias = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut upstream = delta.dot(&self.layers[i].weights.t());
                if let Some(m) = &acts.masks[i] {
                    upstream *= m;
                }
                ndarray::Zip::from(&mut upstream)
                    .and(&acts.pre[i - 1])
                    .for_each(|g, &z| {
                        if z <= T::zero() {
                            *g = T::zero();
                        }
                    });
                delta = upstream;
            }
            grads.push(Dense { weights, bias });
        }
        grads.reverse();
        Gradients { layers: grads }
    }
}

/// Inverted-dropout multipliers: 0 with probability `rate`, else `1/(1-rate)`.
fn dropout_mask<T: Real>(dim: (usize, usize), rate: f64, rng: &mut dyn RngCore) -> Array2<T> {
    let keep = T::of(1.0 / (1.0 - rate));
    let threshold = (rate * 4_294_967_296.0) as u64;
    Array2::from_shape_simple_fn(dim, || {
        if (rng.next_u32() as u64) < threshold {
            T::zero()
        } else {
            keep
        }
    })
}

fn softmax_rows<T: Real>(z: &mut Array2<T>) {
    for mut row in z.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let mut sum = T::zero();
        row.mapv_inplace(|v| {
            let e = (v - max).exp();
            sum += e;
            e
        });
        row.mapv_inplace(|v| v / sum);
    }
}

/// Standard network for `input_dim` features with Glorot-uniform weights.
pub fn init_model<R: Rng + ?Sized>(input_dim: usize, rng: &mut R) -> Result<Mlp<f32>> {
    Mlp::new(&Architecture::standard(input_dim), rng)
}
