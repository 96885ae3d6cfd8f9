//! Two-layer ReLU perceptron: `logits = W2 · relu(W1 · x + b1) + b2`.
//!
//! Parameters live in a [`ParamSet`] in the fixed order
//! `fc1.weight [hidden, input]`, `fc1.bias [hidden, 1]`,
//! `fc2.weight [classes, hidden]`, `fc2.bias [classes, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::ParamSet;
use super::tensor::Tensor2;
use crate::error::{Error, Result};

pub const FC1_WEIGHT: &str = "fc1.weight";
pub const FC1_BIAS: &str = "fc1.bias";
pub const FC2_WEIGHT: &str = "fc2.weight";
pub const FC2_BIAS: &str = "fc2.bias";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    pub seed: u64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 || self.num_classes == 0 {
            return Err(Error::invalid(
                "mlp config",
                format!(
                    "all dimensions must be >= 1, got input={} hidden={} classes={}",
                    self.input_dim, self.hidden_dim, self.num_classes
                ),
            ));
        }
        Ok(())
    }
}

/// Seeded uniform init in `±1/sqrt(fan_in)` for weights; zero biases.
pub fn mlp_init(cfg: &MlpConfig) -> Result<ParamSet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut uniform = |rows: usize, cols: usize| {
        let bound = 1.0 / (cols as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        Tensor2::from_vec(rows, cols, data)
    };
    let w1 = uniform(cfg.hidden_dim, cfg.input_dim)?;
    let w2 = uniform(cfg.num_classes, cfg.hidden_dim)?;

    let mut ps = ParamSet::new();
    ps.push(FC1_WEIGHT, w1, true)?;
    ps.push(FC1_BIAS, Tensor2::zeros(cfg.hidden_dim, 1), false)?;
    ps.push(FC2_WEIGHT, w2, true)?;
    ps.push(FC2_BIAS, Tensor2::zeros(cfg.num_classes, 1), false)?;
    Ok(ps)
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub pre_activation: Tensor2,
    pub hidden: Tensor2,
    pub logits: Tensor2,
}

struct Layers<'a> {
    w1: &'a Tensor2,
    b1: &'a Tensor2,
    w2: &'a Tensor2,
    b2: &'a Tensor2,
}

fn layers(params: &ParamSet) -> Result<Layers<'_>> {
    if params.len() != 4 {
        return Err(Error::invalid(
            "mlp parameters",
            format!("expected 4 entries, found {}", params.len()),
        ));
    }
    let names = [FC1_WEIGHT, FC1_BIAS, FC2_WEIGHT, FC2_BIAS];
    for (i, name) in names.iter().enumerate() {
        if params.by_index(i).name != *name {
            return Err(Error::invalid(
                "mlp parameters",
                format!(
                    "entry {i} should be `{name}`, found `{}`",
                    params.by_index(i).name
                ),
            ));
        }
    }
    let l = Layers {
        w1: &params.by_index(0).value,
        b1: &params.by_index(1).value,
        w2: &params.by_index(2).value,
        b2: &params.by_index(3).value,
    };
    let hidden = l.w1.rows();
    let classes = l.w2.rows();
    let expect = |t: &Tensor2, shape: (usize, usize), context| {
        if t.shape() != shape {
            Err(Error::ShapeMismatch {
                context,
                expected: shape,
                actual: t.shape(),
            })
        } else {
            Ok(())
        }
    };
    expect(l.b1, (hidden, 1), "fc1.bias")?;
    expect(l.w2, (classes, hidden), "fc2.weight")?;
    expect(l.b2, (classes, 1), "fc2.bias")?;
    Ok(l)
}

fn add_bias_rows(t: &mut Tensor2, bias: &Tensor2) {
    let b = bias.as_slice();
    for r in 0..t.rows() {
        for (x, bb) in t.row_mut(r).iter_mut().zip(b) {
            *x += bb;
        }
    }
}

pub fn mlp_forward_cached(params: &ParamSet, x: &Tensor2) -> Result<ForwardCache> {
    let l = layers(params)?;
    if x.cols() != l.w1.cols() {
        return Err(Error::ShapeMismatch {
            context: "mlp_forward input",
            expected: (x.rows(), l.w1.cols()),
            actual: x.shape(),
        });
    }
    let mut pre_activation = x.matmul_transposed(l.w1)?;
    add_bias_rows(&mut pre_activation, l.b1);
    let mut hidden = pre_activation.clone();
    for h in hidden.as_mut_slice() {
        *h = h.max(0.0);
    }
    let mut logits = hidden.matmul_transposed(l.w2)?;
    add_bias_rows(&mut logits, l.b2);
    Ok(ForwardCache {
        pre_activation,
        hidden,
        logits,
    })
}

/// Logits `[batch, classes]` for inputs `[batch, input_dim]`.
pub fn mlp_forward(params: &ParamSet, x: &Tensor2) -> Result<Tensor2> {
    mlp_forward_cached(params, x).map(|c| c.logits)
}

/// Overwrites every gradient in `params` with the derivative of the loss
/// whose logit gradient is `dloss_dlogits`.
pub fn mlp_backward(params: &mut ParamSet, x: &Tensor2, dloss_dlogits: &Tensor2) -> Result<()> {
    let cache = mlp_forward_cached(params, x)?;
    if dloss_dlogits.shape() != cache.logits.shape() {
        return Err(Error::ShapeMismatch {
            context: "mlp_backward dloss_dlogits",
            expected: cache.logits.shape(),
            actual: dloss_dlogits.shape(),
        });
    }
    let w2 = params.by_index(2).value.clone();

    let d_w2 = dloss_dlogits.transposed_matmul(&cache.hidden)?;
    let d_b2 = column_sums(dloss_dlogits);
    let mut d_hidden = dloss_dlogits.matmul(&w2)?;
    for (d, pre) in d_hidden
        .as_mut_slice()
        .iter_mut()
        .zip(cache.pre_activation.as_slice())
    {
        if *pre <= 0.0 {
            *d = 0.0;
        }
    }
    let d_w1 = d_hidden.transposed_matmul(x)?;
    let d_b1 = column_sums(&d_hidden);

    params.by_index_mut(0).grad = d_w1;
    params.by_index_mut(1).grad = d_b1;
    params.by_index_mut(2).grad = d_w2;
    params.by_index_mut(3).grad = d_b2;
    Ok(())
}

fn column_sums(t: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zeros(t.cols(), 1);
    for r in 0..t.rows() {
        for (o, x) in out.as_mut_slice().iter_mut().zip(t.row(r)) {
            *o += x;
        }
    }
    out
}
