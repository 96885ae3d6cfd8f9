//! Softmax and the entropy-regularized cross-entropy objective
//!
//! `L = mean_i CE_i - w * mean_i H(p_i)`, with `H(p) = -sum_k p_k log p_k`.
//!
//! Per sample the logit gradient is
//! `(p - onehot(y)) / B + w * p ⊙ (log p + H) / B`; the second term is the
//! full softmax-Jacobian contribution of the entropy.

use super::tensor::Tensor2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub entropy_weight: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            entropy_weight: 0.01,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.entropy_weight >= 0.0 && self.entropy_weight.is_finite()) {
            return Err(Error::invalid(
                "entropy_weight",
                format!("must be finite and >= 0, got {}", self.entropy_weight),
            ));
        }
        Ok(())
    }
}

fn log_softmax_row(row: &[f64], out: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    for (o, z) in out.iter_mut().zip(row) {
        *o = z - max - log_z;
    }
}

/// Row-wise log-softmax.
pub fn log_softmax(logits: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zeros(logits.rows(), logits.cols());
    for r in 0..logits.rows() {
        log_softmax_row(logits.row(r), out.row_mut(r));
    }
    out
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zeros(logits.rows(), logits.cols());
    for r in 0..logits.rows() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dst = out.row_mut(r);
        let mut total = 0.0;
        for (o, z) in dst.iter_mut().zip(row) {
            *o = (z - max).exp();
            total += *o;
        }
        for o in dst.iter_mut() {
            *o /= total;
        }
    }
    out
}

fn check_labels(logits: &Tensor2, labels: &[usize]) -> Result<()> {
    if labels.len() != logits.rows() || logits.rows() == 0 {
        return Err(Error::ShapeMismatch {
            context: "loss labels",
            expected: (logits.rows(), 1),
            actual: (labels.len(), 1),
        });
    }
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= logits.cols()) {
        return Err(Error::LabelOutOfRange {
            index,
            label,
            num_classes: logits.cols(),
        });
    }
    Ok(())
}

/// Loss value and its exact gradient with respect to the logits.
pub fn entropy_regularized_loss(
    logits: &Tensor2,
    labels: &[usize],
    cfg: &LossConfig,
) -> Result<(f64, Tensor2)> {
    cfg.validate()?;
    check_labels(logits, labels)?;
    let batch = logits.rows() as f64;
    let w = cfg.entropy_weight;

    let mut grad = Tensor2::zeros(logits.rows(), logits.cols());
    let mut log_p = vec![0.0; logits.cols()];
    let mut ce_total = 0.0;
    let mut entropy_total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        log_softmax_row(logits.row(r), &mut log_p);
        let entropy: f64 = -log_p.iter().map(|lp| lp.exp() * lp).sum::<f64>();
        ce_total -= log_p[label];
        entropy_total += entropy;

        for (k, (g, lp)) in grad.row_mut(r).iter_mut().zip(&log_p).enumerate() {
            let p = lp.exp();
            let onehot = if k == label { 1.0 } else { 0.0 };
            *g = (p - onehot + w * p * (lp + entropy)) / batch;
        }
    }
    let loss = ce_total / batch - w * entropy_total / batch;
    Ok((loss, grad))
}

/// Mean cross-entropy (no entropy term), used for reporting.
pub fn cross_entropy(logits: &Tensor2, labels: &[usize]) -> Result<f64> {
    check_labels(logits, labels)?;
    let log_p = log_softmax(logits);
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(r, &y)| -log_p.get(r, y))
        .sum();
    Ok(total / logits.rows() as f64)
}

/// Fraction of rows whose arg-max logit equals the label; ties go to the
/// lowest class index.
pub fn accuracy(logits: &Tensor2, labels: &[usize]) -> Result<f64> {
    check_labels(logits, labels)?;
    let correct = labels
        .iter()
        .enumerate()
        .filter(|(r, &y)| argmax(logits.row(*r)) == y)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}
