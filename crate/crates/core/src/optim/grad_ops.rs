use crate::nn::{dot, ParamSet};

/// Clamps every gradient entry into `[-clip_bound, clip_bound]`.
pub fn clip_gradients(params: &mut ParamSet, clip_bound: f64) {
    for p in params.iter_mut() {
        for g in p.grad.as_mut_slice() {
            *g = g.clamp(-clip_bound, clip_bound);
        }
    }
}

/// Subtracts each row mean from the gradient of every weight matrix.
/// Bias vectors are left alone.
pub fn centralize_gradients(params: &mut ParamSet) {
    for p in params.iter_mut().filter(|p| p.is_matrix) {
        let cols = p.grad.cols();
        if cols == 0 {
            continue;
        }
        for r in 0..p.grad.rows() {
            let row = p.grad.row_mut(r);
            let mean = row.iter().sum::<f64>() / cols as f64;
            for g in row {
                *g -= mean;
            }
        }
    }
}

/// Clamped cosine similarity between successive gradients and the
/// resulting boost `1 + 0.2 * delta_t * rho_t`.
///
/// Returns `(rho_t, b_t)`; an all-zero previous gradient gives `(0, 1)`.
pub fn cosine_boost(g: &[f64], prev: &[f64], delta_t: f64, eps: f64) -> (f64, f64) {
    debug_assert_eq!(g.len(), prev.len());
    let prev_norm = dot(prev, prev).sqrt();
    if prev_norm == 0.0 {
        return (0.0, 1.0);
    }
    let norm = dot(g, g).sqrt();
    let cosine = dot(g, prev) / (norm * prev_norm + eps);
    let rho = cosine.clamp(0.0, 1.0);
    (rho, 1.0 + delta_t * 0.2 * rho)
}
