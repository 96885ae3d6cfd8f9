//! Moment bookkeeping shared by Adam and ZetA.

pub(crate) fn update_moments(m: &mut [f64], v: &mut [f64], g: &[f64], beta1: f64, beta2: f64) {
    for ((m, v), g) in m.iter_mut().zip(v.iter_mut()).zip(g) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
    }
}

/// `(1 - beta1^t, 1 - beta2^t)`.
pub(crate) fn bias_corrections(beta1: f64, beta2: f64, t: u64) -> (f64, f64) {
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    (1.0 - beta1.powi(t), 1.0 - beta2.powi(t))
}

pub(crate) fn adam_direction(m_hat: f64, v_hat: f64, eps: f64) -> f64 {
    m_hat / (v_hat.sqrt() + eps)
}
