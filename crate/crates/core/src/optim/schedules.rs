use std::f64::consts::PI;

use super::hyper::{LrMode, ZetaHyperParams};

/// Triangular wave between `s_min` (at multiples of `T`) and `s_max` (at `T/2`).
pub fn s_schedule(t: u64, hp: &ZetaHyperParams) -> f64 {
    let period = hp.total_steps.max(1);
    let phase = (t % period) as f64 / period as f64;
    let s = hp.s_min + (hp.s_max - hp.s_min) * (1.0 - (1.0 - 2.0 * phase).abs());
    s.clamp(hp.s_min, hp.s_max)
}

/// Effective learning rate at step `t`.
///
/// The cosine factor `eta_c = eta * (1 + cos(pi t / T)) / 2` is damped once by
/// weight decay: `eta_t = eta_c * (1 - weight_decay * eta_c)`. Steps past the
/// horizon stay at the end value.
pub fn lr_schedule(t: u64, hp: &ZetaHyperParams) -> f64 {
    match hp.lr_mode {
        LrMode::Constant => hp.eta,
        LrMode::Cosine => {
            let horizon = hp.total_steps.max(1);
            let t = t.min(horizon) as f64;
            let cosine = hp.eta * (0.5 * (1.0 + (PI * t / horizon as f64).cos()));
            (cosine * (1.0 - hp.weight_decay * cosine)).max(0.0)
        }
    }
}
