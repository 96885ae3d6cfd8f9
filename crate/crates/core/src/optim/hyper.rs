use crate::error::{Error, Result};

/// How the effective learning rate evolves over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LrMode {
    /// Half-cosine decay from `eta` to 0 over `total_steps`, damped by weight decay.
    #[default]
    Cosine,
    /// `eta` at every step.
    Constant,
}

/// Tunable constants of the ZetA optimizer.
///
/// The defaults for everything except `eta` are not published values; they
/// are chosen to be conventional (Adam betas and epsilon) or mild.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaHyperParams {
    pub eta: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Elementwise gradient clamp `[-clip_bound, clip_bound]`. Infinity disables it.
    pub clip_bound: f64,
    /// Scale of the adaptive damping factor.
    pub base_damp: f64,
    /// Weight of the Adam branch in the hybrid update.
    pub adam_mix: f64,
    /// Horizon `T` for the exponent and learning-rate schedules.
    pub total_steps: u64,
    pub weight_decay: f64,
    /// SAM perturbation radius; 0 disables the second gradient evaluation.
    pub sam_rho: f64,
    /// Row-centralize gradients of weight matrices.
    pub centralize: bool,
    pub lr_mode: LrMode,
}

impl Default for ZetaHyperParams {
    fn default() -> Self {
        Self {
            eta: 0.0015,
            s_min: 1.1,
            s_max: 2.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_bound: 1.0,
            base_damp: 0.1,
            adam_mix: 0.5,
            total_steps: 1000,
            weight_decay: 0.01,
            sam_rho: 0.05,
            centralize: true,
            lr_mode: LrMode::Cosine,
        }
    }
}

fn check(ok: bool, what: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(what, reason()))
    }
}

fn check_beta(beta: f64, what: &'static str) -> Result<()> {
    check((0.0..1.0).contains(&beta), what, || {
        format!("must lie in [0, 1), got {beta}")
    })
}

impl ZetaHyperParams {
    pub fn validate(&self) -> Result<()> {
        check(self.eta.is_finite() && self.eta >= 0.0, "eta", || {
            format!("must be finite and >= 0, got {}", self.eta)
        })?;
        check(
            self.s_min > 1.0 && self.s_min <= self.s_max && self.s_max <= 2.0,
            "zeta exponent bounds",
            || {
                format!(
                    "need 1 < s_min <= s_max <= 2, got s_min={} s_max={}",
                    self.s_min, self.s_max
                )
            },
        )?;
        check_beta(self.beta1, "beta1")?;
        check_beta(self.beta2, "beta2")?;
        check(
            self.epsilon > 0.0 && self.epsilon.is_finite(),
            "epsilon",
            || format!("must be positive, got {}", self.epsilon),
        )?;
        check(self.clip_bound > 0.0, "clip_bound", || {
            format!("must be positive, got {}", self.clip_bound)
        })?;
        check(
            self.base_damp.is_finite() && self.base_damp >= 0.0,
            "base_damp",
            || format!("must be finite and >= 0, got {}", self.base_damp),
        )?;
        check((0.0..=1.0).contains(&self.adam_mix), "adam_mix", || {
            format!("must lie in [0, 1], got {}", self.adam_mix)
        })?;
        check(self.total_steps >= 1, "total_steps", || {
            "must be >= 1".into()
        })?;
        check(
            self.weight_decay.is_finite() && self.weight_decay >= 0.0,
            "weight_decay",
            || format!("must be finite and >= 0, got {}", self.weight_decay),
        )?;
        check(
            self.sam_rho.is_finite() && self.sam_rho >= 0.0,
            "sam_rho",
            || format!("must be finite and >= 0, got {}", self.sam_rho),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyperParams {
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyperParams {
    fn default() -> Self {
        Self {
            eta: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamHyperParams {
    pub fn validate(&self) -> Result<()> {
        check(self.eta.is_finite() && self.eta >= 0.0, "eta", || {
            format!("must be finite and >= 0, got {}", self.eta)
        })?;
        check_beta(self.beta1, "beta1")?;
        check_beta(self.beta2, "beta2")?;
        check(
            self.epsilon > 0.0 && self.epsilon.is_finite(),
            "epsilon",
            || format!("must be positive, got {}", self.epsilon),
        )
    }
}
