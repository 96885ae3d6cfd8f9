//! The ZetA optimizer: Adam blended with a zeta-scaled momentum branch,
//! driven by a two-phase sharpness-aware step.
//!
//! Phase 1 consumes the gradient at `θ` and
//! 1. clamps it elementwise,
//! 2. picks the exponent `s_t` and evaluates `ζ(s_t)`,
//! 3. folds the global gradient norm and the loss into their EMAs to get
//!    the damping factor `δ_t`,
//! 4. measures the clamped cosine `ρ_t` against the previous step's
//!    gradient and forms the boost `b_t`,
//! 5. centralizes weight-matrix gradients,
//! 6. builds a provisional hybrid direction `u_t` from moments that are
//!    *not* committed, and
//! 7. moves to `θ⁺ = θ + γ u_t / (‖u_t‖ + ε)`.
//!
//! The caller then recomputes gradients at `θ⁺`. Phase 2 returns to `θ`,
//! clamps and centralizes the new gradient, commits the moment EMAs from it,
//! rebuilds `u_t` with the phase-1 `s_t`, `ζ(s_t)` and `b_t`, and descends
//! by `η_t u_t`. With `γ = 0` the two phases collapse to a single pass.

use super::grad_ops::{centralize_gradients, clip_gradients, cosine_boost};
use super::hyper::ZetaHyperParams;
use super::moments::{adam_direction, bias_corrections, update_moments};
use super::schedules::{lr_schedule, s_schedule};
use crate::error::{Error, Result};
use crate::nn::{ParamSet, Tensor2};
use crate::zeta::{zeta, ZetaEvalConfig};

/// Mutable per-run optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaState {
    /// Index of the most recent step; 0 before the first step.
    pub t: u64,
    pub m: Vec<Tensor2>,
    pub v: Vec<Tensor2>,
    /// Clamped, centralized gradient consumed by the previous phase 1.
    pub prev_grad_flat: Vec<f64>,
    pub gnorm_ema: f64,
    pub loss_ema: f64,
    pending_step: Option<u64>,
}

impl ZetaState {
    pub fn new(params: &ParamSet) -> Self {
        Self {
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
            prev_grad_flat: vec![0.0; params.num_scalars()],
            gnorm_ema: 0.0,
            loss_ema: 0.0,
            pending_step: None,
        }
    }

    /// True between phase 1 and phase 2 of a step.
    pub fn in_step(&self) -> bool {
        self.pending_step.is_some()
    }

    fn check_matches(&self, params: &ParamSet) -> Result<()> {
        if self.m.len() != params.len() || self.prev_grad_flat.len() != params.num_scalars() {
            return Err(Error::invalid(
                "zeta state",
                "state was built for a different parameter set".to_string(),
            ));
        }
        for (p, m) in params.iter().zip(&self.m) {
            if p.value.shape() != m.shape() || p.grad.shape() != m.shape() {
                return Err(Error::ShapeMismatch {
                    context: "zeta state",
                    expected: m.shape(),
                    actual: p.grad.shape(),
                });
            }
        }
        Ok(())
    }
}

/// Derived scalars of one optimizer step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub step: u64,
    pub s_t: f64,
    pub zeta_s: f64,
    pub delta_t: f64,
    pub rho_t: f64,
    pub boost: f64,
    pub eta_t: f64,
    /// Global L2 norm of the clamped phase-1 gradient.
    pub grad_norm: f64,
    /// Global L2 norm of the applied hybrid direction.
    pub update_norm: f64,
}

/// Offsets applied to each parameter in phase 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    deltas: Vec<Tensor2>,
}

impl Perturbation {
    pub fn new(deltas: Vec<Tensor2>) -> Self {
        Self { deltas }
    }

    pub fn deltas(&self) -> &[Tensor2] {
        &self.deltas
    }

    pub fn is_zero(&self) -> bool {
        self.deltas
            .iter()
            .all(|d| d.as_slice().iter().all(|&x| x == 0.0))
    }
}

/// Updates the gradient-norm and loss EMAs and returns `δ_t`.
/// `state.t` must already hold the current (1-based) step index.
pub fn update_damping(
    state: &mut ZetaState,
    grad_norm: f64,
    loss: f64,
    hp: &ZetaHyperParams,
) -> f64 {
    state.gnorm_ema = 0.9 * state.gnorm_ema + 0.1 * grad_norm;
    state.loss_ema = 0.9 * state.loss_ema + 0.1 * loss;
    let t = i32::try_from(state.t.max(1)).unwrap_or(i32::MAX);
    let warmup = 1.0 - 0.9f64.powi(t);
    let g = state.gnorm_ema;
    hp.base_damp * (1.0 + g / (1.0 + g)) * (1.0 / state.loss_ema.max(0.1)) / warmup
}

/// Rejects non-finite gradients, clamps, and returns the global norm.
fn clip_and_measure(params: &mut ParamSet, clip_bound: f64) -> Result<f64> {
    if let Some(bad) = params.iter().find(|p| !p.grad.is_finite()) {
        return Err(Error::NonFiniteGradient {
            name: bad.name.clone(),
        });
    }
    clip_gradients(params, clip_bound);
    Ok(params.grad_norm())
}

struct Scalars {
    t: u64,
    s_t: f64,
    zeta_s: f64,
    boost: f64,
    grad_norm: f64,
}

/// `α u_adam + (1 - α) u_ζ` for every parameter. When `commit` is false the
/// moment EMAs are advanced on scratch copies only.
fn hybrid_direction(
    params: &ParamSet,
    state: &mut ZetaState,
    hp: &ZetaHyperParams,
    sc: &Scalars,
    commit: bool,
) -> Vec<Tensor2> {
    let (c1, c2) = bias_corrections(hp.beta1, hp.beta2, sc.t);
    let damping = sc.grad_norm.powf(sc.s_t - 1.0) + hp.epsilon;
    let inv_zeta = 1.0 / sc.zeta_s;
    let alpha = hp.adam_mix;

    let mut out = Vec::with_capacity(params.len());
    for (i, p) in params.iter().enumerate() {
        let (mut scratch_m, mut scratch_v);
        let (m, v) = if commit {
            (&mut state.m[i], &mut state.v[i])
        } else {
            scratch_m = state.m[i].clone();
            scratch_v = state.v[i].clone();
            (&mut scratch_m, &mut scratch_v)
        };
        update_moments(
            m.as_mut_slice(),
            v.as_mut_slice(),
            p.grad.as_slice(),
            hp.beta1,
            hp.beta2,
        );
        let mut u = Tensor2::zeros(p.value.rows(), p.value.cols());
        for ((u, m), v) in u
            .as_mut_slice()
            .iter_mut()
            .zip(m.as_slice())
            .zip(v.as_slice())
        {
            let m_hat = m / c1;
            let v_hat = v / c2;
            let u_adam = adam_direction(m_hat, v_hat, hp.epsilon);
            let u_zeta = hp.eta * m_hat * sc.boost / damping * inv_zeta;
            *u = alpha * u_adam + (1.0 - alpha) * u_zeta;
        }
        out.push(u);
    }
    out
}

fn global_norm(tensors: &[Tensor2]) -> f64 {
    tensors.iter().map(Tensor2::sum_squares).sum::<f64>().sqrt()
}

/// First half of a ZetA step; see the module docs.
///
/// Advances `state.t`, overwrites `params` gradients with their clamped and
/// centralized form, and moves `params` to the perturbed point.
pub fn zeta_step_phase1(
    params: &mut ParamSet,
    state: &mut ZetaState,
    hp: &ZetaHyperParams,
    loss: f64,
) -> Result<(Perturbation, StepDiagnostics)> {
    zeta_step_phase1_with(params, state, hp, loss, &ZetaEvalConfig::default())
}

pub fn zeta_step_phase1_with(
    params: &mut ParamSet,
    state: &mut ZetaState,
    hp: &ZetaHyperParams,
    loss: f64,
    zeta_cfg: &ZetaEvalConfig,
) -> Result<(Perturbation, StepDiagnostics)> {
    hp.validate()?;
    if state.in_step() {
        return Err(Error::PhaseOrder("phase 1 called twice without phase 2"));
    }
    state.check_matches(params)?;
    if !loss.is_finite() {
        return Err(Error::invalid(
            "loss",
            format!("must be finite, got {loss}"),
        ));
    }

    let grad_norm = clip_and_measure(params, hp.clip_bound)?;
    let t = state.t + 1;
    let s_t = s_schedule(t, hp);
    let zeta_s = zeta(s_t, zeta_cfg)?;

    state.t = t;
    let delta_t = update_damping(state, grad_norm, loss, hp);
    let (rho_t, boost) = cosine_boost(
        &params.flat_grads(),
        &state.prev_grad_flat,
        delta_t,
        hp.epsilon,
    );
    if hp.centralize {
        centralize_gradients(params);
    }

    let sc = Scalars {
        t,
        s_t,
        zeta_s,
        boost,
        grad_norm,
    };
    let u = hybrid_direction(params, state, hp, &sc, false);
    state.prev_grad_flat = params.flat_grads();

    let deltas = if hp.sam_rho == 0.0 {
        params.zeros_like()
    } else {
        let scale = hp.sam_rho / (global_norm(&u) + hp.epsilon);
        u.into_iter()
            .map(|mut d| {
                for x in d.as_mut_slice() {
                    *x *= scale;
                }
                d
            })
            .collect()
    };
    for (p, d) in params.iter_mut().zip(&deltas) {
        for (theta, d) in p.value.as_mut_slice().iter_mut().zip(d.as_slice()) {
            *theta += d;
        }
    }
    state.pending_step = Some(t);

    let diag = StepDiagnostics {
        step: t,
        s_t,
        zeta_s,
        delta_t,
        rho_t,
        boost,
        eta_t: lr_schedule(t, hp),
        grad_norm,
        update_norm: 0.0,
    };
    Ok((Perturbation::new(deltas), diag))
}

/// Second half of a ZetA step. `params` must sit at the perturbed point
/// with gradients evaluated there; on return they hold `θ_t`.
pub fn zeta_step_phase2(
    params: &mut ParamSet,
    state: &mut ZetaState,
    hp: &ZetaHyperParams,
    perturbation: &Perturbation,
    diag: &mut StepDiagnostics,
) -> Result<()> {
    match state.pending_step {
        None => {
            return Err(Error::PhaseOrder(
                "phase 2 called without a preceding phase 1",
            ))
        }
        Some(t) if t != diag.step => {
            return Err(Error::PhaseOrder(
                "diagnostics do not belong to the pending step",
            ))
        }
        Some(_) => {}
    }
    state.check_matches(params)?;
    if perturbation.deltas.len() != params.len() {
        return Err(Error::invalid(
            "perturbation",
            format!(
                "has {} tensors, expected {}",
                perturbation.deltas.len(),
                params.len()
            ),
        ));
    }
    for (p, d) in params.iter().zip(&perturbation.deltas) {
        if p.value.shape() != d.shape() {
            return Err(Error::ShapeMismatch {
                context: "perturbation",
                expected: p.value.shape(),
                actual: d.shape(),
            });
        }
    }

    let sam_norm = clip_and_measure(params, hp.clip_bound)?;
    for (p, d) in params.iter_mut().zip(&perturbation.deltas) {
        for (theta, d) in p.value.as_mut_slice().iter_mut().zip(d.as_slice()) {
            *theta -= d;
        }
    }
    if hp.centralize {
        centralize_gradients(params);
    }

    let sc = Scalars {
        t: diag.step,
        s_t: diag.s_t,
        zeta_s: diag.zeta_s,
        boost: diag.boost,
        grad_norm: sam_norm,
    };
    let u = hybrid_direction(params, state, hp, &sc, true);
    let eta_t = lr_schedule(diag.step, hp);
    for (p, u) in params.iter_mut().zip(&u) {
        for (theta, u) in p.value.as_mut_slice().iter_mut().zip(u.as_slice()) {
            *theta -= eta_t * u;
        }
    }
    diag.eta_t = eta_t;
    diag.update_norm = global_norm(&u);
    state.pending_step = None;
    Ok(())
}

/// ZetA optimizer owning its hyperparameters and state.
#[derive(Debug, Clone)]
pub struct ZetaOptimizer {
    pub hp: ZetaHyperParams,
    pub state: ZetaState,
    zeta_cfg: ZetaEvalConfig,
}

impl ZetaOptimizer {
    pub fn new(params: &ParamSet, hp: ZetaHyperParams) -> Result<Self> {
        hp.validate()?;
        Ok(Self {
            hp,
            state: ZetaState::new(params),
            zeta_cfg: ZetaEvalConfig::default(),
        })
    }

    pub fn phase1(
        &mut self,
        params: &mut ParamSet,
        loss: f64,
    ) -> Result<(Perturbation, StepDiagnostics)> {
        zeta_step_phase1_with(params, &mut self.state, &self.hp, loss, &self.zeta_cfg)
    }

    pub fn phase2(
        &mut self,
        params: &mut ParamSet,
        perturbation: &Perturbation,
        diag: &mut StepDiagnostics,
    ) -> Result<()> {
        zeta_step_phase2(params, &mut self.state, &self.hp, perturbation, diag)
    }

    /// Runs both phases. `regrad` must refill `params` gradients at the
    /// current (perturbed) parameters; it is skipped when `sam_rho == 0`,
    /// in which case the phase-1 gradients are reused.
    pub fn step<F>(
        &mut self,
        params: &mut ParamSet,
        loss: f64,
        mut regrad: F,
    ) -> Result<StepDiagnostics>
    where
        F: FnMut(&mut ParamSet) -> Result<()>,
    {
        let raw: Vec<Tensor2> = params.iter().map(|p| p.grad.clone()).collect();
        let (perturbation, mut diag) = self.phase1(params, loss)?;
        if self.hp.sam_rho > 0.0 {
            if let Err(e) = regrad(params) {
                self.state.pending_step = None;
                return Err(e);
            }
        } else {
            for (p, g) in params.iter_mut().zip(raw) {
                p.grad = g;
            }
        }
        self.phase2(params, &perturbation, &mut diag)?;
        Ok(diag)
    }
}
