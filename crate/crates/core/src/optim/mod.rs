//! ZetA and Adam optimizers with their schedules and gradient transforms.

mod adam;
mod grad_ops;
mod hyper;
mod moments;
mod schedules;
mod zeta_opt;

pub use adam::{adam_step, Adam, AdamState, AdamStepInfo};
pub use grad_ops::{centralize_gradients, clip_gradients, cosine_boost};
pub use hyper::{AdamHyperParams, LrMode, ZetaHyperParams};
pub use schedules::{lr_schedule, s_schedule};
pub use zeta_opt::{
    update_damping, zeta_step_phase1, zeta_step_phase1_with, zeta_step_phase2, Perturbation,
    StepDiagnostics, ZetaOptimizer, ZetaState,
};
