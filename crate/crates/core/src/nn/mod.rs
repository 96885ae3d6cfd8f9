//! Dense tensors, the two-layer MLP, losses and gradient checking.

mod gradcheck;
mod loss;
mod mlp;
mod params;
mod tensor;

pub use gradcheck::{finite_diff_check, finite_diff_check_sampled, DEFAULT_SAMPLE};
pub use loss::{
    accuracy, argmax, cross_entropy, entropy_regularized_loss, log_softmax, softmax, LossConfig,
};
pub use mlp::{
    mlp_backward, mlp_forward, mlp_forward_cached, mlp_init, ForwardCache, MlpConfig, FC1_BIAS,
    FC1_WEIGHT, FC2_BIAS, FC2_WEIGHT,
};
pub use params::{Param, ParamSet};
pub use tensor::Tensor2;

pub(crate) use tensor::dot;
