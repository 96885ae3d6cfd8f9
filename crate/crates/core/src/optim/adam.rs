use super::hyper::AdamHyperParams;
use super::moments::{adam_direction, bias_corrections, update_moments};
use crate::error::{Error, Result};
use crate::nn::{ParamSet, Tensor2};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub t: u64,
    pub m: Vec<Tensor2>,
    pub v: Vec<Tensor2>,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        Self {
            t: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }
}

/// Norms observed during one Adam step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdamStepInfo {
    pub grad_norm: f64,
    /// Global norm of `m_hat / (sqrt(v_hat) + eps)`.
    pub update_norm: f64,
}

/// One textbook Adam step with a fixed learning rate. Advances `state.t`.
pub fn adam_step(
    params: &mut ParamSet,
    state: &mut AdamState,
    hp: &AdamHyperParams,
) -> Result<AdamStepInfo> {
    if state.m.len() != params.len() {
        return Err(Error::invalid(
            "adam state",
            format!(
                "tracks {} tensors, parameter set has {}",
                state.m.len(),
                params.len()
            ),
        ));
    }
    for (p, m) in params.iter().zip(&state.m) {
        if p.grad.shape() != m.shape() {
            return Err(Error::ShapeMismatch {
                context: "adam state",
                expected: m.shape(),
                actual: p.grad.shape(),
            });
        }
        if !p.grad.is_finite() {
            return Err(Error::NonFiniteGradient {
                name: p.name.clone(),
            });
        }
    }

    let grad_norm = params.grad_norm();
    let mut update_sq = 0.0;
    state.t += 1;
    let (c1, c2) = bias_corrections(hp.beta1, hp.beta2, state.t);
    for ((p, m), v) in params.iter_mut().zip(&mut state.m).zip(&mut state.v) {
        update_moments(
            m.as_mut_slice(),
            v.as_mut_slice(),
            p.grad.as_slice(),
            hp.beta1,
            hp.beta2,
        );
        for ((theta, m), v) in p
            .value
            .as_mut_slice()
            .iter_mut()
            .zip(m.as_slice())
            .zip(v.as_slice())
        {
            let u = adam_direction(m / c1, v / c2, hp.epsilon);
            update_sq += u * u;
            *theta -= hp.eta * u;
        }
    }
    Ok(AdamStepInfo {
        grad_norm,
        update_norm: update_sq.sqrt(),
    })
}

/// Adam optimizer owning its state.
#[derive(Debug, Clone)]
pub struct Adam {
    pub hp: AdamHyperParams,
    pub state: AdamState,
}

impl Adam {
    pub fn new(params: &ParamSet, hp: AdamHyperParams) -> Result<Self> {
        hp.validate()?;
        Ok(Self {
            hp,
            state: AdamState::new(params),
        })
    }

    pub fn step(&mut self, params: &mut ParamSet) -> Result<AdamStepInfo> {
        adam_step(params, &mut self.state, &self.hp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(value: f64, grad: f64) -> ParamSet {
        let mut ps = ParamSet::new();
        ps.push("x", Tensor2::from_vec(1, 1, vec![value]).unwrap(), false)
            .unwrap();
        ps.by_index_mut(0).grad.as_mut_slice()[0] = grad;
        ps
    }

    #[test]
    fn first_step_by_hand() {
        let hp = AdamHyperParams {
            eta: 1.0,
            ..Default::default()
        };
        let mut ps = scalar(0.0, 0.1);
        let mut state = AdamState::new(&ps);
        let info = adam_step(&mut ps, &mut state, &hp).unwrap();
        assert!((info.grad_norm - 0.1).abs() < 1e-16);
        // m_hat = 0.1, v_hat = 0.01, direction = 0.1 / (0.1 + 1e-8)
        let expected = -0.1 / (0.1 + 1e-8);
        assert!((ps.by_index(0).value.as_slice()[0] - expected).abs() < 1e-15);
        assert!((expected + 0.999_999_9).abs() < 1e-9);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut ps = scalar(0.7, 0.0);
        let mut adam = Adam::new(&ps, AdamHyperParams::default()).unwrap();
        for _ in 0..50 {
            adam.step(&mut ps).unwrap();
        }
        assert_eq!(ps.by_index(0).value.as_slice()[0], 0.7);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut ps = scalar(0.0, f64::NAN);
        let mut adam = Adam::new(&ps, AdamHyperParams::default()).unwrap();
        let err = adam.step(&mut ps).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { ref name } if name == "x"));
        assert_eq!(adam.state.t, 0);
    }
}
