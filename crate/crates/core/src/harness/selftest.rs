//! Fast invariant checks runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{inject_label_noise, make_blobs};
use crate::error::Result;
use crate::nn::{
    entropy_regularized_loss, finite_diff_check, mlp_backward, mlp_forward, mlp_init, softmax,
    LossConfig, MlpConfig, ParamSet, Tensor2,
};
use crate::optim::{
    adam_step, lr_schedule, s_schedule, zeta_step_phase1, zeta_step_phase2, AdamHyperParams,
    AdamState, LrMode, ZetaHyperParams, ZetaState,
};
use crate::zeta::zeta_default;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("zeta_known_values", zeta_known_values),
        check("zeta_monotone", zeta_monotone),
        check("schedule_bounds", schedule_bounds),
        check("softmax_rows", softmax_rows),
        check("mlp_gradient", mlp_gradient),
        check("adam_equivalence", adam_equivalence),
        check("label_noise_no_self_flips", label_noise),
    ]
}

fn zeta_known_values() -> Result<(bool, String)> {
    let z2 = zeta_default(2.0)?;
    let z15 = zeta_default(1.5)?;
    let err2 = (z2 - std::f64::consts::PI.powi(2) / 6.0).abs();
    let err15 = (z15 - 2.612).abs();
    Ok((
        err2 <= 1e-10 && err15 <= 5e-4,
        format!("|Δζ(2)|={err2:.1e} |ζ(1.5)-2.612|={err15:.1e}"),
    ))
}

fn zeta_monotone() -> Result<(bool, String)> {
    let mut prev = f64::INFINITY;
    for i in 1..=300 {
        let s = 1.0 + i as f64 / 100.0;
        let z = zeta_default(s)?;
        if !(z < prev && z > 1.0) {
            return Ok((false, format!("violated at s={s}")));
        }
        prev = z;
    }
    Ok((true, "300 grid points on (1, 4]".into()))
}

fn schedule_bounds() -> Result<(bool, String)> {
    let hp = ZetaHyperParams {
        total_steps: 97,
        ..Default::default()
    };
    let ok = (0..=400u64).all(|t| {
        let s = s_schedule(t, &hp);
        let lr = lr_schedule(t, &hp);
        (hp.s_min..=hp.s_max).contains(&s)
            && (0.0..=hp.eta).contains(&lr)
            && s == s_schedule(t + hp.total_steps, &hp)
    });
    Ok((ok, "t in 0..=400, T=97".into()))
}

fn softmax_rows() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<f64> = (0..200 * 7).map(|_| rng.gen_range(-50.0..50.0)).collect();
    let p = softmax(&Tensor2::from_vec(200, 7, data)?);
    let worst = (0..200)
        .map(|r| (p.row(r).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((worst <= 1e-12, format!("max |row sum - 1| = {worst:.1e}")))
}

fn mlp_gradient() -> Result<(bool, String)> {
    let mut params = mlp_init(&MlpConfig {
        input_dim: 4,
        hidden_dim: 5,
        num_classes: 3,
        seed: 11,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = Tensor2::from_vec(3, 4, (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect())?;
    let labels = [0, 2, 1];
    let cfg = LossConfig::default();
    let (_, d) = entropy_regularized_loss(&mlp_forward(&params, &x)?, &labels, &cfg)?;
    mlp_backward(&mut params, &x, &d)?;
    let err = finite_diff_check(
        &params,
        |p: &ParamSet| {
            let logits = mlp_forward(p, &x).expect("shapes fixed");
            entropy_regularized_loss(&logits, &labels, &cfg)
                .expect("labels valid")
                .0
        },
        1e-5,
    )?;
    Ok((err <= 1e-6, format!("max rel err = {err:.1e}")))
}

fn adam_equivalence() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut make = || {
        let mut ps = ParamSet::new();
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ps.push("w", Tensor2::from_vec(2, 3, v).expect("2x3"), true)
            .expect("fresh set");
        ps
    };
    let mut a = make();
    let mut z = a.clone();
    let target = make();
    let adam_hp = AdamHyperParams::default();
    let zeta_hp = ZetaHyperParams {
        eta: adam_hp.eta,
        adam_mix: 1.0,
        sam_rho: 0.0,
        base_damp: 0.0,
        clip_bound: f64::INFINITY,
        centralize: false,
        weight_decay: 0.0,
        lr_mode: LrMode::Constant,
        ..Default::default()
    };
    let mut adam_state = AdamState::new(&a);
    let mut zeta_state = ZetaState::new(&z);
    let set_grad = |ps: &mut ParamSet| {
        let g: Vec<f64> = ps
            .by_index(0)
            .value
            .as_slice()
            .iter()
            .zip(target.by_index(0).value.as_slice())
            .map(|(x, t)| (x - t) * (x - t) * (x - t))
            .collect();
        ps.by_index_mut(0).grad.as_mut_slice().copy_from_slice(&g);
    };
    for _ in 0..50 {
        set_grad(&mut a);
        adam_step(&mut a, &mut adam_state, &adam_hp)?;
        set_grad(&mut z);
        let (pert, mut diag) = zeta_step_phase1(&mut z, &mut zeta_state, &zeta_hp, 1.0)?;
        set_grad(&mut z);
        zeta_step_phase2(&mut z, &mut zeta_state, &zeta_hp, &pert, &mut diag)?;
    }
    let worst = a
        .flat_values()
        .iter()
        .zip(z.flat_values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok((
        worst <= 1e-12,
        format!("max |Δθ| over 50 steps = {worst:.1e}"),
    ))
}

fn label_noise() -> Result<(bool, String)> {
    let ds = make_blobs(2000, 2, 5, 1.0, 0)?;
    let (noisy, flipped) = inject_label_noise(&ds, 0.1, 4)?;
    let ok = flipped.iter().all(|&i| noisy.labels[i] != ds.labels[i]);
    Ok((ok, format!("{} flips", flipped.len())))
}
