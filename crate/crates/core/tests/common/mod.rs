//! Independent oracles and small problems shared by the integration tests
//! and the acceptance suite. Nothing here calls into the optimizer internals.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use zeta_opt::nn::{
    entropy_regularized_loss, finite_diff_check, mlp_backward, mlp_forward, mlp_init, LossConfig,
    MlpConfig, ParamSet, Tensor2,
};
use zeta_opt::optim::{
    adam_step, AdamHyperParams, AdamState, LrMode, ZetaHyperParams, ZetaOptimizer,
};

/// Number of explicit terms in the oracle partial sum.
pub const ORACLE_TERMS: u64 = 200_000;

/// Bounds on `ζ(s)` from an explicit partial sum and a convex-tail bracket.
///
/// For decreasing convex `f(x) = x^-s` the tail `Σ_{n>N} f(n)` lies between
/// `∫_{N+1}^∞ f + f(N+1)/2` (trapezoid overestimates each panel) and
/// `∫_{N+1/2}^∞ f` (midpoint underestimates each panel).
pub fn zeta_bracket(s: f64) -> (f64, f64) {
    assert!(s > 1.0);
    let n = ORACLE_TERMS;
    // Summing smallest terms first keeps the rounding error near 1 ulp.
    let head: f64 = (1..=n).rev().map(|k| (k as f64).powf(-s)).sum();
    let tail_integral = |a: f64| a.powf(1.0 - s) / (s - 1.0);
    let a = (n + 1) as f64;
    let lower = tail_integral(a) + 0.5 * a.powf(-s);
    let upper = tail_integral(n as f64 + 0.5);
    (head + lower, head + upper)
}

pub fn zeta_oracle(s: f64) -> f64 {
    let (lo, hi) = zeta_bracket(s);
    0.5 * (lo + hi)
}

/// Gradient of the two-parameter test objective
/// `f(a, b) = (a - 1)^2 + 3 (b + 0.5)^2 + a b + 2`.
pub fn two_param_loss(w: [f64; 2]) -> (f64, [f64; 2]) {
    let [a, b] = w;
    let f = (a - 1.0).powi(2) + 3.0 * (b + 0.5).powi(2) + a * b + 2.0;
    (f, [2.0 * (a - 1.0) + b, 6.0 * (b + 0.5) + a])
}

pub const TWO_PARAM_START: [f64; 2] = [2.5, -3.0];

/// Per-step record of the straight-line reference.
#[derive(Debug, Clone, Copy)]
pub struct RefStep {
    pub theta: [f64; 2],
    pub s: f64,
    pub delta: f64,
    pub rho: f64,
    pub boost: f64,
    pub eta: f64,
}

/// Straight-line transcription of one ZetA run on `two_param_loss`, with the
/// two parameters forming a single 1x2 weight matrix (so centralization
/// applies). Everything is spelled out scalar by scalar.
pub fn reference_trace(hp: &ZetaHyperParams, steps: usize) -> Vec<RefStep> {
    let pi = std::f64::consts::PI;
    let eps = hp.epsilon;
    let big_t = hp.total_steps as f64;

    let mut theta = TWO_PARAM_START;
    let mut m = [0.0f64; 2];
    let mut v = [0.0f64; 2];
    let mut prev = [0.0f64; 2];
    let mut g_ema = 0.0f64;
    let mut l_ema = 0.0f64;
    let mut out = Vec::with_capacity(steps);

    for step in 1..=steps {
        let t = step as f64;
        let (loss, g_raw) = two_param_loss(theta);

        // Clamp and measure.
        let g0 = g_raw[0].clamp(-hp.clip_bound, hp.clip_bound);
        let g1 = g_raw[1].clamp(-hp.clip_bound, hp.clip_bound);
        let gnorm = (g0 * g0 + g1 * g1).sqrt();

        // Exponent schedule (triangle wave) and zeta value.
        let phase = (step as u64 % hp.total_steps) as f64 / big_t;
        let s = hp.s_min + (hp.s_max - hp.s_min) * (1.0 - (1.0 - 2.0 * phase).abs());
        let z = zeta_oracle(s);

        // Damping.
        g_ema = 0.9 * g_ema + 0.1 * gnorm;
        l_ema = 0.9 * l_ema + 0.1 * loss;
        let delta = hp.base_damp * (1.0 + g_ema / (1.0 + g_ema)) * (1.0 / l_ema.max(0.1))
            / (1.0 - 0.9f64.powf(t));

        // Cosine boost against the previous step's processed gradient.
        let prev_norm = (prev[0] * prev[0] + prev[1] * prev[1]).sqrt();
        let (rho, boost) = if prev_norm == 0.0 {
            (0.0, 1.0)
        } else {
            let c = (g0 * prev[0] + g1 * prev[1]) / (gnorm * prev_norm + eps);
            let r = c.clamp(0.0, 1.0);
            (r, 1.0 + delta * 0.2 * r)
        };

        // Centralize the 1x2 row.
        let mean = 0.5 * (g0 + g1);
        let gc = [g0 - mean, g1 - mean];

        let c1 = 1.0 - hp.beta1.powf(t);
        let c2 = 1.0 - hp.beta2.powf(t);
        let direction = |grad: [f64; 2], norm: f64, m: &mut [f64; 2], v: &mut [f64; 2]| {
            let mut u = [0.0; 2];
            for i in 0..2 {
                m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * grad[i];
                v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * grad[i] * grad[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                let ua = mh / (vh.sqrt() + eps);
                let uz = hp.eta * mh * boost / (norm.powf(s - 1.0) + eps) / z;
                u[i] = hp.adam_mix * ua + (1.0 - hp.adam_mix) * uz;
            }
            u
        };

        // Provisional direction and ascent step.
        let (mut m_tmp, mut v_tmp) = (m, v);
        let u0 = direction(gc, gnorm, &mut m_tmp, &mut v_tmp);
        prev = gc;
        let un = (u0[0] * u0[0] + u0[1] * u0[1]).sqrt();
        let e = [
            hp.sam_rho * u0[0] / (un + eps),
            hp.sam_rho * u0[1] / (un + eps),
        ];
        let perturbed = [theta[0] + e[0], theta[1] + e[1]];

        // Gradient at the perturbed point, clamped, measured, centralized.
        let (_, gs_raw) = two_param_loss(perturbed);
        let h0 = gs_raw[0].clamp(-hp.clip_bound, hp.clip_bound);
        let h1 = gs_raw[1].clamp(-hp.clip_bound, hp.clip_bound);
        let hnorm = (h0 * h0 + h1 * h1).sqrt();
        let hmean = 0.5 * (h0 + h1);
        let hc = [h0 - hmean, h1 - hmean];

        let u = direction(hc, hnorm, &mut m, &mut v);

        // Cosine learning rate with one weight-decay damping.
        let tc = t.min(big_t);
        let eta_c = hp.eta * 0.5 * (1.0 + (pi * tc / big_t).cos());
        let eta = eta_c * (1.0 - hp.weight_decay * eta_c);

        theta = [
            perturbed[0] - e[0] - eta * u[0],
            perturbed[1] - e[1] - eta * u[1],
        ];
        out.push(RefStep {
            theta,
            s,
            delta,
            rho,
            boost,
            eta,
        });
    }
    out
}

pub fn two_param_set() -> ParamSet {
    let mut ps = ParamSet::new();
    ps.push(
        "w",
        Tensor2::from_vec(1, 2, TWO_PARAM_START.to_vec()).unwrap(),
        true,
    )
    .unwrap();
    ps
}

fn two_param_fill(ps: &mut ParamSet) -> f64 {
    let w = ps.by_index(0).value.as_slice();
    let (f, g) = two_param_loss([w[0], w[1]]);
    ps.by_index_mut(0).grad.as_mut_slice().copy_from_slice(&g);
    f
}

/// Runs the library optimizer on the same problem; returns the diagnostics
/// and parameters after each step.
pub fn library_trace(
    hp: &ZetaHyperParams,
    steps: usize,
) -> Vec<(zeta_opt::optim::StepDiagnostics, [f64; 2])> {
    let mut ps = two_param_set();
    let mut opt = ZetaOptimizer::new(&ps, *hp).unwrap();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let loss = two_param_fill(&mut ps);
        let diag = opt
            .step(&mut ps, loss, |p| {
                two_param_fill(p);
                Ok(())
            })
            .unwrap();
        let w = ps.by_index(0).value.as_slice();
        out.push((diag, [w[0], w[1]]));
    }
    out
}

/// Seeded logistic-regression problem: features, ±1 targets, a 20-dim
/// weight row and a bias.
pub struct Logistic {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Logistic {
    pub fn new(n: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w_true: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let z: f64 = row.iter().zip(&w_true).map(|(a, b)| a * b).sum();
            let flip = rng.gen::<f64>() < 0.1;
            y.push(if (z > 0.0) != flip { 1.0 } else { -1.0 });
            x.push(row);
        }
        Self { x, y }
    }

    pub fn params(&self, seed: u64) -> ParamSet {
        let dim = self.x[0].len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let mut ps = ParamSet::new();
        ps.push("w", Tensor2::from_vec(1, dim, w).unwrap(), true)
            .unwrap();
        ps.push("b", Tensor2::zeros(1, 1), false).unwrap();
        ps
    }

    /// Mean logistic loss; writes its gradient into `ps`.
    pub fn fill(&self, ps: &mut ParamSet) -> f64 {
        let w = ps.by_index(0).value.as_slice().to_vec();
        let b = ps.by_index(1).value.as_slice()[0];
        let n = self.x.len() as f64;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        let mut loss = 0.0;
        for (row, &y) in self.x.iter().zip(&self.y) {
            let z: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b;
            let margin = y * z;
            loss += (1.0 + (-margin).exp()).ln();
            let coef = -y / (1.0 + margin.exp());
            for (g, a) in gw.iter_mut().zip(row) {
                *g += coef * a / n;
            }
            gb += coef / n;
        }
        ps.by_index_mut(0).grad.as_mut_slice().copy_from_slice(&gw);
        ps.by_index_mut(1).grad.as_mut_slice()[0] = gb;
        loss / n
    }
}

/// ZetA settings under which it must reduce to plain Adam.
pub fn adam_equivalent_hp(adam: &AdamHyperParams) -> ZetaHyperParams {
    ZetaHyperParams {
        eta: adam.eta,
        beta1: adam.beta1,
        beta2: adam.beta2,
        epsilon: adam.epsilon,
        adam_mix: 1.0,
        sam_rho: 0.0,
        base_damp: 0.0,
        clip_bound: f64::INFINITY,
        centralize: false,
        weight_decay: 0.0,
        lr_mode: LrMode::Constant,
        ..Default::default()
    }
}

/// Runs Adam and the reduced ZetA side by side; returns the worst
/// per-coordinate parameter gap seen at any step.
pub fn adam_equivalence_gap(steps: usize, seed: u64) -> f64 {
    let problem = Logistic::new(256, 20, seed);
    let adam_hp = AdamHyperParams::default();
    let mut pa = problem.params(seed + 1);
    let mut pz = pa.clone();
    let mut adam_state = AdamState::new(&pa);
    let mut opt = ZetaOptimizer::new(&pz, adam_equivalent_hp(&adam_hp)).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        problem.fill(&mut pa);
        adam_step(&mut pa, &mut adam_state, &adam_hp).unwrap();
        let loss = problem.fill(&mut pz);
        opt.step(&mut pz, loss, |_| unreachable!("no perturbation pass"))
            .unwrap();
        for (a, z) in pa.flat_values().iter().zip(pz.flat_values()) {
            worst = worst.max((a - z).abs());
        }
    }
    worst
}

/// `½‖θ - θ*‖²` in `dim` dimensions from a start at distance 1.
pub struct Quadratic {
    pub target: Vec<f64>,
    pub start: Vec<f64>,
}

impl Quadratic {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let start = target.iter().zip(&dir).map(|(t, d)| t + d / norm).collect();
        Self { target, start }
    }

    pub fn params(&self) -> ParamSet {
        let mut ps = ParamSet::new();
        let n = self.start.len();
        ps.push(
            "theta",
            Tensor2::from_vec(n, 1, self.start.clone()).unwrap(),
            false,
        )
        .unwrap();
        ps
    }

    pub fn fill(&self, ps: &mut ParamSet) -> f64 {
        let theta = ps.by_index(0).value.as_slice().to_vec();
        let g: Vec<f64> = theta.iter().zip(&self.target).map(|(a, b)| a - b).collect();
        let f = 0.5 * g.iter().map(|x| x * x).sum::<f64>();
        ps.by_index_mut(0).grad.as_mut_slice().copy_from_slice(&g);
        f
    }
}

/// Result of a convergence run: the objective at start, the best objective
/// reached and the step at which it first fell below `goal`.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRun {
    pub initial: f64,
    pub final_value: f64,
    pub hit_at: Option<usize>,
}

pub fn converge_adam(q: &Quadratic, steps: usize, goal: f64) -> ConvergenceRun {
    let hp = AdamHyperParams::default();
    let mut ps = q.params();
    let mut st = AdamState::new(&ps);
    let initial = q.fill(&mut ps);
    let mut hit_at = None;
    let mut f = initial;
    for step in 1..=steps {
        adam_step(&mut ps, &mut st, &hp).unwrap();
        f = q.fill(&mut ps);
        if f < goal && hit_at.is_none() {
            hit_at = Some(step);
        }
    }
    ConvergenceRun {
        initial,
        final_value: f,
        hit_at,
    }
}

/// ZetA at default hyperparameters with the schedule horizon set to the
/// step budget.
pub fn converge_zeta(q: &Quadratic, steps: usize, goal: f64) -> ConvergenceRun {
    let hp = ZetaHyperParams {
        total_steps: steps as u64,
        ..Default::default()
    };
    let mut ps = q.params();
    let mut opt = ZetaOptimizer::new(&ps, hp).unwrap();
    let initial = q.fill(&mut ps);
    let mut f = initial;
    let mut hit_at = None;
    for step in 1..=steps {
        opt.step(&mut ps, f, |p| {
            q.fill(p);
            Ok(())
        })
        .unwrap();
        f = q.fill(&mut ps);
        if f < goal && hit_at.is_none() {
            hit_at = Some(step);
        }
    }
    ConvergenceRun {
        initial,
        final_value: f,
        hit_at,
    }
}

/// Central-difference step for the MLP check.
pub const GRADCHECK_STEP: f64 = 1e-5;

/// Max relative finite-difference error of the MLP loss gradient for one
/// seed.
pub fn mlp_gradcheck(seed: u64) -> f64 {
    mlp_gradcheck_with(seed, GRADCHECK_STEP)
}

pub fn mlp_gradcheck_with(seed: u64, step: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (input, hidden, classes, batch) = (6, 8, 4, 5);
    let mut params = mlp_init(&MlpConfig {
        input_dim: input,
        hidden_dim: hidden,
        num_classes: classes,
        seed,
    })
    .unwrap();
    let x: Vec<f64> = (0..batch * input)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let x = Tensor2::from_vec(batch, input, x).unwrap();
    let labels: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..classes)).collect();
    let cfg = LossConfig::default();
    let logits = mlp_forward(&params, &x).unwrap();
    let (_, dlogits) = entropy_regularized_loss(&logits, &labels, &cfg).unwrap();
    mlp_backward(&mut params, &x, &dlogits).unwrap();
    finite_diff_check(
        &params,
        |p: &ParamSet| {
            let logits = mlp_forward(p, &x).unwrap();
            entropy_regularized_loss(&logits, &labels, &cfg).unwrap().0
        },
        step,
    )
    .unwrap()
}
