mod common;

use proptest::prelude::*;

use zeta_opt::nn::{
    cross_entropy, entropy_regularized_loss, log_softmax, mlp_forward, mlp_init, softmax,
    LossConfig, MlpConfig, Tensor2, FC1_WEIGHT, FC2_BIAS,
};
use zeta_opt::Error;

#[test]
fn mlp_gradients_match_finite_differences() {
    for seed in 0..10 {
        let err = common::mlp_gradcheck(seed);
        assert!(err <= 1e-6, "seed {seed}: {err:e}");
    }
}

#[test]
fn mlp_shapes_and_seeding() {
    let cfg = MlpConfig {
        input_dim: 3,
        hidden_dim: 7,
        num_classes: 4,
        seed: 5,
    };
    let a = mlp_init(&cfg).unwrap();
    let b = mlp_init(&cfg).unwrap();
    assert_eq!(a.checksum(), b.checksum());
    assert_eq!(a.get(FC1_WEIGHT).unwrap().value.shape(), (7, 3));
    assert!(a
        .get(FC2_BIAS)
        .unwrap()
        .value
        .as_slice()
        .iter()
        .all(|&x| x == 0.0));
    let other = mlp_init(&MlpConfig { seed: 6, ..cfg }).unwrap();
    assert_ne!(a.checksum(), other.checksum());

    let x = Tensor2::zeros(2, 3);
    assert_eq!(mlp_forward(&a, &x).unwrap().shape(), (2, 4));
    let bad = Tensor2::zeros(2, 4);
    assert!(matches!(
        mlp_forward(&a, &bad),
        Err(Error::ShapeMismatch { .. })
    ));
}

#[test]
fn zero_entropy_weight_is_cross_entropy() {
    let logits = Tensor2::from_rows(&[vec![1.0, 2.0, -1.0], vec![0.5, 0.5, 3.0]]).unwrap();
    let labels = [1, 0];
    let (loss, _) = entropy_regularized_loss(
        &logits,
        &labels,
        &LossConfig {
            entropy_weight: 0.0,
        },
    )
    .unwrap();
    assert!((loss - cross_entropy(&logits, &labels).unwrap()).abs() < 1e-15);
}

#[test]
fn out_of_range_label_is_rejected() {
    let logits = Tensor2::zeros(1, 3);
    let r = entropy_regularized_loss(&logits, &[3], &LossConfig::default());
    assert!(matches!(r, Err(Error::LabelOutOfRange { .. })));
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(row in prop::collection::vec(-700.0f64..700.0, 1..12)) {
        let n = row.len();
        let logits = Tensor2::from_vec(1, n, row).unwrap();
        let p = softmax(&logits);
        let lp = log_softmax(&logits);
        let sum: f64 = p.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        for (p, lp) in p.as_slice().iter().zip(lp.as_slice()) {
            prop_assert!(*p >= 0.0 && lp.is_finite() && *lp <= 0.0);
        }
    }

    #[test]
    fn softmax_is_shift_invariant(row in prop::collection::vec(-20.0f64..20.0, 2..8), c in -100.0f64..100.0) {
        let n = row.len();
        let shifted: Vec<f64> = row.iter().map(|x| x + c).collect();
        let a = softmax(&Tensor2::from_vec(1, n, row).unwrap());
        let b = softmax(&Tensor2::from_vec(1, n, shifted).unwrap());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_gradient_rows_sum_to_zero(row in prop::collection::vec(-5.0f64..5.0, 3), label in 0usize..3, w in 0.0f64..1.0) {
        let logits = Tensor2::from_vec(1, 3, row).unwrap();
        let (_, d) = entropy_regularized_loss(&logits, &[label], &LossConfig { entropy_weight: w }).unwrap();
        prop_assert!(d.as_slice().iter().sum::<f64>().abs() < 1e-12);
    }
}
