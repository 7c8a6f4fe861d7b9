mod common;

use common::gradcheck::{max_gradient_error, random_problem};
use nudgeopt_core::mlp::{init_mlp, train_mlp, Architecture, TrainConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn backprop_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let (model, xs, ts) = random_problem(&mut rng);
        let err = max_gradient_error(&model, &xs, &ts);
        assert!(err < 1e-4, "case {case}: relative error {err}");
    }
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<Vec<f64>> = (0..64)
        .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect();
    let ts: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            if x[0] > 0.5 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })
        .collect();
    let net = init_mlp(2, 2, Architecture::single_hidden(), 0.5, 1).unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        learning_rate: 0.5,
        batch_size: 8,
        seed: 3,
        init_scale: 0.5,
    };
    let (a, hist) = train_mlp(&net, &xs, &ts, &cfg).unwrap();
    let (b, _) = train_mlp(&net, &xs, &ts, &cfg).unwrap();
    assert_eq!(a.parameters(), b.parameters());
    assert_eq!(hist.len(), 200);
    assert!(hist.last().unwrap() < &(0.5 * net.loss(&xs, &ts).unwrap()));
}

proptest! {
    #[test]
    fn softmax_output_is_a_distribution(
        seed in any::<u64>(),
        x in proptest::collection::vec(-3.0f64..3.0, 4),
    ) {
        let net = init_mlp(4, 6, Architecture::default(), 2.0, seed).unwrap();
        let p = net.forward(&x).unwrap();
        prop_assert_eq!(p.len(), 6);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
