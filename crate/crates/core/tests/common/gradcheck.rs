use nudgeopt_core::mlp::{init_mlp, Architecture, MlpModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `|a − b| / max(|a|, |b|, floor)`; the floor keeps near-zero components
/// from dominating through rounding alone.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> (MlpModel, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let input = rng.random_range(1..=5);
    let outputs = rng.random_range(2..=5);
    let arch = Architecture {
        hidden_layers: rng.random_range(1..=3),
        hidden_width: rng.random_range(2..=6),
    };
    let model = init_mlp(input, outputs, arch, 1.5, rng.random()).unwrap();
    let batch = rng.random_range(1..=6);
    let xs = (0..batch)
        .map(|_| (0..input).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let ts = (0..batch)
        .map(|_| {
            (0..outputs)
                .map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    (model, xs, ts)
}

pub fn max_gradient_error(model: &MlpModel, xs: &[Vec<f64>], ts: &[Vec<f64>]) -> f64 {
    let (_, grad) = model.loss_and_gradient(xs, ts).unwrap();
    let params = model.parameters();
    assert_eq!(grad.len(), params.len());
    let h = 1e-5;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for k in 0..params.len() {
        let mut p = params.clone();
        p[k] += h;
        probe.set_parameters(&p).unwrap();
        let up = probe.loss(xs, ts).unwrap();
        p[k] -= 2.0 * h;
        probe.set_parameters(&p).unwrap();
        let down = probe.loss(xs, ts).unwrap();
        worst = worst.max(relative_error(grad[k], (up - down) / (2.0 * h)));
    }
    worst
}
