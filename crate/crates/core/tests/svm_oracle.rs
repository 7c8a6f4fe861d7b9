mod common;

use common::qp_oracle::{self, random_instance};
use nalgebra::DMatrix;
use nudgeopt_core::svm::smo::solve;
use nudgeopt_core::svm::{check_kkt, KernelMatrix, SmoSettings};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn strict() -> SmoSettings {
    SmoSettings {
        tol: 1e-10,
        max_passes: 100_000,
        record_objective: false,
    }
}

#[test]
fn default_tolerance_satisfies_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 12);
        let gram = KernelMatrix::compute(&inst.kernel, &inst.x).unwrap();
        let sol = solve(&gram, &inst.y, &inst.upper, &SmoSettings::default()).unwrap();
        check_kkt(&gram, &inst.y, &inst.upper, &sol.alpha, sol.bias, 1e-3).unwrap();
        let eq: f64 = sol.alpha.iter().zip(&inst.y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-8);
        assert!(sol
            .alpha
            .iter()
            .zip(&inst.upper)
            .all(|(a, u)| (0.0..=*u).contains(a)));
    }
}

#[test]
fn dual_objective_never_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let settings = SmoSettings {
        record_objective: true,
        ..strict()
    };
    for _ in 0..30 {
        let inst = random_instance(&mut rng, 12);
        let gram = KernelMatrix::compute(&inst.kernel, &inst.x).unwrap();
        let sol = solve(&gram, &inst.y, &inst.upper, &settings).unwrap();
        assert_eq!(sol.objective_trace.len(), sol.iterations + 1);
        for w in sol.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn solution_is_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, 12);
        let gram = KernelMatrix::compute(&inst.kernel, &inst.x).unwrap();
        let base = solve(&gram, &inst.y, &inst.upper, &strict()).unwrap();

        let mut perm: Vec<usize> = (0..inst.y.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled = qp_oracle::Instance {
            x: perm.iter().map(|&i| inst.x[i].clone()).collect(),
            y: perm.iter().map(|&i| inst.y[i]).collect(),
            upper: perm.iter().map(|&i| inst.upper[i]).collect(),
            kernel: inst.kernel,
        };
        let g2 = KernelMatrix::compute(&shuffled.kernel, &shuffled.x).unwrap();
        let other = solve(&g2, &shuffled.y, &shuffled.upper, &strict()).unwrap();
        assert!((base.dual_objective - other.dual_objective).abs() < 1e-8);
        for p in &inst.x {
            let a = qp_oracle::decision(&inst, &base.alpha, base.bias, p);
            let b = qp_oracle::decision(&shuffled, &other.alpha, other.bias, p);
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }
}

#[test]
fn gram_matrices_are_positive_semidefinite() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 12);
        let k = inst.gram();
        let n = k.len();
        let m = DMatrix::from_fn(n, n, |i, j| k[i][j]);
        let scale = m.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let min = m
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-9 * scale, "eigenvalue {min}");
    }
}

#[test]
fn projection_is_feasible_and_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 12);
        let v: Vec<f64> = inst.y.iter().map(|_| rng.random_range(-5.0..5.0)).collect();
        let p = qp_oracle::project(&v, &inst.y, &inst.upper);
        let eq: f64 = p.iter().zip(&inst.y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-9);
        let again = qp_oracle::project(&p, &inst.y, &inst.upper);
        for (a, b) in p.iter().zip(&again) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
