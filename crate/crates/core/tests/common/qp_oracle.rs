//! Accelerated projected-gradient solver for the SVM dual, independent of SMO.

use nudgeopt_core::svm::{kernel_eval, KernelSpec};

pub struct OracleSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// `eᵀα − ½αᵀQα`
    pub dual_objective: f64,
}

pub struct Instance {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub upper: Vec<f64>,
    pub kernel: KernelSpec,
}

impl Instance {
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.x
            .iter()
            .map(|a| {
                self.x
                    .iter()
                    .map(|b| kernel_eval(&self.kernel, a, b).unwrap())
                    .collect()
            })
            .collect()
    }
}

fn q_matrix(inst: &Instance) -> Vec<Vec<f64>> {
    let k = inst.gram();
    let n = inst.y.len();
    (0..n)
        .map(|i| (0..n).map(|j| inst.y[i] * inst.y[j] * k[i][j]).collect())
        .collect()
}

pub fn dual_objective(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * q[i][j] * alpha[j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 ≤ α ≤ u, yᵀα = 0}`: `α = clip(v − λy)` with
/// `λ` found by bisection on the monotone map `λ ↦ yᵀclip(v − λy)`.
pub fn project(v: &[f64], y: &[f64], upper: &[f64]) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .zip(upper)
            .map(|((vi, yi), ui)| (vi - lam * yi).clamp(0.0, *ui))
            .collect()
    };
    let h = |lam: f64| at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>();
    let span = v.iter().map(|t| t.abs()).fold(0.0, f64::max)
        + upper.iter().fold(0.0, |m: f64, u| m.max(*u))
        + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn lipschitz(q: &[Vec<f64>]) -> f64 {
    // Gershgorin bound on the largest eigenvalue.
    q.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12)
}

pub fn solve(inst: &Instance, iterations: usize) -> OracleSolution {
    let q = q_matrix(inst);
    let n = inst.y.len();
    let step = 1.0 / lipschitz(&q);
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| q[i].iter().zip(a).map(|(qij, aj)| qij * aj).sum::<f64>() - 1.0)
            .collect()
    };
    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut best = dual_objective(&q, &x);
    for _ in 0..iterations {
        let g = grad(&z);
        let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
        let x_next = project(&v, &inst.y, &inst.upper);
        let obj = dual_objective(&q, &x_next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if obj < best {
            // Restart the momentum when the objective drops.
            z = x_next.clone();
            t = 1.0;
        } else {
            z = x_next
                .iter()
                .zip(&x)
                .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
                .collect();
            t = t_next;
        }
        best = best.max(obj);
        x = x_next;
    }
    let bias = oracle_bias(inst, &x);
    OracleSolution {
        dual_objective: dual_objective(&q, &x),
        alpha: x,
        bias,
    }
}

/// Mean of `yᵢ − Σⱼ αⱼyⱼKᵢⱼ` over multipliers strictly inside the box; the
/// midpoint of the KKT-feasible interval otherwise.
pub fn oracle_bias(inst: &Instance, alpha: &[f64]) -> f64 {
    let k = inst.gram();
    let n = alpha.len();
    let f0 = |i: usize| (0..n).map(|j| alpha[j] * inst.y[j] * k[i][j]).sum::<f64>();
    let eps = 1e-7;
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > eps * inst.upper[i] && alpha[i] < inst.upper[i] * (1.0 - eps))
        .collect();
    if !free.is_empty() {
        return free.iter().map(|&i| inst.y[i] - f0(i)).sum::<f64>() / free.len() as f64;
    }
    // yᵢ(f0 + b) ≥ 1 at zero, ≤ 1 at the upper bound.
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let r = inst.y[i] - f0(i);
        let at_zero = alpha[i] <= eps * inst.upper[i];
        if (inst.y[i] > 0.0) == at_zero {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    0.5 * (lo + hi)
}

pub fn decision(inst: &Instance, alpha: &[f64], bias: f64, x: &[f64]) -> f64 {
    inst.x
        .iter()
        .zip(alpha.iter().zip(&inst.y))
        .map(|(xi, (a, y))| a * y * kernel_eval(&inst.kernel, xi, x).unwrap())
        .sum::<f64>()
        + bias
}

/// Between 4 and `max_n` points in 2–4 dimensions, both classes present,
/// random kernel and C, balanced class weights.
pub fn random_instance(rng: &mut impl rand::Rng, max_n: usize) -> Instance {
    let n = rng.random_range(4..=max_n);
    let dim = rng.random_range(2..=4);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut y: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.4) { 1.0 } else { -1.0 })
        .collect();
    y[0] = 1.0;
    y[1] = -1.0;
    let kernel = if rng.random_bool(0.5) {
        KernelSpec::Polynomial {
            degree: rng.random_range(1..=3),
            gamma: rng.random_range(0.2..1.5),
            coef0: rng.random_range(0.0..1.0),
        }
    } else {
        KernelSpec::Rbf {
            gamma: rng.random_range(0.1..2.0),
        }
    };
    let c = rng.random_range(0.1..10.0);
    let n_pos = y.iter().filter(|&&v| v > 0.0).count();
    let w = nudgeopt_core::svm::class_weights(n_pos, n - n_pos).unwrap();
    let upper = y.iter().map(|&v| c * w.for_label(v > 0.0)).collect();
    Instance {
        x,
        y,
        upper,
        kernel,
    }
}
