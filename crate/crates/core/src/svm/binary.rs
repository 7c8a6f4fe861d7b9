use serde::{Deserialize, Serialize};

use super::kernel::{KernelMatrix, KernelSpec};
use super::smo::{self, SmoSettings, SmoSolution};
use crate::error::{Error, Result};

/// Per-class multipliers on the box constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub pos: f64,
    pub neg: f64,
}

impl ClassWeights {
    pub const UNIT: ClassWeights = ClassWeights { pos: 1.0, neg: 1.0 };

    pub fn for_label(&self, positive: bool) -> f64 {
        if positive {
            self.pos
        } else {
            self.neg
        }
    }
}

/// Balanced weights `w_c = n / (2·n_c)`, inversely proportional to class frequency.
pub fn class_weights(n_pos: usize, n_neg: usize) -> Result<ClassWeights> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let n = (n_pos + n_neg) as f64;
    Ok(ClassWeights {
        pos: n / (2.0 * n_pos as f64),
        neg: n / (2.0 * n_neg as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢ·yᵢ` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub class_weights: ClassWeights,
}

impl BinarySvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// Box and equality constraints of the stored multipliers.
    pub fn check_dual_feasibility(&self, eq_tol: f64) -> Result<()> {
        for &coef in &self.dual_coefs {
            let bound = self.c * self.class_weights.for_label(coef > 0.0);
            if !(coef.abs() > 0.0 && coef.abs() <= bound * (1.0 + 1e-12)) {
                return Err(Error::Config(format!(
                    "dual coefficient {coef} outside (0, {bound}]"
                )));
            }
        }
        let sum: f64 = self.dual_coefs.iter().sum();
        if sum.abs() > eq_tol {
            return Err(Error::Config(format!(
                "Σ αᵢyᵢ = {sum:e} exceeds {eq_tol:e}"
            )));
        }
        Ok(())
    }
}

/// `Σᵢ coefᵢ·K(svᵢ, x) + bias`.
pub fn decision_value(model: &BinarySvmModel, x: &[f64]) -> Result<f64> {
    if model.support_vectors.is_empty() {
        return Err(Error::Empty("support vectors"));
    }
    if x.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            found: x.len(),
        });
    }
    Ok(model
        .support_vectors
        .iter()
        .zip(&model.dual_coefs)
        .map(|(sv, c)| c * model.kernel.apply(sv, x))
        .sum::<f64>()
        + model.bias)
}

/// Training problem data already reduced to labels and box bounds.
pub(crate) struct Problem {
    pub y: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Problem {
    pub fn new(labels: &[bool], weights: ClassWeights, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {c}")));
        }
        if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
            return Err(Error::SingleClass);
        }
        Ok(Self {
            y: labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect(),
            upper: labels.iter().map(|&l| c * weights.for_label(l)).collect(),
        })
    }
}

/// Builds the model from a solved dual, keeping only rows with `αᵢ > 0`.
pub(crate) fn assemble(
    rows: &[&[f64]],
    problem: &Problem,
    sol: &SmoSolution,
    kernel: KernelSpec,
    c: f64,
    weights: ClassWeights,
) -> BinarySvmModel {
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(rows[i].to_vec());
            dual_coefs.push(a * problem.y[i]);
        }
    }
    BinarySvmModel {
        support_vectors,
        dual_coefs,
        bias: sol.bias,
        kernel,
        c,
        class_weights: weights,
    }
}

/// Trains a weighted soft-margin SVM; also returns the raw dual solution.
pub fn train_binary_detailed(
    data: &[Vec<f64>],
    labels: &[bool],
    weights: ClassWeights,
    kernel: KernelSpec,
    c: f64,
    settings: &SmoSettings,
) -> Result<(BinarySvmModel, SmoSolution)> {
    if data.len() != labels.len() {
        return Err(Error::Dimension {
            expected: data.len(),
            found: labels.len(),
        });
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite feature value".into()));
    }
    let problem = Problem::new(labels, weights, c)?;
    let gram = KernelMatrix::compute(&kernel, data)?;
    let sol = smo::solve(&gram, &problem.y, &problem.upper, settings)?;
    let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    Ok((assemble(&rows, &problem, &sol, kernel, c, weights), sol))
}

pub fn train_binary(
    data: &[Vec<f64>],
    labels: &[bool],
    weights: ClassWeights,
    kernel: KernelSpec,
    c: f64,
    settings: &SmoSettings,
) -> Result<BinarySvmModel> {
    train_binary_detailed(data, labels, weights, kernel, c, settings).map(|(m, _)| m)
}

/// Trains on rows whose Gram matrix is already available.
pub(crate) fn train_on_gram(
    gram: &KernelMatrix,
    rows: &[&[f64]],
    labels: &[bool],
    weights: ClassWeights,
    kernel: KernelSpec,
    c: f64,
    settings: &SmoSettings,
) -> Result<BinarySvmModel> {
    let problem = Problem::new(labels, weights, c)?;
    let sol = smo::solve(gram, &problem.y, &problem.upper, settings)?;
    Ok(assemble(rows, &problem, &sol, kernel, c, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_weights() {
        assert_eq!(class_weights(50, 50).unwrap(), ClassWeights::UNIT);
        let w = class_weights(10, 90).unwrap();
        assert_eq!(w.pos, 5.0);
        assert!((w.neg - 0.5556).abs() < 1e-4);
        assert!(matches!(class_weights(0, 3), Err(Error::SingleClass)));
    }

    #[test]
    fn weighted_counts_balance() {
        for (p, n) in [(1, 1), (3, 997), (17, 40), (250, 250), (499, 1)] {
            let w = class_weights(p, n).unwrap();
            let (lhs, rhs) = (w.pos * p as f64, w.neg * n as f64);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs, "{p}/{n}");
        }
    }

    #[test]
    fn two_point_boundary_at_zero() {
        let kernel = KernelSpec::Polynomial {
            degree: 1,
            gamma: 1.0,
            coef0: 0.0,
        };
        let m = train_binary(
            &[vec![-1.0], vec![1.0]],
            &[false, true],
            ClassWeights::UNIT,
            kernel,
            10.0,
            &SmoSettings::default(),
        )
        .unwrap();
        assert!((decision_value(&m, &[1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((decision_value(&m, &[-1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(decision_value(&m, &[0.0]).unwrap().abs() < 1e-12);
        m.check_dual_feasibility(1e-8).unwrap();
    }

    #[test]
    fn free_support_vector_sits_on_margin() {
        let data: Vec<Vec<f64>> = (0..16)
            .map(|i| {
                let t = i as f64 * 0.9;
                vec![t.sin() * 0.8, (1.3 * t).cos() * 0.6]
            })
            .collect();
        let labels: Vec<bool> = data.iter().map(|x| x[0] + 0.5 * x[1] > 0.05).collect();
        let w = class_weights(
            labels.iter().filter(|&&l| l).count(),
            labels.iter().filter(|&&l| !l).count(),
        )
        .unwrap();
        let tol = 1e-3;
        let m = train_binary(
            &data,
            &labels,
            w,
            KernelSpec::polynomial_default(2),
            1.0,
            &SmoSettings {
                tol,
                ..Default::default()
            },
        )
        .unwrap();
        for (sv, &coef) in m.support_vectors.iter().zip(&m.dual_coefs) {
            let bound = m.c * m.class_weights.for_label(coef > 0.0);
            if coef.abs() < bound {
                let f = decision_value(&m, sv).unwrap();
                assert!((f - coef.signum()).abs() <= tol, "f = {f}");
            }
        }
    }

    #[test]
    fn empty_model_rejected() {
        let m = BinarySvmModel {
            support_vectors: vec![],
            dual_coefs: vec![],
            bias: 0.0,
            kernel: KernelSpec::Rbf { gamma: 1.0 },
            c: 1.0,
            class_weights: ClassWeights::UNIT,
        };
        assert!(matches!(decision_value(&m, &[0.0]), Err(Error::Empty(_))));
    }

    #[test]
    fn dimension_checked() {
        let m = train_binary(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            &[true, false],
            ClassWeights::UNIT,
            KernelSpec::Rbf { gamma: 1.0 },
            1.0,
            &SmoSettings::default(),
        )
        .unwrap();
        assert!(matches!(
            decision_value(&m, &[0.0]),
            Err(Error::Dimension { .. })
        ));
    }
}
