use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `(gamma·⟨x,z⟩ + coef0)^degree`
    Polynomial { degree: u32, gamma: f64, coef0: f64 },
    /// `exp(−gamma·‖x−z‖²)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    /// Cubic polynomial, `gamma = 1/dim`, `coef0 = 1`.
    pub fn polynomial_default(dim: usize) -> Self {
        KernelSpec::Polynomial {
            degree: 3,
            gamma: 1.0 / dim.max(1) as f64,
            coef0: 1.0,
        }
    }

    pub fn rbf_default(dim: usize) -> Self {
        KernelSpec::Rbf {
            gamma: 1.0 / dim.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (gamma, ok_degree) = match *self {
            KernelSpec::Polynomial {
                degree,
                gamma,
                coef0,
            } => (gamma, degree >= 1 && coef0.is_finite()),
            KernelSpec::Rbf { gamma } => (gamma, true),
        };
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!(
                "kernel gamma must be positive, got {gamma}"
            )));
        }
        if !ok_degree {
            return Err(Error::Config(
                "polynomial kernel needs degree ≥ 1 and finite coef0".into(),
            ));
        }
        Ok(())
    }

    /// Kernel value without dimension checks; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn apply(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Polynomial {
                degree,
                gamma,
                coef0,
            } => {
                let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
                (gamma * dot + coef0).powi(degree as i32)
            }
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: z.len(),
        });
    }
    Ok(spec.apply(x, z))
}

/// Dense symmetric Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn compute(spec: &KernelSpec, data: &[Vec<f64>]) -> Result<Self> {
        spec.validate()?;
        let n = data.len();
        if let Some(first) = data.first() {
            if let Some(bad) = data.iter().find(|r| r.len() != first.len()) {
                return Err(Error::Dimension {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = spec.apply(&data[i], &data[j]);
                values[i * n + j] = k;
                values[j * n + i] = k;
            }
        }
        Ok(Self { n, values })
    }

    /// Principal submatrix on `rows` (in the given order).
    pub fn select(&self, rows: &[usize]) -> Self {
        let m = rows.len();
        let mut values = Vec::with_capacity(m * m);
        for &i in rows {
            let row = &self.values[i * self.n..(i + 1) * self.n];
            values.extend(rows.iter().map(|&j| row[j]));
        }
        Self { n: m, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_self_similarity_is_one() {
        let k = KernelSpec::Rbf { gamma: 0.7 };
        assert_eq!(
            kernel_eval(&k, &[0.3, -1.2, 5.0], &[0.3, -1.2, 5.0]).unwrap(),
            1.0
        );
    }

    #[test]
    fn cubic_on_ones() {
        let k = KernelSpec::Polynomial {
            degree: 3,
            gamma: 1.0,
            coef0: 0.0,
        };
        assert_eq!(kernel_eval(&k, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 8.0);
    }

    #[test]
    fn dimension_mismatch() {
        let k = KernelSpec::Rbf { gamma: 1.0 };
        assert!(matches!(
            kernel_eval(&k, &[1.0], &[1.0, 2.0]),
            Err(Error::Dimension {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn invalid_specs() {
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial {
            degree: 0,
            gamma: 1.0,
            coef0: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn select_is_principal_submatrix() {
        let data: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![i as f64 * 0.1, 1.0 - i as f64 * 0.2])
            .collect();
        let k = KernelSpec::polynomial_default(2);
        let full = KernelMatrix::compute(&k, &data).unwrap();
        let sub = full.select(&[4, 1]);
        assert_eq!(sub.get(0, 1), full.get(4, 1));
        assert_eq!(sub.get(1, 1), full.get(1, 1));
    }
}
