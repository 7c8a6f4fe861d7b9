//! SMO for the weighted soft-margin dual
//!
//! ```text
//! min_α  ½ αᵀQα − eᵀα   s.t.  yᵀα = 0,  0 ≤ αᵢ ≤ Cᵢ,   Qᵢⱼ = yᵢyⱼK(xᵢ,xⱼ)
//! ```
//!
//! Working pairs are chosen with second-order information: `i` is the
//! maximal violator in `I_up`, `j` minimises the two-variable objective
//! decrease bound among violating partners in `I_low`. The loop stops once
//! `m(α) − M(α) < tol`.

use serde::{Deserialize, Serialize};

use super::kernel::KernelMatrix;
use crate::error::{Error, Result, SmoDiagnostics};

const TAU: f64 = 1e-12;
const BOUND_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoSettings {
    pub tol: f64,
    /// Iteration cap is `max_passes × n`.
    pub max_passes: usize,
    /// Keep the dual objective after every iteration.
    #[serde(default)]
    pub record_objective: bool,
}

impl Default for SmoSettings {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_passes: 1000,
            record_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function offset: `f(x) = Σ αᵢyᵢK(xᵢ,x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub kkt_gap: f64,
    /// Dual objective `eᵀα − ½αᵀQα` at the solution.
    pub dual_objective: f64,
    /// Dual objective before the first and after every iteration, when recorded.
    pub objective_trace: Vec<f64>,
}

struct State<'a> {
    k: &'a KernelMatrix,
    y: &'a [f64],
    upper: &'a [f64],
    alpha: Vec<f64>,
    grad: Vec<f64>,
}

impl State<'_> {
    #[inline]
    fn in_up(&self, t: usize) -> bool {
        (self.y[t] > 0.0 && self.alpha[t] < self.upper[t])
            || (self.y[t] < 0.0 && self.alpha[t] > 0.0)
    }

    #[inline]
    fn in_low(&self, t: usize) -> bool {
        (self.y[t] > 0.0 && self.alpha[t] > 0.0)
            || (self.y[t] < 0.0 && self.alpha[t] < self.upper[t])
    }

    /// Dual objective `eᵀα − ½αᵀQα = −½ Σ αᵢ(Gᵢ − 1)`.
    fn dual_objective(&self) -> f64 {
        -0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }

    /// Returns the working pair and the current gap `m − M`.
    fn select_pair(&self) -> (Option<(usize, usize)>, f64) {
        let n = self.y.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut i = None;
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.y[t] * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i = Some(t);
                }
            }
        }
        let Some(i) = i else {
            return (None, 0.0);
        };
        let kii = self.k.get(i, i);
        let ki = self.k.row(i);
        let mut j = None;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let yg = self.y[t] * self.grad[t];
            if yg > gmax2 {
                gmax2 = yg;
            }
            let b = gmax + yg;
            if b > 0.0 {
                let mut a = kii + self.k.get(t, t) - 2.0 * ki[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j = Some(t);
                }
            }
        }
        let gap = gmax + gmax2;
        (j.map(|j| (i, j)), gap)
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let (ci, cj) = (self.upper[i], self.upper[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let kij = self.k.get(i, j);
        let mut quad = self.k.get(i, i) + self.k.get(j, j) - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if self.y[i] != self.y[j] {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = snap(ai, ci);
        self.alpha[j] = snap(aj, cj);
        let (di, dj) = ((ai - old_i) * self.y[i], (aj - old_j) * self.y[j]);
        let (ki, kj) = (self.k.row(i), self.k.row(j));
        for t in 0..self.grad.len() {
            self.grad[t] += self.y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    /// Offset from free multipliers, or the midpoint of the feasible interval
    /// when every multiplier sits at a bound.
    fn bias(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..self.y.len() {
            let yg = self.y[t] * self.grad[t];
            let at_upper = self.alpha[t] >= self.upper[t];
            let at_lower = self.alpha[t] <= 0.0;
            if at_upper {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        let rho = if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        };
        -rho
    }
}

/// Rounds multipliers within `BOUND_EPS·c` of a bound onto it, so rounding
/// noise never makes a bounded multiplier look free.
fn snap(a: f64, c: f64) -> f64 {
    if a <= BOUND_EPS * c {
        0.0
    } else if a >= c * (1.0 - BOUND_EPS) {
        c
    } else {
        a
    }
}

/// Solves the dual on a precomputed Gram matrix.
///
/// `y` holds ±1 labels and `upper` the per-example box bounds `C·w(yᵢ)`.
pub fn solve(
    k: &KernelMatrix,
    y: &[f64],
    upper: &[f64],
    settings: &SmoSettings,
) -> Result<SmoSolution> {
    let n = y.len();
    if n == 0 {
        return Err(Error::Empty("SMO training set"));
    }
    if k.len() != n || upper.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: if k.len() != n { k.len() } else { upper.len() },
        });
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::SingleClass);
    }
    if upper.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::Config(
            "box bounds must be positive and finite".into(),
        ));
    }

    let mut st = State {
        k,
        y,
        upper,
        alpha: vec![0.0; n],
        grad: vec![-1.0; n],
    };
    let mut trace = Vec::new();
    if settings.record_objective {
        trace.push(0.0);
    }
    let max_iter = settings.max_passes.max(1).saturating_mul(n);
    let mut iterations = 0;
    loop {
        let (pair, gap) = st.select_pair();
        let Some((i, j)) = pair.filter(|_| gap >= settings.tol) else {
            break;
        };
        if iterations >= max_iter {
            return Err(Error::NonConvergence(SmoDiagnostics {
                iterations,
                kkt_gap: gap,
                dual_objective: st.dual_objective(),
            }));
        }
        st.update_pair(i, j);
        iterations += 1;
        if settings.record_objective {
            trace.push(st.dual_objective());
        }
    }
    let (_, gap) = st.select_pair();
    Ok(SmoSolution {
        bias: st.bias(),
        dual_objective: st.dual_objective(),
        kkt_gap: gap.max(0.0),
        iterations,
        objective_trace: trace,
        alpha: st.alpha,
    })
}

/// A KKT condition that fails by more than the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct KktViolation {
    pub index: usize,
    pub margin: f64,
    pub alpha: f64,
}

/// Checks `yᵢf(xᵢ)` against the complementary-slackness conditions:
/// `≥ 1−tol` at `αᵢ = 0`, `≤ 1+tol` at `αᵢ = Cᵢ`, and `|·−1| ≤ tol` in between.
pub fn check_kkt(
    k: &KernelMatrix,
    y: &[f64],
    upper: &[f64],
    alpha: &[f64],
    bias: f64,
    tol: f64,
) -> std::result::Result<(), KktViolation> {
    for i in 0..y.len() {
        let f: f64 = k
            .row(i)
            .iter()
            .zip(alpha.iter().zip(y))
            .map(|(kij, (a, yj))| a * yj * kij)
            .sum::<f64>()
            + bias;
        let m = y[i] * f;
        let ok = if alpha[i] <= 0.0 {
            m >= 1.0 - tol
        } else if alpha[i] >= upper[i] {
            m <= 1.0 + tol
        } else {
            (m - 1.0).abs() <= tol
        };
        if !ok {
            return Err(KktViolation {
                index: i,
                margin: m,
                alpha: alpha[i],
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::kernel::KernelSpec;
    use super::*;

    fn linear() -> KernelSpec {
        KernelSpec::Polynomial {
            degree: 1,
            gamma: 1.0,
            coef0: 0.0,
        }
    }

    #[test]
    fn two_point_max_margin() {
        let data = vec![vec![-1.0], vec![1.0]];
        let k = KernelMatrix::compute(&linear(), &data).unwrap();
        let sol = solve(&k, &[-1.0, 1.0], &[10.0, 10.0], &SmoSettings::default()).unwrap();
        // w = 1, b = 0 ⇒ α = ½ for both points.
        assert!((sol.alpha[0] - 0.5).abs() < 1e-12);
        assert!(sol.bias.abs() < 1e-12);
        assert!((sol.dual_objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let data = vec![vec![0.0], vec![1.0]];
        let k = KernelMatrix::compute(&linear(), &data).unwrap();
        assert!(matches!(
            solve(&k, &[1.0, 1.0], &[1.0, 1.0], &SmoSettings::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn iteration_cap_reports_diagnostics() {
        let data: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64).cos()])
            .collect();
        let y: Vec<f64> = (0..30)
            .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let k = KernelMatrix::compute(&KernelSpec::Rbf { gamma: 2.0 }, &data).unwrap();
        let settings = SmoSettings {
            tol: 1e-12,
            max_passes: 0,
            record_objective: false,
        };
        match solve(&k, &y, &vec![100.0; 30], &settings) {
            Err(Error::NonConvergence(d)) => {
                assert_eq!(d.iterations, 30);
                assert!(d.kkt_gap > 1e-12);
                assert!(d.dual_objective > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn conflicting_duplicate_hits_bound() {
        let data = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![2.0, 2.0],
            vec![-2.0, -2.0],
        ];
        let y = [1.0, -1.0, 1.0, -1.0];
        let k = KernelMatrix::compute(&linear(), &data).unwrap();
        let settings = SmoSettings {
            tol: 1e-10,
            ..Default::default()
        };
        let sol = solve(&k, &y, &[1.0; 4], &settings).unwrap();
        assert_eq!(sol.alpha[0], 1.0);
        assert_eq!(sol.alpha[1], 1.0);
        check_kkt(&k, &y, &[1.0; 4], &sol.alpha, sol.bias, 1e-6).unwrap();
    }
}
