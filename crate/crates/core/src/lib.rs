//! Barrier prediction and intervention learning for BEV-adoption surveys.
//!
//! The crate covers two pipelines over (synthetic) survey data:
//!
//! * ranking a respondent's likely adoption barriers from their demographic
//!   answers, with a one-vs-rest kernel SVM ([`svm`]) or a small MLP
//!   ([`mlp`]), evaluated by cross-validated precision–recall ([`eval`]) and
//!   turned into an intervention presentation order ([`select`]);
//! * learning which intervention to present with an ε-soft SARSA agent
//!   ([`rl`]) trained against simulated respondents ([`human_sim`]).
//!
//! [`experiment`] wires both into reproducible, file-producing commands.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod human_sim;
pub mod mlp;
pub mod models;
pub mod rl;
pub mod select;
pub mod survey_data;
pub mod svm;

pub use error::{Error, Result};

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Indices ordered by value descending, ties by index ascending.
pub fn rank_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}
