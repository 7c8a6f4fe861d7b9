//! Tabular ε-soft SARSA against a simulated respondent.
//!
//! The respondent is stateless, so with `gamma = 0` every intervention is a
//! one-step terminal episode and the update target is the reward alone. The
//! 100-step "episode" only groups rewards for reporting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::argmax;
use crate::error::{Error, Result};
use crate::human_sim::{
    sample_cell, DemographicCell, Effect, EffectTable, HumanModelSpec, N_CELLS,
};

const POLICY_STREAM: u64 = 0;
const RESPONSE_STREAM: u64 = 1;
const CELL_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealingSchedule {
    pub eps0: f64,
    pub eps_decay: f64,
    pub alpha0: f64,
    pub alpha_decay: f64,
    /// Caps the step size at 1.
    pub clamp_alpha: bool,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self {
            eps0: 0.4,
            eps_decay: 1e-5,
            alpha0: 10.0,
            alpha_decay: 1e-2,
            clamp_alpha: true,
        }
    }
}

impl AnnealingSchedule {
    pub fn literal() -> Self {
        Self {
            clamp_alpha: false,
            ..Self::default()
        }
    }

    /// `eps0 / (1 + eps_decay·t)`
    pub fn epsilon(&self, t: u64) -> f64 {
        self.eps0 / (1.0 + self.eps_decay * t as f64)
    }

    /// `alpha0 / (1 + alpha_decay·t)`, capped at 1 when clamping.
    pub fn alpha(&self, t: u64) -> f64 {
        let a = self.alpha0 / (1.0 + self.alpha_decay * t as f64);
        if self.clamp_alpha {
            a.min(1.0)
        } else {
            a
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.eps0 > 0.0
            && self.eps0 <= 1.0
            && self.eps_decay >= 0.0
            && self.alpha0 > 0.0
            && self.alpha_decay >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid annealing schedule {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub n_states: usize,
    pub n_actions: usize,
    /// Row-major `[state][action]`.
    pub values: Vec<f64>,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize, init: f64) -> Self {
        Self {
            n_states,
            n_actions,
            values: vec![init; n_states * n_actions],
        }
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn greedy(&self, state: usize) -> usize {
        argmax(self.row(state))
    }

    pub fn greedy_policy(&self) -> Vec<usize> {
        (0..self.n_states).map(|s| self.greedy(s)).collect()
    }
}

/// With probability `eps` a uniform action, otherwise the greedy one.
pub fn select_action(q: &QTable, state: usize, eps: f64, rng: &mut impl Rng) -> usize {
    if eps > 0.0 && rng.random::<f64>() < eps {
        rng.random_range(0..q.n_actions)
    } else {
        q.greedy(state)
    }
}

/// `Q(s,a) += α·(r + γ·Q(s',a') − Q(s,a))`. A `None` successor is terminal.
pub fn sarsa_step(
    q: &mut QTable,
    state: usize,
    action: usize,
    reward: f64,
    next: Option<(usize, usize)>,
    alpha: f64,
    gamma: f64,
) {
    let bootstrap = next.map_or(0.0, |(s, a)| gamma * q.get(s, a));
    let i = state * q.n_actions + action;
    q.values[i] += alpha * (reward + bootstrap - q.values[i]);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub episode_length: usize,
    pub mean: Vec<f64>,
    /// Population standard deviation of the rewards within each episode.
    pub std: Vec<f64>,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Mean of the per-episode means over the last `n` episodes.
    pub fn tail_mean(&self, n: usize) -> f64 {
        let n = n.clamp(1, self.len());
        self.mean[self.len() - n..].iter().sum::<f64>() / n as f64
    }

    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["episode", "mean", "std"])?;
        for (e, (m, s)) in self.mean.iter().zip(&self.std).enumerate() {
            w.write_record([e.to_string(), m.to_string(), s.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<curve>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlExperimentConfig {
    pub human: HumanModelSpec,
    /// Whether the agent conditions on the respondent's cell.
    pub demographic_aware: bool,
    pub episodes: usize,
    pub episode_length: usize,
    pub seed: u64,
    pub schedule: AnnealingSchedule,
    pub q_init: f64,
    /// Zero makes every step terminal.
    pub gamma: f64,
    pub record_steps: bool,
}

impl Default for RlExperimentConfig {
    fn default() -> Self {
        Self {
            human: HumanModelSpec::new(
                "deterministic",
                EffectTable::new(vec![vec![Effect {
                    mean: 0.0,
                    variance: 0.0,
                }]])
                .expect("one row"),
            ),
            demographic_aware: false,
            episodes: 2000,
            episode_length: 100,
            seed: 0,
            schedule: AnnealingSchedule::default(),
            q_init: 0.0,
            gamma: 0.0,
            record_steps: false,
        }
    }
}

impl RlExperimentConfig {
    pub fn new(human: HumanModelSpec, demographic_aware: bool, seed: u64) -> Self {
        Self {
            human,
            demographic_aware,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.episode_length == 0 {
            return Err(Error::Config(
                "episodes and episode_length must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma {} outside [0, 1]",
                self.gamma
            )));
        }
        if !self.q_init.is_finite() {
            return Err(Error::Config("q_init must be finite".into()));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub cell: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlRun {
    pub q: QTable,
    pub curve: LearningCurve,
    pub steps: Vec<StepRecord>,
}

/// Runs `episodes × episode_length` learning steps. Exploration, responses
/// and cell draws use separate streams of the seed so paired runs that differ
/// only in the respondent model see the same cells.
pub fn run_experiment(config: &RlExperimentConfig) -> Result<RlRun> {
    config.validate()?;
    let human = config.human.build()?;
    let n_actions = human.table().n_interventions();
    let n_states = if config.demographic_aware { N_CELLS } else { 1 };
    let sample_cells = config.demographic_aware || config.human.demographic_aware();
    let terminal = config.gamma == 0.0;

    let stream = |s| {
        let mut r = ChaCha8Rng::seed_from_u64(config.seed);
        r.set_stream(s);
        r
    };
    let mut policy_rng = stream(POLICY_STREAM);
    let mut response_rng = stream(RESPONSE_STREAM);
    let mut cell_rng = stream(CELL_STREAM);
    let draw_cell = |rng: &mut ChaCha8Rng| {
        if sample_cells {
            sample_cell(rng)
        } else {
            DemographicCell::from_index(0)
        }
    };
    let state_of = |c: DemographicCell| {
        if config.demographic_aware {
            c.index()
        } else {
            0
        }
    };

    let mut q = QTable::new(n_states, n_actions, config.q_init);
    let mut curve = LearningCurve {
        episode_length: config.episode_length,
        mean: Vec::with_capacity(config.episodes),
        std: Vec::with_capacity(config.episodes),
    };
    let mut steps = Vec::new();
    let mut rewards = vec![0.0; config.episode_length];
    let mut t: u64 = 0;

    let mut cell = draw_cell(&mut cell_rng);
    let mut action = select_action(
        &q,
        state_of(cell),
        config.schedule.epsilon(t),
        &mut policy_rng,
    );
    for _ in 0..config.episodes {
        for slot in rewards.iter_mut() {
            let state = state_of(cell);
            let eps = config.schedule.epsilon(t);
            let alpha = config.schedule.alpha(t);
            let reward = human.respond(cell, action, &mut response_rng)?;
            *slot = reward;
            if config.record_steps {
                steps.push(StepRecord {
                    t,
                    cell: cell.index(),
                    state,
                    action,
                    reward,
                    epsilon: eps,
                    alpha,
                });
            }
            let next_cell = draw_cell(&mut cell_rng);
            let next_state = state_of(next_cell);
            if terminal {
                sarsa_step(&mut q, state, action, reward, None, alpha, 0.0);
                t += 1;
                action = select_action(&q, next_state, config.schedule.epsilon(t), &mut policy_rng);
            } else {
                let next_action = select_action(
                    &q,
                    next_state,
                    config.schedule.epsilon(t + 1),
                    &mut policy_rng,
                );
                sarsa_step(
                    &mut q,
                    state,
                    action,
                    reward,
                    Some((next_state, next_action)),
                    alpha,
                    config.gamma,
                );
                t += 1;
                action = next_action;
            }
            cell = next_cell;
        }
        let n = rewards.len() as f64;
        let mean = rewards.iter().sum::<f64>() / n;
        let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        curve.mean.push(mean);
        curve.std.push(var.sqrt());
    }
    Ok(RlRun { q, curve, steps })
}
