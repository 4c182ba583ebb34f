//! Online Tchebycheff and smooth Tchebycheff learners, preference-free
//! exploration and the two planning stages.
//!
//! Every learner takes the true model. Online learners and exploration draw
//! episodes from it; all learners also evaluate each round's policy exactly
//! to fill the traces in [`RunResult`]. The learned policies never see
//! those exact values.

mod config;
mod explore;
mod online;
mod planning;
mod weights;

use serde::{Deserialize, Serialize};

pub use config::{AlphaSchedule, EtaSchedule, ExplorationDataset, RunConfig};
pub use explore::{run_exploration, run_exploration_traced, ExplorationRun};
pub use online::{run_stchrl, run_tchrl};
pub use planning::{run_planning_stch, run_planning_tch};
pub use weights::{mirror_step_stch, mirror_step_tch, WeightVector};

use crate::error::Result;
use crate::estimation::EstimatedModel;
use crate::momdp::{evaluate_deterministic, DeterministicPolicy, MixturePolicy, Momdp, ValueVector};
use crate::oracle::exact_best_values;
use crate::scalarization::{stch, tch, Preference, ScalarizationContext};

/// Per-round output of a learner. All traces have one entry per round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub per_round_policies: Vec<DeterministicPolicy>,
    /// Exact value of the uniform mixture of the first `t` policies.
    pub mixture_value_trace: Vec<ValueVector>,
    pub weight_trace: Vec<WeightVector>,
    /// Tchebycheff (or smooth Tchebycheff) value of the running mixture,
    /// measured against the exact per-objective optima.
    pub objective_trace: Vec<f64>,
    /// Optimistic per-objective optimum estimates `Ṽ_{i,1}(s_1)` used by the
    /// weight update of the following round.
    pub optimistic_value_trace: Vec<ValueVector>,
    pub episodes_sampled: u64,
}

impl RunResult {
    pub fn rounds(&self) -> usize {
        self.per_round_policies.len()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }

    pub fn final_mixture_value(&self) -> Option<&ValueVector> {
        self.mixture_value_trace.last()
    }

    /// The learned output: a uniform mixture of the per-round policies.
    pub fn mixture(&self, num_actions: usize) -> Result<MixturePolicy> {
        MixturePolicy::new(
            self.per_round_policies
                .iter()
                .map(|p| p.to_policy(num_actions))
                .collect(),
        )
    }
}

/// Index of the largest score, ties going to the lowest index.
fn argmax(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut top = f64::NEG_INFINITY;
    for (a, x) in scores.into_iter().enumerate() {
        if x > top {
            top = x;
            best = a;
        }
    }
    best
}

/// Optimistic backward induction for objective `i`, greedy at every step.
/// Returns the policy and `V_1(s_1)`.
fn greedy_single(model: &EstimatedModel, i: usize, initial_state: usize) -> (DeterministicPolicy, f64) {
    let d = model.dims();
    let mut actions = vec![0; d.horizon * d.states];
    let mut v_next = vec![0.0; d.states];
    let mut q = vec![0.0; d.states * d.actions];
    for h in (0..d.horizon).rev() {
        model.opt_q_into(i, h, &v_next, &mut q);
        for s in 0..d.states {
            let row = &q[s * d.actions..(s + 1) * d.actions];
            let a = argmax(row.iter().copied());
            actions[h * d.states + s] = a;
            v_next[s] = row[a];
        }
    }
    let policy = DeterministicPolicy::new(d.states, d.horizon, actions).expect("sized by model");
    (policy, v_next[initial_state])
}

/// Optimistic backward induction on every objective, greedy on
/// `Σ_i coeffs_i Q_i`. Returns the policy and `V_{i,1}(s_1)` per objective.
fn greedy_weighted(model: &EstimatedModel, coeffs: &[f64], initial_state: usize) -> (DeterministicPolicy, ValueVector) {
    let d = model.dims();
    let m = d.objectives;
    let mut actions = vec![0; d.horizon * d.states];
    let mut v_next = vec![vec![0.0; d.states]; m];
    let mut q = vec![vec![0.0; d.states * d.actions]; m];
    for h in (0..d.horizon).rev() {
        for i in 0..m {
            model.opt_q_into(i, h, &v_next[i], &mut q[i]);
        }
        for s in 0..d.states {
            let a = argmax((0..d.actions).map(|a| (0..m).map(|i| coeffs[i] * q[i][s * d.actions + a]).sum::<f64>()));
            actions[h * d.states + s] = a;
            for i in 0..m {
                v_next[i][s] = q[i][s * d.actions + a];
            }
        }
    }
    let policy = DeterministicPolicy::new(d.states, d.horizon, actions).expect("sized by model");
    let values = v_next.iter().map(|v| v[initial_state]).collect::<Vec<_>>();
    (policy, values.into())
}

/// Accumulates exact evaluation traces round by round.
struct Tracer<'a> {
    momdp: &'a Momdp,
    pref: Preference,
    ctx: ScalarizationContext,
    sum: Vec<f64>,
    result: RunResult,
}

impl<'a> Tracer<'a> {
    fn new(momdp: &'a Momdp, pref: &Preference, iota: f64, mu: Option<f64>, rounds: u64) -> Result<Self> {
        let ctx = ScalarizationContext::new(exact_best_values(momdp), iota, mu)?;
        let n = rounds as usize;
        Ok(Self {
            momdp,
            pref: pref.clone(),
            ctx,
            sum: vec![0.0; momdp.num_objectives()],
            result: RunResult {
                per_round_policies: Vec::with_capacity(n),
                mixture_value_trace: Vec::with_capacity(n),
                weight_trace: Vec::with_capacity(n),
                objective_trace: Vec::with_capacity(n),
                optimistic_value_trace: Vec::with_capacity(n),
                episodes_sampled: 0,
            },
        })
    }

    fn record(&mut self, policy: DeterministicPolicy, w: WeightVector, optimistic: ValueVector) -> Result<()> {
        let value = evaluate_deterministic(self.momdp, &policy)?;
        for (acc, x) in self.sum.iter_mut().zip(value.iter()) {
            *acc += x;
        }
        let t = (self.result.per_round_policies.len() + 1) as f64;
        let mixture: ValueVector = self.sum.iter().map(|x| x / t).collect::<Vec<_>>().into();
        let objective = match self.ctx.mu() {
            Some(_) => stch(&self.pref, &self.ctx, &mixture)?,
            None => tch(&self.pref, &self.ctx, &mixture)?,
        };
        self.result.per_round_policies.push(policy);
        self.result.mixture_value_trace.push(mixture);
        self.result.weight_trace.push(w);
        self.result.objective_trace.push(objective);
        self.result.optimistic_value_trace.push(optimistic);
        Ok(())
    }

    fn finish(mut self, episodes_sampled: u64) -> RunResult {
        self.result.episodes_sampled = episodes_sampled;
        self.result
    }
}

/// The gap `Ṽ_i + ι − V_i` fed to the weight update.
fn update_gap(optimistic: &[f64], main: &[f64], iota: f64) -> Vec<f64> {
    optimistic.iter().zip(main).map(|(a, b)| a + iota - b).collect()
}

/// `w_i λ_i`, the per-objective coefficients of the main greedy step.
fn coefficients(w: &WeightVector, pref: &Preference) -> Vec<f64> {
    w.iter().zip(pref.lambda()).map(|(a, b)| a * b).collect()
}
