//! Tabular episodic multi-objective MDPs.
//!
//! All tables are dense and steps are zero-based internally: step `h` in
//! `0..horizon` corresponds to step `h + 1` in the usual one-based notation.
//! A value function at step `h` therefore lies in `[0, horizon - h]`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{domain, shape, MorlError, Result};

/// Tolerance on probability rows summing to one.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance on occupancy-measure normalization and flow.
pub const OCCUPANCY_TOL: f64 = 1e-10;

/// Sizes shared by a model, its policies and its estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub states: usize,
    pub actions: usize,
    pub horizon: usize,
    pub objectives: usize,
}

impl Dims {
    /// Number of `(h, s, a)` cells.
    pub fn cells(&self) -> usize {
        self.horizon * self.states * self.actions
    }

    #[inline]
    pub fn sa(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.states + s) * self.actions + a
    }

    #[inline]
    pub fn sas(&self, h: usize, s: usize, a: usize, next: usize) -> usize {
        self.sa(h, s, a) * self.states + next
    }

    #[inline]
    pub fn isa(&self, i: usize, h: usize, s: usize, a: usize) -> usize {
        i * self.cells() + self.sa(h, s, a)
    }
}

/// Episodic MOMDP `(S, A, H, m, P, r)` with a fixed initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomdpDocument", into = "MomdpDocument")]
pub struct Momdp {
    dims: Dims,
    initial_state: usize,
    /// `P_h(s'|s,a)` indexed `(h, s, a, s')`.
    transition: Vec<f64>,
    /// `r_{i,h}(s,a)` indexed `(i, h, s, a)`.
    mean_reward: Vec<f64>,
}

impl Momdp {
    /// Builds a model from flat tables, validating every invariant.
    pub fn new(
        dims: Dims,
        initial_state: usize,
        transition: Vec<f64>,
        mean_reward: Vec<f64>,
    ) -> Result<Self> {
        if dims.states == 0 || dims.actions == 0 || dims.horizon == 0 || dims.objectives == 0 {
            return Err(shape("all dimensions must be positive"));
        }
        if initial_state >= dims.states {
            return Err(shape(format!(
                "initial state {initial_state} out of range for {} states",
                dims.states
            )));
        }
        if transition.len() != dims.cells() * dims.states {
            return Err(shape(format!(
                "transition table has {} entries, expected {}",
                transition.len(),
                dims.cells() * dims.states
            )));
        }
        if mean_reward.len() != dims.objectives * dims.cells() {
            return Err(shape(format!(
                "reward table has {} entries, expected {}",
                mean_reward.len(),
                dims.objectives * dims.cells()
            )));
        }
        for (cell, row) in transition.chunks(dims.states).enumerate() {
            let total: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > PROB_TOL {
                return Err(domain(format!(
                    "transition row {cell} is not a distribution (sum {total})"
                )));
            }
        }
        if let Some(bad) = mean_reward.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(domain(format!("mean reward {bad} outside [0, 1]")));
        }
        Ok(Self {
            dims,
            initial_state,
            transition,
            mean_reward,
        })
    }

    /// A multi-armed bandit: one state, one step, `rewards[i][a]` per objective.
    pub fn bandit(rewards: &[Vec<f64>]) -> Result<Self> {
        let objectives = rewards.len();
        let actions = rewards.first().map_or(0, Vec::len);
        if rewards.iter().any(|r| r.len() != actions) {
            return Err(shape("every objective needs one reward per arm"));
        }
        let dims = Dims {
            states: 1,
            actions,
            horizon: 1,
            objectives,
        };
        Self::new(
            dims,
            0,
            vec![1.0; actions],
            rewards.iter().flatten().copied().collect(),
        )
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn num_states(&self) -> usize {
        self.dims.states
    }

    pub fn num_actions(&self) -> usize {
        self.dims.actions
    }

    pub fn horizon(&self) -> usize {
        self.dims.horizon
    }

    pub fn num_objectives(&self) -> usize {
        self.dims.objectives
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    /// `P_h(·|s,a)`.
    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = self.dims.sas(h, s, a, 0);
        &self.transition[start..start + self.dims.states]
    }

    #[inline]
    pub fn reward(&self, i: usize, h: usize, s: usize, a: usize) -> f64 {
        self.mean_reward[self.dims.isa(i, h, s, a)]
    }

    /// Reward table of objective `i`, indexed `(h, s, a)`.
    pub fn reward_table(&self, i: usize) -> &[f64] {
        let n = self.dims.cells();
        &self.mean_reward[i * n..(i + 1) * n]
    }

    /// `Σ_{s'} P_h(s'|s,a) v(s')`.
    #[inline]
    pub fn expect_next(&self, h: usize, s: usize, a: usize, v: &[f64]) -> f64 {
        dot(self.transition_row(h, s, a), v)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// On-disk JSON layout of a [`Momdp`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomdpDocument {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub num_objectives: usize,
    pub initial_state: usize,
    /// `[h][s][a][s']`
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[i][h][s][a]`
    pub mean_reward: Vec<Vec<Vec<Vec<f64>>>>,
}

impl TryFrom<MomdpDocument> for Momdp {
    type Error = MorlError;

    fn try_from(doc: MomdpDocument) -> Result<Self> {
        let dims = Dims {
            states: doc.num_states,
            actions: doc.num_actions,
            horizon: doc.horizon,
            objectives: doc.num_objectives,
        };
        let transition = flatten4(&doc.transition, [dims.horizon, dims.states, dims.actions, dims.states], "transition")?;
        let mean_reward = flatten4(
            &doc.mean_reward,
            [dims.objectives, dims.horizon, dims.states, dims.actions],
            "mean_reward",
        )?;
        Momdp::new(dims, doc.initial_state, transition, mean_reward)
    }
}

impl From<Momdp> for MomdpDocument {
    fn from(m: Momdp) -> Self {
        let d = m.dims;
        MomdpDocument {
            num_states: d.states,
            num_actions: d.actions,
            horizon: d.horizon,
            num_objectives: d.objectives,
            initial_state: m.initial_state,
            transition: (0..d.horizon)
                .map(|h| {
                    (0..d.states)
                        .map(|s| (0..d.actions).map(|a| m.transition_row(h, s, a).to_vec()).collect())
                        .collect()
                })
                .collect(),
            mean_reward: (0..d.objectives)
                .map(|i| {
                    (0..d.horizon)
                        .map(|h| {
                            (0..d.states)
                                .map(|s| (0..d.actions).map(|a| m.reward(i, h, s, a)).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn flatten4(nested: &[Vec<Vec<Vec<f64>>>], dims: [usize; 4], name: &str) -> Result<Vec<f64>> {
    let mismatch = || shape(format!("{name} must have shape {dims:?}"));
    if nested.len() != dims[0] {
        return Err(mismatch());
    }
    let mut flat = Vec::with_capacity(dims.iter().product());
    for a in nested {
        if a.len() != dims[1] {
            return Err(mismatch());
        }
        for b in a {
            if b.len() != dims[2] {
                return Err(mismatch());
            }
            for c in b {
                if c.len() != dims[3] {
                    return Err(mismatch());
                }
                flat.extend_from_slice(c);
            }
        }
    }
    Ok(flat)
}

/// Stochastic Markov policy `π_h(a|s)`, indexed `(h, s, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    states: usize,
    actions: usize,
    horizon: usize,
    probs: Vec<f64>,
}

impl Policy {
    pub fn new(states: usize, actions: usize, horizon: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != states * actions * horizon {
            return Err(shape(format!(
                "policy table has {} entries, expected {}",
                probs.len(),
                states * actions * horizon
            )));
        }
        for (row_idx, row) in probs.chunks(actions).enumerate() {
            let total: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > PROB_TOL {
                return Err(domain(format!("policy row {row_idx} sums to {total}")));
            }
        }
        Ok(Self {
            states,
            actions,
            horizon,
            probs,
        })
    }

    pub fn uniform(dims: Dims) -> Self {
        let p = 1.0 / dims.actions as f64;
        Self {
            states: dims.states,
            actions: dims.actions,
            horizon: dims.horizon,
            probs: vec![p; dims.cells()],
        }
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let start = (h * self.states + s) * self.actions;
        &self.probs[start..start + self.actions]
    }

    #[inline]
    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.probs[(h * self.states + s) * self.actions + a]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Fails unless this policy has the state/action/horizon sizes of `momdp`.
    pub fn check_shape(&self, momdp: &Momdp) -> Result<()> {
        let d = momdp.dims();
        if (self.states, self.actions, self.horizon) != (d.states, d.actions, d.horizon) {
            return Err(shape(format!(
                "policy is {}x{}x{} (S x A x H) but model is {}x{}x{}",
                self.states, self.actions, self.horizon, d.states, d.actions, d.horizon
            )));
        }
        Ok(())
    }
}

/// Deterministic Markov policy `a_h(s)`, indexed `(h, s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicPolicy {
    states: usize,
    horizon: usize,
    actions: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(states: usize, horizon: usize, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != states * horizon {
            return Err(shape(format!(
                "deterministic policy has {} entries, expected {}",
                actions.len(),
                states * horizon
            )));
        }
        Ok(Self {
            states,
            horizon,
            actions,
        })
    }

    /// Decodes the `index`-th deterministic policy in mixed radix `|A|`,
    /// least significant digit at `(h = 0, s = 0)`.
    pub fn from_index(dims: Dims, mut index: u64) -> Self {
        let n = dims.states * dims.horizon;
        let base = dims.actions as u64;
        let mut actions = Vec::with_capacity(n);
        for _ in 0..n {
            actions.push((index % base) as usize);
            index /= base;
        }
        Self {
            states: dims.states,
            horizon: dims.horizon,
            actions,
        }
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.states + s]
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Actions as a nested `[h][s]` table.
    pub fn to_table(&self) -> Vec<Vec<usize>> {
        self.actions.chunks(self.states).map(<[usize]>::to_vec).collect()
    }

    pub fn check_shape(&self, momdp: &Momdp) -> Result<()> {
        let d = momdp.dims();
        if (self.states, self.horizon) != (d.states, d.horizon) {
            return Err(shape("deterministic policy does not match model size"));
        }
        if let Some(bad) = self.actions.iter().find(|&&a| a >= d.actions) {
            return Err(shape(format!("action {bad} out of range for {} actions", d.actions)));
        }
        Ok(())
    }

    pub fn to_policy(&self, num_actions: usize) -> Policy {
        let mut probs = vec![0.0; self.actions.len() * num_actions];
        for (row, &a) in self.actions.iter().enumerate() {
            probs[row * num_actions + a] = 1.0;
        }
        Policy {
            states: self.states,
            actions: num_actions,
            horizon: self.horizon,
            probs,
        }
    }
}

/// Uniform mixture over member policies: one member is drawn at the start
/// of an episode and followed throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct MixturePolicy {
    members: Vec<Policy>,
}

impl MixturePolicy {
    pub fn new(members: Vec<Policy>) -> Result<Self> {
        if members.is_empty() {
            return Err(domain("mixture needs at least one member"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Policy] {
        &self.members
    }

    /// Mean of the members' occupancy measures.
    pub fn occupancy(&self, momdp: &Momdp) -> Result<OccupancyMeasure> {
        let mut acc: Option<OccupancyMeasure> = None;
        for p in &self.members {
            let occ = occupancy_of_policy(momdp, p)?;
            match acc.as_mut() {
                None => acc = Some(occ),
                Some(total) => total.theta.iter_mut().zip(&occ.theta).for_each(|(t, o)| *t += o),
            }
        }
        let mut total = acc.expect("non-empty mixture");
        let n = self.members.len() as f64;
        total.theta.iter_mut().for_each(|t| *t /= n);
        Ok(total)
    }

    /// A single Markov policy with the same value, recovered from the mean occupancy.
    pub fn to_markov_policy(&self, momdp: &Momdp) -> Result<Policy> {
        policy_of_occupancy(&self.occupancy(momdp)?)
    }
}

/// The `m` objective values `V_{i,1}(s_1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(pub Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &ValueVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for ValueVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ValueVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// State-action visitation distribution `θ_h(s,a)`, indexed `(h, s, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyMeasure {
    dims: Dims,
    theta: Vec<f64>,
}

impl OccupancyMeasure {
    /// Validates non-negativity and per-step normalization.
    pub fn new(dims: Dims, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != dims.cells() {
            return Err(shape("occupancy table does not match dimensions"));
        }
        if theta.iter().any(|&t| !(t >= 0.0)) {
            return Err(domain("occupancy measure has negative entries"));
        }
        let per_step = dims.states * dims.actions;
        for (h, step) in theta.chunks(per_step).enumerate() {
            let total: f64 = step.iter().sum();
            if (total - 1.0).abs() > OCCUPANCY_TOL {
                return Err(domain(format!("occupancy at step {h} sums to {total}")));
            }
        }
        Ok(Self { dims, theta })
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize) -> f64 {
        self.theta[self.dims.sa(h, s, a)]
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Largest violation of `Σ_{s,a} θ_h(s,a) P_h(s'|s,a) = Σ_{a'} θ_{h+1}(s',a')`.
    pub fn flow_violation(&self, momdp: &Momdp) -> f64 {
        let d = self.dims;
        let mut worst: f64 = 0.0;
        for h in 0..d.horizon.saturating_sub(1) {
            for next in 0..d.states {
                let inflow: f64 = (0..d.states)
                    .flat_map(|s| (0..d.actions).map(move |a| (s, a)))
                    .map(|(s, a)| self.get(h, s, a) * momdp.transition_row(h, s, a)[next])
                    .sum();
                let mass: f64 = (0..d.actions).map(|a| self.get(h + 1, next, a)).sum();
                worst = worst.max((inflow - mass).abs());
            }
        }
        worst
    }

    /// `Σ_{h,s,a} θ_h(s,a) r_{i,h}(s,a)` for every objective.
    pub fn value(&self, momdp: &Momdp) -> ValueVector {
        (0..momdp.num_objectives())
            .map(|i| dot(&self.theta, momdp.reward_table(i)))
            .collect::<Vec<_>>()
            .into()
    }
}

/// One transition of an episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub next_state: usize,
    /// Observed reward for each objective, in `[0, 1]`.
    pub reward: Vec<f64>,
}

/// An `H`-step episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

/// How observed rewards relate to the stored means.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Bernoulli draws with the stored mean, independent per objective.
    #[default]
    Bernoulli,
    /// The mean itself is observed.
    NoiseFree,
}

/// Exact `V_{i,h}^π(s)` for every objective, step and state, indexed
/// `[i][h * S + s]`, with `h` running over `0..=H` (the last step is zero).
pub fn value_tables(momdp: &Momdp, policy: &Policy) -> Result<Vec<Vec<f64>>> {
    policy.check_shape(momdp)?;
    let d = momdp.dims();
    let mut tables = vec![vec![0.0; (d.horizon + 1) * d.states]; d.objectives];
    for h in (0..d.horizon).rev() {
        for s in 0..d.states {
            let row = policy.row(h, s);
            for (i, table) in tables.iter_mut().enumerate() {
                let (head, tail) = table.split_at_mut((h + 1) * d.states);
                let next = &tail[..d.states];
                head[h * d.states + s] = row
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(a, &p)| p * (momdp.reward(i, h, s, a) + momdp.expect_next(h, s, a, next)))
                    .sum();
            }
        }
    }
    Ok(tables)
}

/// Exact value vector `V_1^π(s_1)` by backward induction.
pub fn evaluate_policy(momdp: &Momdp, policy: &Policy) -> Result<ValueVector> {
    let tables = value_tables(momdp, policy)?;
    let s1 = momdp.initial_state();
    Ok(tables.iter().map(|t| t[s1]).collect::<Vec<_>>().into())
}

/// Exact value vector of a deterministic policy.
pub fn evaluate_deterministic(momdp: &Momdp, policy: &DeterministicPolicy) -> Result<ValueVector> {
    policy.check_shape(momdp)?;
    let d = momdp.dims();
    let mut next = vec![vec![0.0; d.states]; d.objectives];
    let mut current = next.clone();
    for h in (0..d.horizon).rev() {
        for s in 0..d.states {
            let a = policy.action(h, s);
            for i in 0..d.objectives {
                current[i][s] = momdp.reward(i, h, s, a) + momdp.expect_next(h, s, a, &next[i]);
            }
        }
        std::mem::swap(&mut next, &mut current);
    }
    let s1 = momdp.initial_state();
    Ok(next.iter().map(|v| v[s1]).collect::<Vec<_>>().into())
}

/// Occupancy measure induced by `policy` from the initial state.
pub fn occupancy_of_policy(momdp: &Momdp, policy: &Policy) -> Result<OccupancyMeasure> {
    policy.check_shape(momdp)?;
    let d = momdp.dims();
    let mut theta = vec![0.0; d.cells()];
    let s1 = momdp.initial_state();
    for a in 0..d.actions {
        theta[d.sa(0, s1, a)] = policy.prob(0, s1, a);
    }
    let mut state_mass = vec![0.0; d.states];
    for h in 0..d.horizon.saturating_sub(1) {
        state_mass.iter_mut().for_each(|m| *m = 0.0);
        for s in 0..d.states {
            for a in 0..d.actions {
                let w = theta[d.sa(h, s, a)];
                if w > 0.0 {
                    for (next, p) in momdp.transition_row(h, s, a).iter().enumerate() {
                        state_mass[next] += w * p;
                    }
                }
            }
        }
        for (next, &mass) in state_mass.iter().enumerate() {
            for a in 0..d.actions {
                theta[d.sa(h + 1, next, a)] = mass * policy.prob(h + 1, next, a);
            }
        }
    }
    Ok(OccupancyMeasure { dims: d, theta })
}

/// Recovers `π_h(a|s) = θ_h(s,a) / Σ_a θ_h(s,a)`. States never visited at a
/// step get the uniform distribution.
pub fn policy_of_occupancy(occ: &OccupancyMeasure) -> Result<Policy> {
    if occ.theta.iter().any(|&t| !(t >= 0.0)) {
        return Err(domain("occupancy measure has negative entries"));
    }
    let d = occ.dims;
    let uniform = 1.0 / d.actions as f64;
    let mut probs = Vec::with_capacity(d.cells());
    for row in occ.theta.chunks(d.actions) {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            probs.extend(row.iter().map(|t| t / total));
        } else {
            probs.extend(std::iter::repeat(uniform).take(d.actions));
        }
    }
    Ok(Policy {
        states: d.states,
        actions: d.actions,
        horizon: d.horizon,
        probs,
    })
}

/// Value of a uniform mixture: the mean of its members' values.
pub fn value_of_mixture(momdp: &Momdp, mix: &MixturePolicy) -> Result<ValueVector> {
    let m = momdp.num_objectives();
    let mut total = vec![0.0; m];
    for p in mix.members() {
        let v = evaluate_policy(momdp, p)?;
        total.iter_mut().zip(v.iter()).for_each(|(t, x)| *t += x);
    }
    let n = mix.members().len() as f64;
    Ok(total.into_iter().map(|t| t / n).collect::<Vec<_>>().into())
}

/// Draws an index from a probability row with a uniform variate `u ∈ [0,1)`.
#[inline]
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Rolls out one episode of `policy` from the initial state.
pub fn sample_episode<R: Rng + ?Sized>(
    momdp: &Momdp,
    policy: &Policy,
    rng: &mut R,
    noise: NoiseMode,
) -> Trajectory {
    let d = momdp.dims();
    let mut steps = Vec::with_capacity(d.horizon);
    let mut state = momdp.initial_state();
    for h in 0..d.horizon {
        let action = sample_index(policy.row(h, state), rng.random::<f64>());
        let reward = (0..d.objectives)
            .map(|i| {
                let mean = momdp.reward(i, h, state, action);
                match noise {
                    NoiseMode::NoiseFree => mean,
                    NoiseMode::Bernoulli => {
                        if rng.random::<f64>() < mean {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect();
        let next_state = sample_index(momdp.transition_row(h, state, action), rng.random::<f64>());
        steps.push(Step {
            state,
            action,
            next_state,
            reward,
        });
        state = next_state;
    }
    Trajectory { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn det(m: &Momdp, actions: Vec<usize>) -> Policy {
        DeterministicPolicy::new(m.num_states(), m.horizon(), actions)
            .unwrap()
            .to_policy(m.num_actions())
    }

    /// Two states, two actions, H = 3. Action 0 stays, action 1 switches.
    fn chain() -> Momdp {
        let dims = Dims {
            states: 2,
            actions: 2,
            horizon: 3,
            objectives: 1,
        };
        let mut p = vec![0.0; dims.cells() * 2];
        for h in 0..3 {
            for s in 0..2 {
                p[dims.sas(h, s, 0, s)] = 1.0;
                p[dims.sas(h, s, 1, 1 - s)] = 1.0;
            }
        }
        let r = (0..dims.cells()).map(|c| (c % 3) as f64 / 2.0).collect();
        Momdp::new(dims, 0, p, r).unwrap()
    }

    #[test]
    fn zero_reward_values_are_zero() {
        let m = envs::random_momdp(3, 2, 3, 2, 5);
        let dims = m.dims();
        let zero = Momdp::new(dims, 0, m.transition.clone(), vec![0.0; 2 * dims.cells()]).unwrap();
        let v = evaluate_policy(&zero, &Policy::uniform(dims)).unwrap();
        assert_eq!(v.0, vec![0.0, 0.0]);
    }

    #[test]
    fn example_bandit_values() {
        let m = envs::example_3_1();
        assert_eq!(evaluate_policy(&m, &det(&m, vec![3])).unwrap().0, vec![0.8, 0.7]);
        let f = envs::figure_1();
        let v = evaluate_policy(&f, &Policy::uniform(f.dims())).unwrap();
        assert!(v.max_abs_diff(&vec![0.5, 0.5].into()) < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m = envs::figure_1();
        let other = Policy::uniform(envs::example_3_1().dims());
        assert!(matches!(evaluate_policy(&m, &other), Err(MorlError::Shape(_))));
    }

    #[test]
    fn bandit_occupancy_is_policy() {
        let m = envs::example_3_1();
        let p = Policy::new(1, 5, 1, vec![0.1, 0.2, 0.3, 0.25, 0.15]).unwrap();
        let occ = occupancy_of_policy(&m, &p).unwrap();
        assert_eq!(occ.theta(), p.probs());
    }

    #[test]
    fn deterministic_chain_occupancy_is_indicator_path() {
        let m = chain();
        // switch, stay, switch: 0 -> 1 -> 1 -> 0
        let mut actions = vec![0; 6];
        actions[0] = 1; // h0 s0
        actions[3] = 0; // h1 s1
        actions[5] = 1; // h2 s1
        let p = det(&m, actions);
        let occ = occupancy_of_policy(&m, &p).unwrap();
        let mut expected = vec![0.0; 12];
        let d = m.dims();
        expected[d.sa(0, 0, 1)] = 1.0;
        expected[d.sa(1, 1, 0)] = 1.0;
        expected[d.sa(2, 1, 1)] = 1.0;
        assert_eq!(occ.theta(), &expected[..]);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for seed in 0..5u64 {
            let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
            let a = sample_episode(&m, &p, &mut rng, NoiseMode::Bernoulli);
            let b = sample_episode(&m, &p, &mut rng2, NoiseMode::Bernoulli);
            let states = |t: &Trajectory| t.steps.iter().map(|s| (s.state, s.next_state)).collect::<Vec<_>>();
            assert_eq!(states(&a), vec![(0, 1), (1, 1), (1, 0)]);
            assert_eq!(states(&a), states(&b));
        }
    }

    #[test]
    fn one_hot_occupancy_recovers_deterministic_action() {
        let d = envs::example_3_1().dims();
        let occ = OccupancyMeasure::new(d, vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = policy_of_occupancy(&occ).unwrap();
        assert_eq!(p.probs(), &[0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn unreachable_rows_become_uniform() {
        let m = chain();
        let p = det(&m, vec![0; 6]); // always stay in state 0
        let occ = occupancy_of_policy(&m, &p).unwrap();
        let back = policy_of_occupancy(&occ).unwrap();
        assert_eq!(back.row(1, 1), &[0.5, 0.5]);
        assert_eq!(back.row(1, 0), &[1.0, 0.0]);
    }

    #[test]
    fn negative_occupancy_is_a_domain_error() {
        let d = envs::figure_1().dims();
        let occ = OccupancyMeasure {
            dims: d,
            theta: vec![1.5, -0.5],
        };
        assert!(matches!(policy_of_occupancy(&occ), Err(MorlError::Domain(_))));
    }

    #[test]
    fn mixture_values() {
        let f = envs::figure_1();
        let a1 = det(&f, vec![0]);
        let a2 = det(&f, vec![1]);
        let mix = MixturePolicy::new(vec![a1.clone(), a2]).unwrap();
        let v = value_of_mixture(&f, &mix).unwrap();
        assert!(v.max_abs_diff(&vec![0.5, 0.5].into()) < 1e-15);

        let single = MixturePolicy::new(vec![a1.clone()]).unwrap();
        assert_eq!(value_of_mixture(&f, &single).unwrap(), evaluate_policy(&f, &a1).unwrap());
        let copies = MixturePolicy::new(vec![a1.clone(); 7]).unwrap();
        assert!(value_of_mixture(&f, &copies)
            .unwrap()
            .max_abs_diff(&evaluate_policy(&f, &a1).unwrap())
            < 1e-15);
        assert!(matches!(MixturePolicy::new(vec![]), Err(MorlError::Domain(_))));
    }

    #[test]
    fn noise_free_sampling_returns_means() {
        let m = envs::random_momdp(4, 3, 3, 2, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = sample_episode(&m, &Policy::uniform(m.dims()), &mut rng, NoiseMode::NoiseFree);
        for (h, step) in t.steps.iter().enumerate() {
            for i in 0..2 {
                assert_eq!(step.reward[i], m.reward(i, h, step.state, step.action));
            }
        }
    }

    #[test]
    fn bernoulli_rewards_match_means_on_average() {
        let m = envs::figure_1();
        let p = det(&m, vec![0]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut sums = [0.0; 2];
        for _ in 0..n {
            let t = sample_episode(&m, &p, &mut rng, NoiseMode::Bernoulli);
            sums[0] += t.steps[0].reward[0];
            sums[1] += t.steps[0].reward[1];
        }
        assert!((sums[0] / n as f64 - 0.2).abs() < 0.01);
        assert!((sums[1] / n as f64 - 0.8).abs() < 0.01);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = envs::random_momdp(3, 2, 2, 2, 1);
        let text = serde_json::to_string(&m).unwrap();
        let back: Momdp = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);

        let bad = text.replacen("\"initial_state\":0", "\"initial_state\":9", 1);
        assert!(serde_json::from_str::<Momdp>(&bad).is_err());
    }
}
