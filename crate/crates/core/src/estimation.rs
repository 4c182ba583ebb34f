//! Empirical models with Hoeffding-style bonuses, and optimistic Q-functions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Result};
use crate::momdp::{dot, Dims, Momdp, Trajectory};

/// Visit counts and reward sums collected from trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    dims: Dims,
    episodes: u64,
    /// `N_h(s,a)`, indexed `(h, s, a)`.
    n_sa: Vec<u64>,
    /// `N_h(s,a,s')`, indexed `(h, s, a, s')`.
    n_sas: Vec<u64>,
    /// Summed observed rewards, indexed `(i, h, s, a)`.
    reward_sum: Vec<f64>,
}

impl Counts {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            episodes: 0,
            n_sa: vec![0; dims.cells()],
            n_sas: vec![0; dims.cells() * dims.states],
            reward_sum: vec![0.0; dims.objectives * dims.cells()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Number of trajectories recorded.
    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    #[inline]
    pub fn visits(&self, h: usize, s: usize, a: usize) -> u64 {
        self.n_sa[self.dims.sa(h, s, a)]
    }

    #[inline]
    pub fn transitions(&self, h: usize, s: usize, a: usize, next: usize) -> u64 {
        self.n_sas[self.dims.sas(h, s, a, next)]
    }

    #[inline]
    pub fn reward_sum(&self, i: usize, h: usize, s: usize, a: usize) -> f64 {
        self.reward_sum[self.dims.isa(i, h, s, a)]
    }

    /// Adds one trajectory.
    pub fn record(&mut self, traj: &Trajectory) {
        let d = self.dims;
        debug_assert_eq!(traj.steps.len(), d.horizon);
        for (h, step) in traj.steps.iter().enumerate() {
            self.n_sa[d.sa(h, step.state, step.action)] += 1;
            self.n_sas[d.sas(h, step.state, step.action, step.next_state)] += 1;
            for (i, r) in step.reward.iter().enumerate() {
                self.reward_sum[d.isa(i, h, step.state, step.action)] += r;
            }
        }
        self.episodes += 1;
    }

    /// Checks table sizes and the count identities; used after deserializing.
    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        if self.n_sa.len() != d.cells()
            || self.n_sas.len() != d.cells() * d.states
            || self.reward_sum.len() != d.objectives * d.cells()
        {
            return Err(shape("count tables do not match their dimensions"));
        }
        for (cell, &n) in self.n_sa.iter().enumerate() {
            let row: u64 = self.n_sas[cell * d.states..(cell + 1) * d.states].iter().sum();
            if row != n {
                return Err(domain(format!("cell {cell}: {n} visits but {row} transitions")));
            }
            for i in 0..d.objectives {
                let sum = self.reward_sum[i * d.cells() + cell];
                if !(sum >= 0.0 && sum <= n as f64) {
                    return Err(domain(format!("cell {cell}: reward sum {sum} outside [0, {n}]")));
                }
            }
        }
        for h in 0..d.horizon {
            let per_step: u64 = self.n_sa[h * d.states * d.actions..(h + 1) * d.states * d.actions]
                .iter()
                .sum();
            if per_step != self.episodes {
                return Err(domain(format!(
                    "step {h} has {per_step} visits for {} episodes",
                    self.episodes
                )));
            }
        }
        Ok(())
    }
}

/// Functional form of [`Counts::record`].
pub fn update_counts(mut counts: Counts, traj: &Trajectory) -> Counts {
    counts.record(traj);
    counts
}

/// Empirical rewards and transitions with their confidence bonuses.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatedModel {
    dims: Dims,
    /// Indexed `(i, h, s, a)`.
    r_hat: Vec<f64>,
    /// Indexed `(h, s, a, s')`; unvisited rows are all zero.
    p_hat: Vec<f64>,
    /// Reward bonus `Ψ`, indexed `(i, h, s, a)`.
    psi: Vec<f64>,
    /// Transition bonus `Φ`, indexed `(h, s, a)`.
    phi: Vec<f64>,
    log_term: f64,
}

/// `log(8 m |S| |A| H T / δ)`.
pub fn confidence_log_term(dims: Dims, total_rounds: u64, delta: f64) -> f64 {
    (8.0 * dims.objectives as f64
        * dims.states as f64
        * dims.actions as f64
        * dims.horizon as f64
        * total_rounds as f64
        / delta)
        .ln()
}

/// Estimates with `N ∨ 1` denominators and bonuses
/// `Ψ = sqrt(2L/(N∨1)) ∧ 1`, `Φ = sqrt(2H²|S|L/(N∨1)) ∧ H`.
pub fn build_model(counts: &Counts, delta: f64, total_rounds: u64) -> Result<EstimatedModel> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if total_rounds == 0 {
        return Err(domain("total rounds must be at least 1"));
    }
    let d = counts.dims;
    let log_term = confidence_log_term(d, total_rounds, delta);
    let horizon = d.horizon as f64;
    let mut p_hat = vec![0.0; d.cells() * d.states];
    let mut phi = vec![0.0; d.cells()];
    let mut reward_bonus = vec![0.0; d.cells()];
    for cell in 0..d.cells() {
        let n = counts.n_sa[cell].max(1) as f64;
        for next in 0..d.states {
            let k = cell * d.states + next;
            p_hat[k] = counts.n_sas[k] as f64 / n;
        }
        reward_bonus[cell] = (2.0 * log_term / n).sqrt().min(1.0);
        phi[cell] = (2.0 * horizon * horizon * d.states as f64 * log_term / n)
            .sqrt()
            .min(horizon);
    }
    let mut r_hat = vec![0.0; d.objectives * d.cells()];
    let mut psi = vec![0.0; d.objectives * d.cells()];
    for i in 0..d.objectives {
        for cell in 0..d.cells() {
            let k = i * d.cells() + cell;
            r_hat[k] = counts.reward_sum[k] / counts.n_sa[cell].max(1) as f64;
            psi[k] = reward_bonus[cell];
        }
    }
    Ok(EstimatedModel {
        dims: d,
        r_hat,
        p_hat,
        psi,
        phi,
        log_term,
    })
}

/// Which uncertainty signal drives preference-free exploration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplorationOption {
    /// `max{Φ/H, Ψ_1, …, Ψ_m}`
    #[default]
    I,
    /// `Φ/H + Σ_i Ψ_i`
    II,
}

impl EstimatedModel {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn log_term(&self) -> f64 {
        self.log_term
    }

    #[inline]
    pub fn r_hat(&self, i: usize, h: usize, s: usize, a: usize) -> f64 {
        self.r_hat[self.dims.isa(i, h, s, a)]
    }

    #[inline]
    pub fn p_hat_row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = self.dims.sas(h, s, a, 0);
        &self.p_hat[start..start + self.dims.states]
    }

    #[inline]
    pub fn psi(&self, i: usize, h: usize, s: usize, a: usize) -> f64 {
        self.psi[self.dims.isa(i, h, s, a)]
    }

    #[inline]
    pub fn phi(&self, h: usize, s: usize, a: usize) -> f64 {
        self.phi[self.dims.sa(h, s, a)]
    }

    /// Writes the clipped optimistic backup for objective `i` at step `h`
    /// into `out`, indexed `(s, a)`.
    pub(crate) fn opt_q_into(&self, i: usize, h: usize, v_next: &[f64], out: &mut [f64]) {
        let d = self.dims;
        let ceiling = (d.horizon - h) as f64;
        for s in 0..d.states {
            for a in 0..d.actions {
                let q = self.r_hat(i, h, s, a)
                    + dot(self.p_hat_row(h, s, a), v_next)
                    + self.phi(h, s, a)
                    + self.psi(i, h, s, a);
                out[s * d.actions + a] = q.clamp(0.0, ceiling);
            }
        }
    }

    /// Exploration reward table indexed `(h, s, a)`.
    pub fn exploration_reward(&self, option: ExplorationOption) -> Vec<f64> {
        let d = self.dims;
        let horizon = d.horizon as f64;
        (0..d.cells())
            .map(|cell| {
                let base = self.phi[cell] / horizon;
                let psis = (0..d.objectives).map(|i| self.psi[i * d.cells() + cell]);
                match option {
                    ExplorationOption::I => psis.fold(base, f64::max),
                    ExplorationOption::II => base + psis.sum::<f64>(),
                }
            })
            .collect()
    }

    /// Whether `|r̂ − r| ≤ Ψ` everywhere and `|P̂v − Pv| ≤ Φ` everywhere for
    /// every probe `v` (each a function of the next state).
    pub fn concentration_holds(&self, momdp: &Momdp, probes: &[Vec<f64>]) -> bool {
        let d = self.dims;
        for h in 0..d.horizon {
            for s in 0..d.states {
                for a in 0..d.actions {
                    for i in 0..d.objectives {
                        if (self.r_hat(i, h, s, a) - momdp.reward(i, h, s, a)).abs() > self.psi(i, h, s, a) {
                            return false;
                        }
                    }
                    for v in probes {
                        let est = dot(self.p_hat_row(h, s, a), v);
                        if (est - momdp.expect_next(h, s, a, v)).abs() > self.phi(h, s, a) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Optimistic Q-function of objective `i` at zero-based step `h`:
/// `clip(r̂ + P̂ v_next + Φ + Ψ, 0, H − h)`, indexed `(s, a)`.
pub fn opt_q(model: &EstimatedModel, i: usize, v_next: &[f64], h: usize) -> Result<Vec<f64>> {
    let d = model.dims;
    if i >= d.objectives || h >= d.horizon {
        return Err(shape(format!("objective {i} or step {h} out of range")));
    }
    if v_next.len() != d.states {
        return Err(shape("next-step value must have one entry per state"));
    }
    let cap = (d.horizon - h - 1) as f64;
    if let Some(bad) = v_next.iter().find(|&&v| !(0.0..=cap).contains(&v)) {
        return Err(domain(format!("next-step value {bad} outside [0, {cap}]")));
    }
    let mut out = vec![0.0; d.states * d.actions];
    model.opt_q_into(i, h, v_next, &mut out);
    Ok(out)
}

/// Free-function form of [`EstimatedModel::exploration_reward`].
pub fn exploration_reward(model: &EstimatedModel, option: ExplorationOption) -> Vec<f64> {
    model.exploration_reward(option)
}
