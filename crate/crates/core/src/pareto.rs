//! Pareto dominance and exact fronts over deterministic policies.
//!
//! Deterministic policies are identified by their mixed-radix index (see
//! [`DeterministicPolicy::from_index`]); for a bandit the index is the arm.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{domain, shape, MorlError, Result};
use crate::momdp::{evaluate_deterministic, DeterministicPolicy, Dims, Momdp, ValueVector};

/// Largest number of deterministic policies enumerated by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Value vectors closer than this in every coordinate are treated as one.
pub const DEDUP_TOL: f64 = 1e-12;

/// `v1` dominates `v2`: no worse anywhere and strictly better somewhere.
pub fn dominates(v1: &[f64], v2: &[f64]) -> Result<bool> {
    check_len(v1, v2)?;
    Ok(dominates_unchecked(v1, v2))
}

/// `v1` is strictly better than `v2` in every coordinate.
pub fn strictly_dominates(v1: &[f64], v2: &[f64]) -> Result<bool> {
    check_len(v1, v2)?;
    Ok(v1.iter().zip(v2).all(|(a, b)| a > b))
}

fn check_len(v1: &[f64], v2: &[f64]) -> Result<()> {
    if v1.len() != v2.len() {
        return Err(shape(format!(
            "cannot compare value vectors of lengths {} and {}",
            v1.len(),
            v2.len()
        )));
    }
    Ok(())
}

fn dominates_unchecked(v1: &[f64], v2: &[f64]) -> bool {
    let mut strict = false;
    for (a, b) in v1.iter().zip(v2) {
        if a < b {
            return false;
        }
        strict |= a > b;
    }
    strict
}

/// `|A|^(|S| H)`.
pub fn deterministic_policy_count(dims: Dims) -> u128 {
    (dims.actions as u128).saturating_pow((dims.states * dims.horizon) as u32)
}

/// Values of every deterministic policy, in policy-index order.
pub fn enumerate_values(momdp: &Momdp, cap: u64) -> Result<Vec<ValueVector>> {
    let dims = momdp.dims();
    let required = deterministic_policy_count(dims);
    if required > cap as u128 {
        return Err(MorlError::Capacity { required, cap });
    }
    (0..required as u64)
        .map(|index| evaluate_deterministic(momdp, &DeterministicPolicy::from_index(dims, index)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontKind {
    Pareto,
    WeakPareto,
}

/// One distinct value on a front, with every policy attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontEntry {
    /// Lowest index among the policies attaining this value.
    pub policy_index: u64,
    pub policy: DeterministicPolicy,
    pub value: ValueVector,
    /// Indices of all deterministic policies with this value, ascending.
    pub tied_policies: Vec<u64>,
}

/// Exported form of a front entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontRecord {
    /// Chosen action, `[h][s]`.
    pub policy: Vec<Vec<usize>>,
    pub value: Vec<f64>,
}

/// Pareto or weak-Pareto front of the deterministic policy class, sorted by policy index.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoFront {
    pub kind: FrontKind,
    pub entries: Vec<FrontEntry>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every policy index on the front, including ties, ascending.
    pub fn policy_indices(&self) -> Vec<u64> {
        let mut all: Vec<u64> = self
            .entries
            .iter()
            .flat_map(|e| e.tied_policies.iter().copied())
            .collect();
        all.sort_unstable();
        all
    }

    /// Whether `v` matches a front value within [`DEDUP_TOL`].
    pub fn contains_value(&self, v: &[f64]) -> bool {
        self.entries.iter().any(|e| within_tol(&e.value, v))
    }

    pub fn records(&self) -> Vec<FrontRecord> {
        self.entries
            .iter()
            .map(|e| FrontRecord {
                policy: e.policy.to_table(),
                value: e.value.0.clone(),
            })
            .collect()
    }
}

fn within_tol(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= DEDUP_TOL)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Groups equal values; each group lists its member indices ascending.
fn group_values(values: &[ValueVector]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&values[a], &values[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match groups.last_mut() {
            Some(g) if within_tol(&values[g[0]], &values[idx]) => g.push(idx),
            _ => groups.push(vec![idx]),
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Indices (into `values`) of the non-dominated entries, ascending.
pub fn non_dominated(values: &[ValueVector]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // A dominator is lexicographically larger, so it is visited first.
    order.sort_by(|&a, &b| lex_cmp(&values[b], &values[a]).then(a.cmp(&b)));
    let mut front: Vec<usize> = Vec::new();
    for idx in order {
        if !front.iter().any(|&f| dominates_unchecked(&values[f], &values[idx])) {
            front.push(idx);
        }
    }
    front.sort_unstable();
    front
}

/// Pareto and weak-Pareto fronts from the values of every deterministic
/// policy, given in policy-index order.
pub fn fronts_from_values(dims: Dims, values: &[ValueVector]) -> (ParetoFront, ParetoFront) {
    let groups = group_values(values);
    let distinct: Vec<ValueVector> = groups.iter().map(|g| values[g[0]].clone()).collect();
    let pareto_ids = non_dominated(&distinct);
    let weak_ids: Vec<usize> = (0..distinct.len())
        .filter(|&d| {
            !pareto_ids
                .iter()
                .any(|&p| distinct[p].iter().zip(distinct[d].iter()).all(|(a, b)| a > b))
        })
        .collect();
    let build = |ids: &[usize], kind: FrontKind| ParetoFront {
        kind,
        entries: ids
            .iter()
            .map(|&d| {
                let g = &groups[d];
                FrontEntry {
                    policy_index: g[0] as u64,
                    policy: DeterministicPolicy::from_index(dims, g[0] as u64),
                    value: distinct[d].clone(),
                    tied_policies: g.iter().map(|&i| i as u64).collect(),
                }
            })
            .collect(),
    };
    (build(&pareto_ids, FrontKind::Pareto), build(&weak_ids, FrontKind::WeakPareto))
}

/// `(Pareto front, weak-Pareto front)` of the deterministic policy class.
pub fn enumerate_fronts(momdp: &Momdp) -> Result<(ParetoFront, ParetoFront)> {
    enumerate_fronts_with_cap(momdp, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_fronts_with_cap(momdp: &Momdp, cap: u64) -> Result<(ParetoFront, ParetoFront)> {
    let values = enumerate_values(momdp, cap)?;
    Ok(fronts_from_values(momdp.dims(), &values))
}

/// Pareto suboptimality gap of `v` against an enumerated Pareto front:
/// `max(0, max_{v*} min_i (v*_i − v_i))`.
pub fn psg(v: &[f64], front: &ParetoFront) -> Result<f64> {
    if front.kind != FrontKind::Pareto {
        return Err(domain("the suboptimality gap is measured against a Pareto front"));
    }
    if front.is_empty() {
        return Err(domain("empty Pareto front"));
    }
    let mut gap: f64 = 0.0;
    for e in &front.entries {
        check_len(&e.value, v)?;
        let shortfall = e
            .value
            .iter()
            .zip(v)
            .map(|(star, x)| star - x)
            .fold(f64::INFINITY, f64::min);
        gap = gap.max(shortfall);
    }
    Ok(gap)
}

/// Distinct values of the deterministic policies, ordered by the lowest
/// policy index attaining each; their convex hull is the value set of the
/// stochastic class.
pub fn value_vertices(momdp: &Momdp) -> Result<Vec<ValueVector>> {
    value_vertices_with_cap(momdp, DEFAULT_ENUMERATION_CAP)
}

pub fn value_vertices_with_cap(momdp: &Momdp, cap: u64) -> Result<Vec<ValueVector>> {
    let values = enumerate_values(momdp, cap)?;
    Ok(group_values(&values)
        .into_iter()
        .map(|g| values[g[0]].clone())
        .collect())
}
