//! Exact references for scoring learned policies.
//!
//! Stochastic-class minima are computed over mixtures of the value
//! vertices. Only non-dominated vertices are kept: any mixture is weakly
//! dominated by the same mixture of dominating vertices, and both
//! scalarizations are non-increasing in every coordinate.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::momdp::{Momdp, ValueVector};
use crate::pareto::{enumerate_values, non_dominated, value_vertices_with_cap, DEFAULT_ENUMERATION_CAP};
use crate::scalarization::{log_sum_exp, softmax, stch, tch, Preference, ScalarizationContext};

/// Objective-value ties closer than this count as co-minimizers.
pub const TIE_TOL: f64 = 1e-12;

const MAX_ITERS: usize = 100_000;
const STALL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyClass {
    Deterministic,
    Stochastic,
}

/// How the minimum is attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// All deterministic policy indices attaining the minimum.
    Deterministic { policies: Vec<u64> },
    /// Mixture weights over value vertices.
    Mixture { vertices: Vec<ValueVector>, weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// Scalarized value at the minimizer.
    pub objective: f64,
    /// Value vector of the minimizer (lowest policy index for deterministic ties).
    pub value: ValueVector,
    pub witness: Witness,
    /// Set when an iterative solver hit its iteration limit.
    pub stalled: bool,
}

/// Per-objective optimal values `max_π V_{i,1}^π(s_1)`.
pub fn exact_best_values(momdp: &Momdp) -> ValueVector {
    let d = momdp.dims();
    let s1 = momdp.initial_state();
    (0..d.objectives)
        .map(|i| {
            let mut next = vec![0.0; d.states];
            let mut current = vec![0.0; d.states];
            for h in (0..d.horizon).rev() {
                for (s, slot) in current.iter_mut().enumerate() {
                    *slot = (0..d.actions)
                        .map(|a| momdp.reward(i, h, s, a) + momdp.expect_next(h, s, a, &next))
                        .fold(f64::NEG_INFINITY, f64::max);
                }
                std::mem::swap(&mut next, &mut current);
            }
            next[s1]
        })
        .collect::<Vec<_>>()
        .into()
}

fn context(momdp: &Momdp, iota: f64, mu: Option<f64>) -> Result<ScalarizationContext> {
    ScalarizationContext::new(exact_best_values(momdp), iota, mu)
}

/// Minimum of the Tchebycheff scalarization over a policy class.
pub fn exact_min_tch(momdp: &Momdp, pref: &Preference, iota: f64, class: PolicyClass) -> Result<OracleSolution> {
    let ctx = context(momdp, iota, None)?;
    match class {
        PolicyClass::Deterministic => deterministic_min(momdp, |v| tch(pref, &ctx, v)),
        PolicyClass::Stochastic => {
            let vertices = value_vertices_with_cap(momdp, DEFAULT_ENUMERATION_CAP)?;
            min_tch_over_hull(&vertices, pref, &ctx)
        }
    }
}

/// Minimum of the smooth Tchebycheff scalarization over a policy class.
pub fn exact_min_stch(
    momdp: &Momdp,
    pref: &Preference,
    iota: f64,
    mu: f64,
    class: PolicyClass,
) -> Result<OracleSolution> {
    let ctx = context(momdp, iota, Some(mu))?;
    match class {
        PolicyClass::Deterministic => deterministic_min(momdp, |v| stch(pref, &ctx, v)),
        PolicyClass::Stochastic => {
            let vertices = value_vertices_with_cap(momdp, DEFAULT_ENUMERATION_CAP)?;
            min_stch_over_hull(&vertices, pref, &ctx)
        }
    }
}

fn deterministic_min(momdp: &Momdp, score: impl Fn(&[f64]) -> Result<f64>) -> Result<OracleSolution> {
    let values = enumerate_values(momdp, DEFAULT_ENUMERATION_CAP)?;
    let scores = values.iter().map(|v| score(v)).collect::<Result<Vec<f64>>>()?;
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let policies: Vec<u64> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= best + TIE_TOL)
        .map(|(i, _)| i as u64)
        .collect();
    Ok(OracleSolution {
        objective: best,
        value: values[policies[0] as usize].clone(),
        witness: Witness::Deterministic { policies },
        stalled: false,
    })
}

fn mixture_value(vertices: &[ValueVector], weights: &[f64]) -> ValueVector {
    let m = vertices[0].len();
    let mut v = vec![0.0; m];
    for (x, w) in vertices.iter().zip(weights) {
        for (acc, xi) in v.iter_mut().zip(x.iter()) {
            *acc += w * xi;
        }
    }
    v.into()
}

fn reduce(vertices: &[ValueVector]) -> Result<Vec<ValueVector>> {
    if vertices.is_empty() {
        return Err(domain("no value vertices"));
    }
    Ok(non_dominated(vertices)
        .into_iter()
        .map(|i| vertices[i].clone())
        .collect())
}

/// Exact Tchebycheff minimum over the convex hull of `vertices`, as the
/// linear program `min t` s.t. `λ_i (c_i − Σ_j x_j V_ij) ≤ t`, `x ∈ Δ`.
pub fn min_tch_over_hull(
    vertices: &[ValueVector],
    pref: &Preference,
    ctx: &ScalarizationContext,
) -> Result<OracleSolution> {
    let vertices = reduce(vertices)?;
    let m = pref.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let xs: Vec<_> = vertices.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let simplex: Vec<_> = xs.iter().map(|&x| (x, 1.0)).collect();
    lp.add_constraint(&simplex[..], ComparisonOp::Eq, 1.0);
    for i in 0..m {
        let l = pref.lambda()[i];
        let c = ctx.v_star()[i] + ctx.iota();
        let mut row = vec![(t, -1.0)];
        row.extend(xs.iter().zip(&vertices).map(|(&x, v)| (x, -l * v[i])));
        lp.add_constraint(&row[..], ComparisonOp::Le, -l * c);
    }
    let solution = lp
        .solve()
        .map_err(|e| domain(format!("hull program failed: {e}")))?
        .into_solution()
        .map_err(|_| domain("hull program was interrupted"))?;
    let raw: Vec<f64> = xs.iter().map(|&x| solution.var_value(x).max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let value = mixture_value(&vertices, &weights);
    Ok(OracleSolution {
        objective: tch(pref, ctx, &value)?,
        value,
        witness: Witness::Mixture { vertices, weights },
        stalled: false,
    })
}

/// Smooth Tchebycheff minimum over the hull of `vertices` by accelerated
/// projected gradient on the mixture weights, warm-started at the
/// Tchebycheff minimizer.
pub fn min_stch_over_hull(
    vertices: &[ValueVector],
    pref: &Preference,
    ctx: &ScalarizationContext,
) -> Result<OracleSolution> {
    let mu = ctx
        .mu()
        .ok_or_else(|| crate::error::config("smooth Tchebycheff needs mu"))?;
    let start = min_tch_over_hull(vertices, pref, ctx)?;
    let Witness::Mixture { vertices, weights } = start.witness else {
        unreachable!("hull solver returns a mixture")
    };
    let m = pref.len();
    let n = vertices.len();
    let lambda = pref.lambda();
    let offset: Vec<f64> = (0..m).map(|i| lambda[i] * (ctx.v_star()[i] + ctx.iota())).collect();
    // z(x) = offset − A x with A_ij = λ_i V_ji.
    let weighted = |i: usize, j: usize| lambda[i] * vertices[j][i];
    let z_of = |x: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| offset[i] - (0..n).map(|j| weighted(i, j) * x[j]).sum::<f64>())
            .collect()
    };
    let objective = |x: &[f64]| log_sum_exp(&z_of(x), mu);
    let gradient = |x: &[f64]| -> Vec<f64> {
        let p = softmax(z_of(x).iter().map(|z| z / mu));
        (0..n)
            .map(|j| -(0..m).map(|i| p[i] * weighted(i, j)).sum::<f64>())
            .collect()
    };
    let frobenius: f64 = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| weighted(i, j).powi(2))
        .sum();
    let step = if frobenius > 0.0 { mu / frobenius } else { 1.0 };

    let mut best_x = weights.clone();
    let mut best_f = objective(&best_x);
    let mut x = weights.clone();
    let mut y = weights;
    let mut momentum = 1.0f64;
    let mut prev_f = best_f;
    let mut quiet = 0;
    let mut stalled = true;
    for _ in 0..MAX_ITERS {
        let g = gradient(&y);
        let next: Vec<f64> = project_to_simplex(&y.iter().zip(&g).map(|(a, b)| a - step * b).collect::<Vec<_>>());
        let f = objective(&next);
        let next_momentum = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        if f > prev_f {
            // Adaptive restart.
            momentum = 1.0;
            y = x.clone();
        } else {
            let beta = (momentum - 1.0) / next_momentum;
            y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
            momentum = next_momentum;
            x = next;
        }
        if f < best_f {
            best_f = f;
            best_x = x.clone();
        }
        quiet = if (prev_f - f).abs() < STALL_TOL { quiet + 1 } else { 0 };
        prev_f = f;
        if quiet >= 10 {
            stalled = false;
            break;
        }
    }
    let value = mixture_value(&vertices, &best_x);
    Ok(OracleSolution {
        objective: stch(pref, ctx, &value)?,
        value,
        witness: Witness::Mixture {
            vertices,
            weights: best_x,
        },
        stalled,
    })
}

/// Tchebycheff minimum over the hull by projected subgradient descent with
/// `1/√k` steps and iterate averaging. Slower and less precise than
/// [`min_tch_over_hull`]; kept as an independent cross-check.
pub fn min_tch_subgradient(
    vertices: &[ValueVector],
    pref: &Preference,
    ctx: &ScalarizationContext,
) -> Result<OracleSolution> {
    let vertices = reduce(vertices)?;
    let n = vertices.len();
    let lambda = pref.lambda();
    let mut x = vec![1.0 / n as f64; n];
    let mut avg = x.clone();
    let mut prev = tch(pref, ctx, &mixture_value(&vertices, &avg))?;
    let mut stalled = true;
    for k in 1..=MAX_ITERS {
        let v = mixture_value(&vertices, &x);
        let (_, w) = crate::scalarization::tch_via_weights(pref, ctx, &v)?;
        let active = w.iter().position(|&e| e == 1.0).unwrap_or(0);
        let step = 0.5 / (k as f64).sqrt();
        let moved: Vec<f64> = (0..n)
            .map(|j| x[j] + step * lambda[active] * vertices[j][active])
            .collect();
        x = project_to_simplex(&moved);
        let kf = k as f64;
        avg.iter_mut().zip(&x).for_each(|(a, b)| *a += (b - *a) / (kf + 1.0));
        if k % 100 == 0 {
            let f = tch(pref, ctx, &mixture_value(&vertices, &avg))?;
            if (prev - f).abs() < STALL_TOL {
                stalled = false;
                break;
            }
            prev = f;
        }
    }
    let value = mixture_value(&vertices, &avg);
    Ok(OracleSolution {
        objective: tch(pref, ctx, &value)?,
        value,
        witness: Witness::Mixture { vertices, weights: avg },
        stalled,
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs;
    use crate::pareto::{enumerate_fronts, value_vertices};
    use crate::scalarization::canonical_preference;

    fn pref(l: &[f64]) -> Preference {
        Preference::new(l.to_vec()).unwrap()
    }

    /// Grid search over pairwise mixtures of the vertices of a two-objective instance.
    fn grid_min(vertices: &[ValueVector], score: impl Fn(&[f64]) -> f64) -> f64 {
        let mut best = f64::INFINITY;
        for a in vertices {
            for b in vertices {
                for k in 0..=10_000 {
                    let p = k as f64 / 10_000.0;
                    let v = [p * a[0] + (1.0 - p) * b[0], p * a[1] + (1.0 - p) * b[1]];
                    best = best.min(score(&v));
                }
            }
        }
        best
    }

    #[test]
    fn best_values() {
        assert_eq!(exact_best_values(&envs::example_3_1()).0, vec![0.8, 0.7]);
        assert_eq!(exact_best_values(&envs::appendix_c2()).0, vec![1.0, 0.5]);
        let zero = Momdp::bandit(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(exact_best_values(&zero).0, vec![0.0, 0.0]);
    }

    #[test]
    fn canonical_preference_selects_arm_four() {
        let m = envs::appendix_c2();
        let l = canonical_preference(&[1.0, 0.5], &[0.65, 0.3], 0.01).unwrap();
        let sol = exact_min_tch(&m, &l, 0.01, PolicyClass::Deterministic).unwrap();
        assert_eq!(sol.witness, Witness::Deterministic { policies: vec![3] });
        let ctx = ScalarizationContext::new(vec![1.0, 0.5].into(), 0.01, None).unwrap();
        assert!((tch(&l, &ctx, &[0.65, 0.3]).unwrap() - 0.1327).abs() < 1e-4);
        assert!((tch(&l, &ctx, &[0.5, 0.5]).unwrap() - 0.188).abs() < 1e-3);
    }

    #[test]
    fn figure_1_symmetric_mixture() {
        let m = envs::figure_1();
        let iota = 1e-3;
        let sol = exact_min_tch(&m, &pref(&[0.5, 0.5]), iota, PolicyClass::Stochastic).unwrap();
        assert!((sol.objective - 0.5 * (0.3 + iota)).abs() < 1e-12);
        assert!(sol.value.max_abs_diff(&vec![0.5, 0.5].into()) < 1e-9);
        let ctx = ScalarizationContext::new(vec![0.8, 0.8].into(), iota, None).unwrap();
        let grid = grid_min(&value_vertices(&m).unwrap(), |v| tch(&pref(&[0.5, 0.5]), &ctx, v).unwrap());
        assert!((grid - sol.objective).abs() < 1e-4);
    }

    #[test]
    fn single_objective_minimum_is_iota() {
        let m = Momdp::bandit(&[vec![0.3, 0.9, 0.5]]).unwrap();
        for class in [PolicyClass::Deterministic, PolicyClass::Stochastic] {
            let sol = exact_min_tch(&m, &pref(&[1.0]), 0.01, class).unwrap();
            assert!((sol.objective - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn hull_solvers_agree_with_grid_and_subgradient() {
        for seed in 0..8 {
            let m = envs::random_momdp(1, 6, 1, 2, seed);
            let vertices = value_vertices(&m).unwrap();
            let l = Preference::normalized(&[0.2 + 0.1 * seed as f64, 0.5]).unwrap();
            let ctx = ScalarizationContext::new(exact_best_values(&m), 0.01, Some(0.05)).unwrap();
            let lp = min_tch_over_hull(&vertices, &l, &ctx).unwrap();
            let grid = grid_min(&vertices, |v| tch(&l, &ctx, v).unwrap());
            assert!(lp.objective <= grid + 1e-12);
            assert!(grid - lp.objective < 1e-4, "seed {seed}: {grid} vs {}", lp.objective);
            let sg = min_tch_subgradient(&vertices, &l, &ctx).unwrap();
            assert!(sg.objective >= lp.objective - 1e-12);
            assert!(sg.objective - lp.objective < 1e-3);

            let smooth = min_stch_over_hull(&vertices, &l, &ctx).unwrap();
            let grid = grid_min(&vertices, |v| stch(&l, &ctx, v).unwrap());
            assert!(smooth.objective <= grid + 1e-9, "seed {seed}: {} vs {grid}", smooth.objective);
            assert!(smooth.objective >= lp.objective - 1e-12);
            assert!(smooth.objective <= lp.objective + 0.05 * 2f64.ln() + 1e-12);
        }
    }

    #[test]
    fn tiny_mu_matches_tch() {
        let m = envs::random_momdp(3, 2, 2, 2, 4);
        let l = pref(&[0.4, 0.6]);
        let t = exact_min_tch(&m, &l, 1e-3, PolicyClass::Stochastic).unwrap();
        let s = exact_min_stch(&m, &l, 1e-3, 1e-8, PolicyClass::Stochastic).unwrap();
        assert!((s.objective - t.objective).abs() < 1e-6);
    }

    #[test]
    fn stochastic_never_worse_than_deterministic() {
        for seed in 0..10 {
            let m = envs::random_momdp(2, 2, 2, 3, seed);
            let l = Preference::normalized(&[1.0, 2.0, 3.0]).unwrap();
            let det = exact_min_tch(&m, &l, 1e-3, PolicyClass::Deterministic).unwrap();
            let sto = exact_min_tch(&m, &l, 1e-3, PolicyClass::Stochastic).unwrap();
            assert!(sto.objective <= det.objective + 1e-12);
            if let Witness::Mixture { weights, .. } = &sto.witness {
                assert!(weights.iter().all(|&w| w >= 0.0));
                assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let ds = exact_min_stch(&m, &l, 1e-3, 0.05, PolicyClass::Deterministic).unwrap();
            let ss = exact_min_stch(&m, &l, 1e-3, 0.05, PolicyClass::Stochastic).unwrap();
            assert!(ss.objective <= ds.objective + 1e-12);
            assert!(ss.objective - sto.objective >= -1e-12);
            assert!(ss.objective - sto.objective <= 0.05 * 3f64.ln() + 1e-12);
        }
    }

    #[test]
    fn canonical_preference_round_trip_on_front() {
        for seed in 0..10 {
            let m = envs::random_momdp(2, 2, 2, 2, seed);
            let (front, _) = enumerate_fronts(&m).unwrap();
            let v_star = exact_best_values(&m);
            for e in &front.entries {
                let l = canonical_preference(&v_star, &e.value, 1e-3).unwrap();
                let sol = exact_min_tch(&m, &l, 1e-3, PolicyClass::Deterministic).unwrap();
                assert!(sol.value.max_abs_diff(&e.value) < 1e-9, "seed {seed}");
            }
        }
    }

    #[test]
    fn stch_argmins_share_one_value() {
        let m = envs::appendix_e1();
        // At λ = (0.5, 0.5) the instance is symmetric and a_1, a_2 tie exactly.
        for k in (1..100).filter(|&k| k != 50) {
            let l = pref(&[k as f64 / 100.0, 1.0 - k as f64 / 100.0]);
            let sol = exact_min_stch(&m, &l, 0.01, 0.01, PolicyClass::Deterministic).unwrap();
            let Witness::Deterministic { policies } = &sol.witness else { unreachable!() };
            assert!(!policies.contains(&2));
            let values = enumerate_values(&m, 10).unwrap();
            for &p in policies {
                assert!(values[p as usize].max_abs_diff(&sol.value) < 1e-12, "lambda {k}");
            }
        }
    }

    #[test]
    fn symmetric_stochastic_stch_minimizer_is_the_midpoint() {
        let m = envs::appendix_e1();
        let sol = exact_min_stch(&m, &pref(&[0.5, 0.5]), 0.01, 0.01, PolicyClass::Stochastic).unwrap();
        assert!(!sol.stalled);
        assert!(sol.value.max_abs_diff(&vec![0.75, 0.75].into()) < 1e-6);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_to_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }
}
