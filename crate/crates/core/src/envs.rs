//! Builtin environments: four small bandits with known answers and a seeded
//! random MOMDP generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape, Result};
use crate::momdp::{Dims, Momdp};

/// Five arms, two objectives. Arm 4 is the only Pareto optimal arm; arm 2
/// is weakly Pareto optimal.
pub fn example_3_1() -> Momdp {
    Momdp::bandit(&[
        vec![0.1, 0.8, 0.3, 0.8, 0.1],
        vec![0.1, 0.2, 0.5, 0.7, 0.2],
    ])
    .expect("valid builtin")
}

/// Two arms with mirrored rewards `(0.2, 0.8)` and `(0.8, 0.2)`.
pub fn figure_1() -> Momdp {
    Momdp::bandit(&[vec![0.2, 0.8], vec![0.8, 0.2]]).expect("valid builtin")
}

/// Four arms where arm 4 is Pareto optimal but never a linear-scalarization maximizer.
pub fn appendix_c2() -> Momdp {
    Momdp::bandit(&[vec![1.0, 0.5, 0.6, 0.65], vec![0.0, 0.5, 0.2, 0.3]]).expect("valid builtin")
}

/// Three arms where arm 3 is weakly but not strictly Pareto optimal.
pub fn appendix_e1() -> Momdp {
    Momdp::bandit(&[vec![1.0, 0.5, 0.5], vec![0.5, 1.0, 0.5]]).expect("valid builtin")
}

/// Random MOMDP with flat-Dirichlet transition rows and uniform mean
/// rewards, starting in state 0.
pub fn random_momdp(states: usize, actions: usize, horizon: usize, objectives: usize, seed: u64) -> Momdp {
    let dims = Dims {
        states,
        actions,
        horizon,
        objectives,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transition = Vec::with_capacity(dims.cells() * states);
    for _ in 0..dims.cells() {
        // Normalized unit exponentials are Dirichlet(1, ..., 1).
        let row: Vec<f64> = (0..states).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = row.iter().sum();
        transition.extend(row.iter().map(|x| x / total));
    }
    let mean_reward = (0..objectives * dims.cells()).map(|_| rng.random::<f64>()).collect();
    Momdp::new(dims, 0, transition, mean_reward).expect("generator output is valid")
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["example-3.1", "figure-1", "appendix-c2", "appendix-e1"];

/// Resolves a builtin environment name, or `random:S:A:H:m:seed`.
pub fn builtin(name: &str) -> Result<Momdp> {
    match name {
        "example-3.1" => Ok(example_3_1()),
        "figure-1" => Ok(figure_1()),
        "appendix-c2" => Ok(appendix_c2()),
        "appendix-e1" => Ok(appendix_e1()),
        _ => {
            let Some(rest) = name.strip_prefix("random:") else {
                return Err(shape(format!(
                    "unknown environment `{name}`; expected one of {BUILTIN_NAMES:?} or random:S:A:H:m:seed"
                )));
            };
            let parts: Vec<u64> = rest
                .split(':')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| shape(format!("bad random environment `{name}`: {e}")))?;
            match parts[..] {
                [s, a, h, m, seed] if s > 0 && a > 0 && h > 0 && m > 0 => {
                    Ok(random_momdp(s as usize, a as usize, h as usize, m as usize, seed))
                }
                _ => Err(shape(format!(
                    "bad random environment `{name}`; expected random:S:A:H:m:seed with positive sizes"
                ))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_generator_is_seeded() {
        assert_eq!(random_momdp(5, 2, 3, 2, 9), random_momdp(5, 2, 3, 2, 9));
        assert_ne!(random_momdp(5, 2, 3, 2, 9), random_momdp(5, 2, 3, 2, 10));
    }

    #[test]
    fn builtin_names_resolve() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap();
        }
        assert_eq!(builtin("random:5:2:3:2:9").unwrap(), random_momdp(5, 2, 3, 2, 9));
        assert!(builtin("random:5:2").is_err());
        assert!(builtin("nope").is_err());
    }
}
