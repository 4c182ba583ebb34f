use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    coefficients, greedy_single, greedy_weighted, mirror_step_stch, mirror_step_tch, update_gap, RunConfig, RunResult,
    Tracer, WeightVector,
};
use crate::error::Result;
use crate::estimation::{build_model, Counts};
use crate::momdp::{sample_episode, Momdp, ValueVector};

#[derive(Clone, Copy)]
enum Update {
    Tch,
    Stch { mu: f64 },
}

/// Online Tchebycheff learner. Consumes `(m + 1) T` episodes.
pub fn run_tchrl(momdp: &Momdp, cfg: &RunConfig) -> Result<RunResult> {
    cfg.forbid_mu()?;
    run_online(momdp, cfg, Update::Tch)
}

/// Online smooth Tchebycheff learner. Consumes `(m + 1) T` episodes.
pub fn run_stchrl(momdp: &Momdp, cfg: &RunConfig) -> Result<RunResult> {
    let mu = cfg.require_mu()?;
    run_online(momdp, cfg, Update::Stch { mu })
}

fn run_online(momdp: &Momdp, cfg: &RunConfig, update: Update) -> Result<RunResult> {
    cfg.validate()?;
    let d = momdp.dims();
    let m = d.objectives;
    let pref = cfg.require_preference(m)?;
    let total = cfg.rounds;
    let s1 = momdp.initial_state();
    let mu = match update {
        Update::Tch => None,
        Update::Stch { mu } => Some(mu),
    };
    let mut tracer = Tracer::new(momdp, pref, cfg.iota, mu, total)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut aux_counts = vec![Counts::new(d); m];
    let mut main_counts = Counts::new(d);
    let mut w = WeightVector::uniform(m);
    let mut optimistic = ValueVector::zeros(m);
    let mut main_value = ValueVector::zeros(m);
    let mut episodes = 0u64;

    for t in 1..=total {
        let gap = update_gap(&optimistic, &main_value, cfg.iota);
        w = match update {
            Update::Tch => mirror_step_tch(&w, pref, &gap, cfg.tch_eta(t, total, m, d.horizon, false)?)?,
            Update::Stch { mu } => {
                let (eta, alpha) = cfg.stch_eta_alpha(t, total, mu, d.horizon);
                mirror_step_stch(&w, pref, &gap, eta, mu, alpha)?
            }
        };

        let mut aux_policies = Vec::with_capacity(m);
        let mut next_optimistic = Vec::with_capacity(m);
        for (i, counts) in aux_counts.iter().enumerate() {
            let model = build_model(counts, cfg.delta, total)?;
            let (policy, v) = greedy_single(&model, i, s1);
            aux_policies.push(policy);
            next_optimistic.push(v);
        }
        let main_model = build_model(&main_counts, cfg.delta, total)?;
        let (policy, values) = greedy_weighted(&main_model, &coefficients(&w, pref), s1);

        for (counts, aux) in aux_counts.iter_mut().zip(&aux_policies) {
            counts.record(&sample_episode(momdp, &aux.to_policy(d.actions), &mut rng, cfg.noise_mode));
        }
        main_counts.record(&sample_episode(momdp, &policy.to_policy(d.actions), &mut rng, cfg.noise_mode));
        episodes += m as u64 + 1;

        optimistic = next_optimistic.into();
        main_value = values;
        tracer.record(policy, w.clone(), optimistic.clone())?;
    }
    Ok(tracer.finish(episodes))
}
