use super::{
    coefficients, greedy_single, greedy_weighted, mirror_step_stch, mirror_step_tch, update_gap, ExplorationDataset,
    RunConfig, RunResult, Tracer, WeightVector,
};
use crate::error::{config, Result};
use crate::estimation::build_model;
use crate::momdp::{Momdp, ValueVector};

#[derive(Clone, Copy)]
enum Update {
    Tch,
    Stch { mu: f64 },
}

/// Tchebycheff planning on a frozen model built from `dataset`. Runs
/// `cfg.planning_rounds_for(dataset.rounds)` rounds and samples nothing;
/// `momdp` is used only to evaluate the traces.
pub fn run_planning_tch(momdp: &Momdp, dataset: &ExplorationDataset, cfg: &RunConfig) -> Result<RunResult> {
    cfg.forbid_mu()?;
    run_planning(momdp, dataset, cfg, Update::Tch)
}

/// Smooth Tchebycheff counterpart of [`run_planning_tch`].
pub fn run_planning_stch(momdp: &Momdp, dataset: &ExplorationDataset, cfg: &RunConfig) -> Result<RunResult> {
    let mu = cfg.require_mu()?;
    run_planning(momdp, dataset, cfg, Update::Stch { mu })
}

fn run_planning(momdp: &Momdp, dataset: &ExplorationDataset, cfg: &RunConfig, update: Update) -> Result<RunResult> {
    cfg.validate()?;
    dataset.validate()?;
    let d = momdp.dims();
    if dataset.counts.dims() != d {
        return Err(config("dataset was collected on a model of a different size"));
    }
    let m = d.objectives;
    let pref = cfg.require_preference(m)?;
    let rounds = cfg.planning_rounds_for(dataset.rounds);
    let s1 = momdp.initial_state();
    let model = build_model(&dataset.counts, dataset.delta, dataset.rounds)?;
    let mu = match update {
        Update::Tch => None,
        Update::Stch { mu } => Some(mu),
    };
    let mut tracer = Tracer::new(momdp, pref, cfg.iota, mu, rounds)?;

    let optimistic: ValueVector = (0..m)
        .map(|i| greedy_single(&model, i, s1).1)
        .collect::<Vec<_>>()
        .into();
    let mut w = WeightVector::uniform(m);
    let mut main_value = ValueVector::zeros(m);

    for k in 1..=rounds {
        let gap = update_gap(&optimistic, &main_value, cfg.iota);
        w = match update {
            Update::Tch => mirror_step_tch(&w, pref, &gap, cfg.tch_eta(k, rounds, m, d.horizon, true)?)?,
            Update::Stch { mu } => {
                let (eta, alpha) = cfg.stch_eta_alpha(k, rounds, mu, d.horizon);
                mirror_step_stch(&w, pref, &gap, eta, mu, alpha)?
            }
        };
        let (policy, values) = greedy_weighted(&model, &coefficients(&w, pref), s1);
        main_value = values;
        tracer.record(policy, w.clone(), optimistic.clone())?;
    }
    Ok(tracer.finish(0))
}
