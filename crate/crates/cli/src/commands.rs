use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use morl_core::algorithms::{
    run_exploration_traced, run_planning_stch, run_planning_tch, run_stchrl, run_tchrl,
};
use morl_core::oracle::{exact_best_values, exact_min_stch, exact_min_tch};
use morl_core::pareto::{enumerate_values, fronts_from_values, DEFAULT_ENUMERATION_CAP};
use morl_core::report::{
    write_exploration_csv, write_sweep_csv, write_trace_csv, write_values_csv, RunSummary, SweepRow,
};
use morl_core::{
    ExplorationDataset, FrontKind, Momdp, MorlError, OracleSolution, ParetoFront, PolicyClass, Preference,
    RunConfig, RunResult,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::inputs::{load_config, load_dataset, load_env};
use crate::output::{write_atomic, write_json};
use crate::{Algorithm, Class, CliError, CliResult, SweepAlgorithm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Learner {
    Tchrl,
    Stchrl,
    PlanTch,
    PlanStch,
}

impl Learner {
    fn name(self) -> &'static str {
        match self {
            Learner::Tchrl => "tchrl",
            Learner::Stchrl => "stchrl",
            Learner::PlanTch => "plan-tch",
            Learner::PlanStch => "plan-stch",
        }
    }

    fn plans(self) -> bool {
        matches!(self, Learner::PlanTch | Learner::PlanStch)
    }
}

impl From<SweepAlgorithm> for Learner {
    fn from(a: SweepAlgorithm) -> Self {
        match a {
            SweepAlgorithm::Tchrl => Learner::Tchrl,
            SweepAlgorithm::Stchrl => Learner::Stchrl,
            SweepAlgorithm::PlanTch => Learner::PlanTch,
            SweepAlgorithm::PlanStch => Learner::PlanStch,
        }
    }
}

fn learn(learner: Learner, env: &Momdp, cfg: &RunConfig, dataset: Option<&ExplorationDataset>) -> CliResult<RunResult> {
    let need = || {
        dataset.ok_or_else(|| CliError::Core(MorlError::Config(format!("{} needs --dataset", learner.name()))))
    };
    Ok(match learner {
        Learner::Tchrl => run_tchrl(env, cfg)?,
        Learner::Stchrl => run_stchrl(env, cfg)?,
        Learner::PlanTch => run_planning_tch(env, need()?, cfg)?,
        Learner::PlanStch => run_planning_stch(env, need()?, cfg)?,
    })
}

/// Exact stochastic-class minimum for the configured scalarization, when
/// the model is small enough to enumerate.
fn oracle_for(env: &Momdp, cfg: &RunConfig) -> Option<OracleSolution> {
    let pref = cfg.preference.as_ref()?;
    match cfg.mu {
        Some(mu) => exact_min_stch(env, pref, cfg.iota, mu, PolicyClass::Stochastic).ok(),
        None => exact_min_tch(env, pref, cfg.iota, PolicyClass::Stochastic).ok(),
    }
}

fn write_csv_file(path: &Path, write: impl FnOnce(&mut Vec<u8>) -> morl_core::Result<()>) -> CliResult<()> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    write_atomic(path, &buf)
}

#[derive(Serialize)]
struct FrontFile<'a> {
    env: &'a str,
    kind: FrontKind,
    entries: Vec<FrontFileEntry>,
}

#[derive(Serialize)]
struct FrontFileEntry {
    policy_index: u64,
    tied_policies: Vec<u64>,
    /// Chosen action, `[h][s]`.
    policy: Vec<Vec<usize>>,
    value: Vec<f64>,
}

fn front_file<'a>(env: &'a str, front: &ParetoFront) -> FrontFile<'a> {
    FrontFile {
        env,
        kind: front.kind,
        entries: front
            .entries
            .iter()
            .zip(front.records())
            .map(|(e, r)| FrontFileEntry {
                policy_index: e.policy_index,
                tied_policies: e.tied_policies.clone(),
                policy: r.policy,
                value: r.value,
            })
            .collect(),
    }
}

pub fn pareto(env_spec: &str, out: &Path) -> CliResult<()> {
    let env = load_env(env_spec)?;
    let values = enumerate_values(&env, DEFAULT_ENUMERATION_CAP)?;
    let (front, weak) = fronts_from_values(env.dims(), &values);
    fs::create_dir_all(out)?;
    write_json(&out.join("pareto.json"), &front_file(env_spec, &front))?;
    write_json(&out.join("weak_pareto.json"), &front_file(env_spec, &weak))?;
    write_csv_file(&out.join("values.csv"), |buf| write_values_csv(&values, buf))
}

#[derive(Serialize)]
struct ExplorationSummary<'a> {
    algorithm: &'static str,
    env: &'a str,
    config: &'a RunConfig,
    rounds: u64,
    episodes_sampled: u64,
}

pub fn run(algorithm: Algorithm, config: &Path, dataset: Option<&Path>, out: &Path) -> CliResult<()> {
    let file = load_config(config)?;
    fs::create_dir_all(out)?;
    let learner = match algorithm {
        Algorithm::Explore => {
            let run = run_exploration_traced(&file.env, &file.config)?;
            // The dataset can be large; stream it rather than buffering.
            let tmp = out.join("dataset.json.tmp");
            serde_json::to_writer(BufWriter::new(File::create(&tmp)?), &run.dataset)?;
            fs::rename(&tmp, out.join("dataset.json"))?;
            write_csv_file(&out.join("exploration.csv"), |buf| {
                write_exploration_csv(&run.bonus_value_trace, buf)
            })?;
            return write_json(
                &out.join("summary.json"),
                &ExplorationSummary {
                    algorithm: "explore",
                    env: &file.env_spec,
                    config: &file.config,
                    rounds: run.dataset.rounds,
                    episodes_sampled: run.episodes_sampled,
                },
            );
        }
        Algorithm::Tchrl => Learner::Tchrl,
        Algorithm::Stchrl => Learner::Stchrl,
        Algorithm::PlanTch => Learner::PlanTch,
        Algorithm::PlanStch => Learner::PlanStch,
    };
    let dataset = match (learner.plans(), dataset) {
        (true, Some(path)) => Some(load_dataset(path)?),
        (true, None) => {
            return Err(MorlError::Config(format!("{} needs --dataset", learner.name())).into());
        }
        (false, _) => None,
    };
    let result = learn(learner, &file.env, &file.config, dataset.as_ref())?;
    let oracle = oracle_for(&file.env, &file.config);
    let summary = RunSummary::new(learner.name(), &file.env_spec, &file.config, &result, oracle.as_ref())
        .ok_or_else(|| CliError::Core(MorlError::Config("run produced no rounds".into())))?;
    write_csv_file(&out.join("trace.csv"), |buf| write_trace_csv(&result, buf))?;
    write_json(&out.join("summary.json"), &summary)
}

/// All points of the simplex grid with spacing `1/n`, first coordinate ascending.
fn simplex_grid(m: usize, spacing: f64) -> CliResult<Vec<Preference>> {
    if !(spacing > 0.0 && spacing <= 0.5) {
        return Err(CliError::Usage(format!("grid spacing must lie in (0, 0.5], got {spacing}")));
    }
    let n = (1.0 / spacing).round();
    if ((n * spacing) - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!("1 / grid must be an integer, got 1 / {spacing}")));
    }
    let n = n as usize;
    let mut out = Vec::new();
    let mut parts = vec![0usize; m];
    fn fill(parts: &mut Vec<usize>, pos: usize, left: usize, n: usize, out: &mut Vec<Preference>) {
        if pos + 1 == parts.len() {
            parts[pos] = left;
            let weights: Vec<f64> = parts.iter().map(|&k| k as f64 / n as f64).collect();
            out.push(Preference::normalized(&weights).expect("grid point on the simplex"));
            return;
        }
        for k in 0..=left {
            parts[pos] = k;
            fill(parts, pos + 1, left - k, n, out);
        }
    }
    fill(&mut parts, 0, n, n, &mut out);
    Ok(out)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    algorithm: &'static str,
    env: &'a str,
    config: &'a RunConfig,
    grid: f64,
    reexplore: bool,
    points: usize,
    /// Exploration plus learning episodes over the whole sweep.
    total_episodes_sampled: u64,
}

pub fn sweep(
    algorithm: SweepAlgorithm,
    config: &Path,
    grid: f64,
    dataset: Option<&Path>,
    reexplore: bool,
    out: &Path,
) -> CliResult<()> {
    let file = load_config(config)?;
    let learner = Learner::from(algorithm);
    if reexplore && !learner.plans() {
        return Err(CliError::Usage("--reexplore applies only to planning sweeps".into()));
    }
    let points = simplex_grid(file.env.num_objectives(), grid)?;
    let point_dir = out.join("points");
    fs::create_dir_all(&point_dir)?;

    let mut shared_episodes = 0;
    let shared = match (learner.plans(), reexplore, dataset) {
        (true, false, Some(path)) => Some(load_dataset(path)?),
        (true, false, None) => {
            let run = run_exploration_traced(&file.env, &file.config)?;
            shared_episodes = run.episodes_sampled;
            Some(run.dataset)
        }
        _ => None,
    };

    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, pref)| -> CliResult<SweepRow> {
            let mut cfg = file.config.clone();
            cfg.preference = Some(pref.clone());
            cfg.seed = file.config.seed ^ index as u64;
            let mut episodes = 0;
            let own;
            let dataset = if learner.plans() && reexplore {
                let run = run_exploration_traced(&file.env, &cfg)?;
                episodes += run.episodes_sampled;
                own = run.dataset;
                Some(&own)
            } else {
                shared.as_ref()
            };
            let result = learn(learner, &file.env, &cfg, dataset)?;
            episodes += result.episodes_sampled;
            let oracle = oracle_for(&file.env, &cfg);
            let summary = RunSummary::new(learner.name(), &file.env_spec, &cfg, &result, oracle.as_ref())
                .ok_or_else(|| CliError::Core(MorlError::Config("run produced no rounds".into())))?;
            write_json(&point_dir.join(format!("point_{index:04}.json")), &summary)?;
            Ok(SweepRow {
                index,
                lambda: pref.lambda().to_vec(),
                value: summary.final_mixture_value,
                objective: summary.final_objective,
                oracle_objective: summary.oracle_objective,
                error: summary.final_error,
                episodes_sampled: episodes,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    write_csv_file(&out.join("sweep.csv"), |buf| write_sweep_csv(&rows, buf))?;
    write_json(
        &out.join("sweep.json"),
        &SweepSummary {
            algorithm: learner.name(),
            env: &file.env_spec,
            config: &file.config,
            grid,
            reexplore,
            points: rows.len(),
            total_episodes_sampled: shared_episodes + rows.iter().map(|r| r.episodes_sampled).sum::<u64>(),
        },
    )
}

#[derive(Serialize)]
struct OracleReport<'a> {
    env: &'a str,
    class: PolicyClass,
    lambda: Vec<f64>,
    iota: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    best_values: Vec<f64>,
    #[serde(flatten)]
    solution: OracleSolution,
}

pub fn oracle(env_spec: &str, lambda: Vec<f64>, mu: Option<f64>, iota: f64, class: Class) -> CliResult<()> {
    let env = load_env(env_spec)?;
    let pref = Preference::new(lambda)?;
    let class = match class {
        Class::Deterministic => PolicyClass::Deterministic,
        Class::Stochastic => PolicyClass::Stochastic,
    };
    let solution = match mu {
        Some(mu) => exact_min_stch(&env, &pref, iota, mu, class)?,
        None => exact_min_tch(&env, &pref, iota, class)?,
    };
    let report = OracleReport {
        env: env_spec,
        class,
        lambda: pref.lambda().to_vec(),
        iota,
        mu,
        best_values: exact_best_values(&env).into_inner(),
        solution,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
