//! CSV traces and JSON summaries. Floats use Rust's shortest round-trip
//! formatting (with an exponent for very small or large magnitudes), so
//! identical inputs give byte-identical files.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algorithms::{RunConfig, RunResult, WeightVector};
use crate::error::Result;
use crate::momdp::ValueVector;
use crate::oracle::OracleSolution;

fn num(x: &f64) -> String {
    format!("{x:?}")
}

fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// One row per round: `round, objective, v1..vm, w1..wm`.
pub fn write_trace_csv<W: Write>(result: &RunResult, out: W) -> Result<()> {
    let m = result.mixture_value_trace.first().map_or(0, |v| v.len());
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["round".to_string(), "objective".to_string()];
    header.extend(numbered("v", m));
    header.extend(numbered("w", m));
    writer.write_record(&header)?;
    for (t, ((objective, value), w)) in result
        .objective_trace
        .iter()
        .zip(&result.mixture_value_trace)
        .zip(&result.weight_trace)
        .enumerate()
    {
        let mut row = vec![(t + 1).to_string(), num(objective)];
        row.extend(value.iter().map(num));
        row.extend(w.iter().map(num));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// One row per deterministic policy: `policy, v1..vm`.
pub fn write_values_csv<W: Write>(values: &[ValueVector], out: W) -> Result<()> {
    let m = values.first().map_or(0, |v| v.len());
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["policy".to_string()];
    header.extend(numbered("v", m));
    writer.write_record(&header)?;
    for (index, v) in values.iter().enumerate() {
        let mut row = vec![index.to_string()];
        row.extend(v.iter().map(num));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// One row per exploration round: `round, bonus_value`.
pub fn write_exploration_csv<W: Write>(bonus_value_trace: &[f64], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["round", "bonus_value"])?;
    for (t, v) in bonus_value_trace.iter().enumerate() {
        writer.write_record([(t + 1).to_string(), num(v)])?;
    }
    writer.flush()?;
    Ok(())
}

/// Outcome of one preference in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub lambda: Vec<f64>,
    pub value: ValueVector,
    pub objective: f64,
    pub oracle_objective: Option<f64>,
    pub error: Option<f64>,
    pub episodes_sampled: u64,
}

/// `index, lambda1..m, v1..m, objective, oracle, error, episodes`; missing
/// oracle values are left empty.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let m = rows.first().map_or(0, |r| r.lambda.len());
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["index".to_string()];
    header.extend(numbered("lambda", m));
    header.extend(numbered("v", m));
    header.extend(["objective", "oracle", "error", "episodes"].map(String::from));
    writer.write_record(&header)?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| num(&v));
    for r in rows {
        let mut row = vec![r.index.to_string()];
        row.extend(r.lambda.iter().map(num));
        row.extend(r.value.iter().map(num));
        row.push(num(&r.objective));
        row.push(opt(r.oracle_objective));
        row.push(opt(r.error));
        row.push(r.episodes_sampled.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// End-of-run digest with the full configuration echoed back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub env: String,
    pub config: RunConfig,
    pub rounds: usize,
    pub episodes_sampled: u64,
    pub final_objective: f64,
    pub final_mixture_value: ValueVector,
    pub final_weights: WeightVector,
    /// Exact minimum over the stochastic class, when the oracle ran.
    pub oracle_objective: Option<f64>,
    /// `final_objective − oracle_objective`.
    pub final_error: Option<f64>,
}

impl RunSummary {
    pub fn new(
        algorithm: &str,
        env: &str,
        config: &RunConfig,
        result: &RunResult,
        oracle: Option<&OracleSolution>,
    ) -> Option<Self> {
        let final_objective = result.final_objective()?;
        let oracle_objective = oracle.map(|o| o.objective);
        Some(Self {
            algorithm: algorithm.to_string(),
            env: env.to_string(),
            config: config.clone(),
            rounds: result.rounds(),
            episodes_sampled: result.episodes_sampled,
            final_objective,
            final_mixture_value: result.final_mixture_value()?.clone(),
            final_weights: result.weight_trace.last()?.clone(),
            oracle_objective,
            final_error: oracle_objective.map(|o| final_objective - o),
        })
    }
}
