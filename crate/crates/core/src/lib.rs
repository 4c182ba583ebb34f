//! Tabular multi-objective reinforcement learning with Tchebycheff and
//! smooth Tchebycheff scalarization.
//!
//! The crate is organized bottom-up:
//!
//! * [`momdp`]: the model, exact policy evaluation, occupancy measures, sampling.
//! * [`pareto`]: dominance, front enumeration over deterministic policies, the
//!   Pareto suboptimality gap and the vertex description of the value set.
//! * [`scalarization`]: linear, Tchebycheff and smooth Tchebycheff scalarizations.
//! * [`estimation`]: visit counts, empirical models and Hoeffding bonuses.
//! * [`algorithms`]: the online learners, preference-free exploration and the
//!   two planning stages.
//! * [`oracle`]: exact references used to score learned policies.
//! * [`report`]: CSV and JSON emission for runs and fronts.

pub mod algorithms;
pub mod envs;
pub mod error;
pub mod estimation;
pub mod momdp;
pub mod oracle;
pub mod pareto;
pub mod report;
pub mod scalarization;

pub use algorithms::{
    AlphaSchedule, EtaSchedule, ExplorationDataset, RunConfig, RunResult, WeightVector,
};
pub use error::{MorlError, Result};
pub use estimation::{Counts, EstimatedModel, ExplorationOption};
pub use oracle::{OracleSolution, PolicyClass, Witness};
pub use pareto::{FrontKind, ParetoFront};
pub use scalarization::{Preference, ScalarizationContext};
pub use momdp::{
    evaluate_policy, occupancy_of_policy, policy_of_occupancy, sample_episode, value_of_mixture,
    DeterministicPolicy, Dims, MixturePolicy, Momdp, NoiseMode, OccupancyMeasure, Policy, Step,
    Trajectory, ValueVector,
};
