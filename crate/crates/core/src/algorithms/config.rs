use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::estimation::{Counts, ExplorationOption};
use crate::momdp::NoiseMode;
use crate::scalarization::{Preference, DEFAULT_IOTA};

/// Step-size schedule for the weight updates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSchedule {
    /// `√(log m / (H² T))` for the Tchebycheff learners and `1/(μ t)` for
    /// the smooth ones.
    #[default]
    PaperDefault,
    /// The same value at every update after the first.
    Fixed(f64),
    /// `1/(2H√T)` for the smooth learners, independent of `μ`.
    SmallMuVariant,
}

/// Mixing weight toward uniform used by the smooth learners.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `1/t²`, or zero under [`EtaSchedule::SmallMuVariant`].
    #[default]
    PaperDefault,
    Fixed(f64),
}

fn default_iota() -> f64 {
    DEFAULT_IOTA
}

fn default_delta() -> f64 {
    0.1
}

/// Parameters shared by every learner. Fields a learner does not use are
/// ignored by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<Preference>,
    #[serde(default = "default_iota")]
    pub iota: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Online rounds `T`, or exploration episodes for the preference-free stage.
    pub rounds: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub eta_schedule: EtaSchedule,
    #[serde(default)]
    pub alpha_schedule: AlphaSchedule,
    #[serde(default)]
    pub exploration_option: ExplorationOption,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    /// Planning rounds `K`; defaults to a tenth of the exploration episodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planning_rounds: Option<u64>,
}

impl RunConfig {
    pub fn new(rounds: u64) -> Self {
        Self {
            preference: None,
            iota: DEFAULT_IOTA,
            mu: None,
            rounds,
            delta: default_delta(),
            eta_schedule: EtaSchedule::default(),
            alpha_schedule: AlphaSchedule::default(),
            exploration_option: ExplorationOption::default(),
            seed: 0,
            noise_mode: NoiseMode::default(),
            planning_rounds: None,
        }
    }

    pub fn with_preference(mut self, pref: Preference) -> Self {
        self.preference = Some(pref);
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(config("rounds must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.iota > 0.0) {
            return Err(config(format!("iota must be positive, got {}", self.iota)));
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(config(format!("mu must be positive, got {mu}")));
            }
        }
        if let EtaSchedule::Fixed(eta) = self.eta_schedule {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(config(format!("fixed step size must be non-negative, got {eta}")));
            }
        }
        if let AlphaSchedule::Fixed(alpha) = self.alpha_schedule {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(config(format!("fixed mixing weight must lie in [0, 1], got {alpha}")));
            }
        }
        if self.planning_rounds == Some(0) {
            return Err(config("planning rounds must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn require_preference(&self, m: usize) -> Result<&Preference> {
        let pref = self
            .preference
            .as_ref()
            .ok_or_else(|| config("this algorithm needs a preference"))?;
        if pref.len() != m {
            return Err(config(format!(
                "preference has {} entries but the model has {m} objectives",
                pref.len()
            )));
        }
        Ok(pref)
    }

    pub(crate) fn require_mu(&self) -> Result<f64> {
        self.mu.ok_or_else(|| config("smooth Tchebycheff learners need mu"))
    }

    pub(crate) fn forbid_mu(&self) -> Result<()> {
        match self.mu {
            Some(_) => Err(config("Tchebycheff learners do not take mu")),
            None => Ok(()),
        }
    }

    /// Planning rounds, falling back to a tenth of `exploration_episodes`.
    pub fn planning_rounds_for(&self, exploration_episodes: u64) -> u64 {
        self.planning_rounds.unwrap_or((exploration_episodes / 10).max(1))
    }

    /// Step size for the Tchebycheff update that opens round `t`
    /// (one-based) of a `total`-round run. `first_is_zero` selects the
    /// planning convention `η_0 = 0`.
    pub(crate) fn tch_eta(&self, t: u64, total: u64, m: usize, horizon: usize, first_is_zero: bool) -> Result<f64> {
        if first_is_zero && t == 1 {
            return Ok(0.0);
        }
        match self.eta_schedule {
            EtaSchedule::PaperDefault => {
                let h = horizon as f64;
                Ok(((m as f64).ln() / (h * h * total as f64)).sqrt())
            }
            EtaSchedule::Fixed(eta) => Ok(eta),
            EtaSchedule::SmallMuVariant => Err(config("small_mu_variant applies only to smooth learners")),
        }
    }

    /// `(η_{t−1}, α_{t−1})` for the smooth update opening round `t`.
    pub(crate) fn stch_eta_alpha(&self, t: u64, total: u64, mu: f64, horizon: usize) -> (f64, f64) {
        let j = t - 1;
        if j == 0 {
            return (0.0, 0.0);
        }
        let jf = j as f64;
        let eta = match self.eta_schedule {
            EtaSchedule::PaperDefault => 1.0 / (mu * jf),
            EtaSchedule::Fixed(eta) => eta,
            EtaSchedule::SmallMuVariant => 1.0 / (2.0 * horizon as f64 * (total as f64).sqrt()),
        };
        let alpha = match (self.alpha_schedule, self.eta_schedule) {
            (AlphaSchedule::Fixed(a), _) => a,
            (AlphaSchedule::PaperDefault, EtaSchedule::SmallMuVariant) => 0.0,
            (AlphaSchedule::PaperDefault, _) => 1.0 / (jf * jf),
        };
        (eta, alpha)
    }
}

/// Data collected by preference-free exploration, with the settings that
/// produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationDataset {
    pub counts: Counts,
    pub rounds: u64,
    pub delta: f64,
    pub exploration_option: ExplorationOption,
    pub seed: u64,
    pub noise_mode: NoiseMode,
}

impl ExplorationDataset {
    pub fn validate(&self) -> Result<()> {
        self.counts.validate()?;
        if self.rounds == 0 || self.counts.episodes() != self.rounds {
            return Err(config(format!(
                "dataset records {} episodes but declares {}",
                self.counts.episodes(),
                self.rounds
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config("dataset delta must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_and_tags() {
        let cfg: RunConfig = serde_json::from_str(r#"{"rounds": 10, "preference": [0.5, 0.5]}"#).unwrap();
        assert_eq!(cfg.iota, DEFAULT_IOTA);
        assert_eq!(cfg.delta, 0.1);
        assert_eq!(cfg.eta_schedule, EtaSchedule::PaperDefault);
        let cfg: RunConfig =
            serde_json::from_str(r#"{"rounds": 10, "eta_schedule": {"fixed": 0.25}, "exploration_option": "II"}"#)
                .unwrap();
        assert_eq!(cfg.eta_schedule, EtaSchedule::Fixed(0.25));
        assert_eq!(cfg.exploration_option, ExplorationOption::II);
        assert!(serde_json::from_str::<RunConfig>(r#"{"rounds": 10, "rounds_typo": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"rounds": 10, "preference": [0.5, 0.6]}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::new(0).validate().is_err());
        let mut cfg = RunConfig::new(5);
        cfg.delta = 1.0;
        assert!(cfg.validate().is_err());
        assert!(RunConfig::new(5).with_mu(0.0).validate().is_err());
        assert!(RunConfig::new(5).validate().is_ok());
    }

    #[test]
    fn schedules() {
        let cfg = RunConfig::new(100);
        let eta = cfg.tch_eta(1, 100, 2, 2, false).unwrap();
        assert!((eta - (2f64.ln() / 400.0).sqrt()).abs() < 1e-15);
        assert_eq!(cfg.tch_eta(1, 100, 2, 2, true).unwrap(), 0.0);
        assert_eq!(cfg.stch_eta_alpha(1, 100, 0.5, 2), (0.0, 0.0));
        assert_eq!(cfg.stch_eta_alpha(3, 100, 0.5, 2), (1.0, 0.25));
        let mut small = cfg.clone();
        small.eta_schedule = EtaSchedule::SmallMuVariant;
        assert_eq!(small.stch_eta_alpha(3, 100, 0.5, 2), (1.0 / 40.0, 0.0));
        assert!(small.tch_eta(2, 100, 2, 2, false).is_err());
        assert_eq!(cfg.planning_rounds_for(20_000), 2_000);
        assert_eq!(cfg.planning_rounds_for(3), 1);
    }
}
