use std::fs;
use std::path::Path;

use morl_core::envs;
use morl_core::{ExplorationDataset, Momdp, MorlError, RunConfig};
use serde_json::Value;

use crate::{CliError, CliResult};

/// Builtin name, `random:…` spec, or path to a JSON model.
pub fn load_env(spec: &str) -> CliResult<Momdp> {
    if envs::BUILTIN_NAMES.contains(&spec) || spec.starts_with("random:") {
        return Ok(envs::builtin(spec)?);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "`{spec}` is neither a builtin environment ({}), a random:S:A:H:m:seed spec, nor a file",
            envs::BUILTIN_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// A run configuration file: the [`RunConfig`] fields plus `env`.
pub struct ConfigFile {
    pub env_spec: String,
    pub env: Momdp,
    pub config: RunConfig,
}

pub fn load_config(path: &Path) -> CliResult<ConfigFile> {
    let text = fs::read_to_string(path)?;
    let mut value: Value = serde_json::from_str(&text)?;
    let env_spec = match value.as_object_mut().and_then(|o| o.remove("env")) {
        Some(Value::String(s)) => s,
        Some(_) => return Err(MorlError::Config("`env` must be a string".into()).into()),
        None => return Err(MorlError::Config("configuration needs an `env` field".into()).into()),
    };
    let config: RunConfig = serde_json::from_value(value)?;
    config.validate()?;
    let env = load_env(&env_spec)?;
    Ok(ConfigFile { env_spec, env, config })
}

pub fn load_dataset(path: &Path) -> CliResult<ExplorationDataset> {
    let text = fs::read_to_string(path)?;
    let dataset: ExplorationDataset = serde_json::from_str(&text)?;
    dataset.validate()?;
    Ok(dataset)
}
