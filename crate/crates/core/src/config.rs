//! Flat `key = value` experiment files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Unknown
//! keys are an error. Keys:
//!
//! ```text
//! alpha0 = 1.0
//! alpha1 = 0.1
//! l1 = 0.5
//! liquidity = fgn:H=0.3333333333333333   # or poisson:lambda=1, white
//! noise = gaussian
//! sample_sizes = 100, 1000, 10000, 100000
//! replications = 1000
//! lag = 1
//! master_seed = 1
//! init_x_squared = 1.7
//! burn_in = 0
//! output_dir = out
//! bins = 20
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::montecarlo::ExperimentConfig;
use crate::sim::NoiseMoments;

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))
}

pub fn parse_noise(value: &str) -> Result<NoiseMoments> {
    match value.trim().to_ascii_lowercase().as_str() {
        "gaussian" | "normal" => Ok(NoiseMoments::gaussian()),
        other => Err(Error::Config(format!(
            "unknown noise preset {other:?} (supported: gaussian)"
        ))),
    }
}

/// Set one key on `cfg`.
pub fn apply(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key.trim() {
        "alpha0" => cfg.params.alpha0 = parse(key, value)?,
        "alpha1" => cfg.params.alpha1 = parse(key, value)?,
        "l1" => cfg.params.l1 = parse(key, value)?,
        "liquidity" => cfg.liquidity = value.parse()?,
        "noise" => cfg.noise = parse_noise(value)?,
        "sample_sizes" => {
            cfg.sample_sizes = value
                .split(',')
                .map(|v| parse::<usize>(key, v.trim()))
                .collect::<Result<_>>()?
        }
        "replications" => cfg.replications = parse(key, value)?,
        "lag" => cfg.lag = parse(key, value)?,
        "master_seed" => cfg.master_seed = parse(key, value)?,
        "init_x_squared" => cfg.init_x_squared = parse(key, value)?,
        "burn_in" => cfg.burn_in = parse(key, value)?,
        "output_dir" => cfg.output_dir = PathBuf::from(value),
        "bins" => cfg.bins = parse(key, value)?,
        other => return Err(Error::Config(format!("unknown key {other:?}"))),
    }
    Ok(())
}

/// Parse a config text on top of the defaults. Not validated.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value, got {raw:?}", i + 1))
        })?;
        apply(&mut cfg, key, value).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
