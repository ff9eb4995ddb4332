//! One-parameter sweeps with replications, run in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::single::{simulate, SimOutput};
use super::Scheme;
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// Parameters a sweep may vary.
pub const SWEEPABLE: &[&str] = &[
    "control_v",
    "reliability_eps",
    "arrival_prob",
    "migration_delay",
    "user_speed",
    "hysteresis_margin",
    "peak_power",
    "num_bs",
    "frame_size",
    "compute_rate_max",
    "num_users",
    "degradation",
];

fn one() -> usize {
    1
}

fn proposed_only() -> Vec<Scheme> {
    vec![Scheme::Proposed]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default = "proposed_only")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub base: ScenarioConfig,
}

impl SweepSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one replication".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one scheme".into()));
        }
        self.base.validate()?;
        for &v in &self.values {
            let mut cfg = self.base.clone();
            apply_parameter(&mut cfg, &self.parameter, v)?;
            cfg.validate()?;
        }
        Ok(())
    }
}

fn as_count(name: &str, value: f64) -> Result<u32> {
    if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
        return Err(Error::InvalidConfig(format!("{name} must be a non-negative integer, got {value}")));
    }
    Ok(value as u32)
}

/// Sets `name` to `value` on `cfg`.
pub fn apply_parameter(cfg: &mut ScenarioConfig, name: &str, value: f64) -> Result<()> {
    match name {
        "control_v" => cfg.control_v = value,
        "reliability_eps" => cfg.reliability_eps = value,
        "arrival_prob" => cfg.task.arrival_prob = value,
        "migration_delay" => cfg.schedule.migration_delay = as_count(name, value)?,
        "user_speed" => cfg.user_speed = value,
        "hysteresis_margin" => cfg.hysteresis_margin = value,
        "peak_power" => cfg.peak_power = value,
        "num_bs" => cfg.num_bs = as_count(name, value)? as usize,
        "frame_size" => cfg.schedule.frame_size = as_count(name, value)?,
        "compute_rate_max" => cfg.compute_rate_max = value,
        "num_users" => cfg.multiuser.num_users = as_count(name, value)? as usize,
        "degradation" => cfg.multiuser.degradation = value,
        other => {
            return Err(Error::InvalidConfig(format!(
                "cannot sweep {other:?}; sweepable: {}",
                SWEEPABLE.join(", ")
            )))
        }
    }
    Ok(())
}

/// Seed of replication `rep` of a run based on `cfg`. Values of one sweep
/// share seeds, so they see the same channels and arrivals.
pub fn replication_seed(cfg: &ScenarioConfig, rep: usize) -> u64 {
    cfg.streams().replication_seed(rep as u64)
}

/// Runs `reps` replications of `cfg` under `scheme` in parallel.
pub fn run_replicated(cfg: &ScenarioConfig, scheme: Scheme, reps: usize) -> Vec<Result<SimOutput>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.seed = replication_seed(cfg, r);
            simulate(&c, scheme)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub scheme: Scheme,
    pub replication: u64,
    pub seed: u64,
    pub error: Option<String>,
    pub energy_avg: Option<f64>,
    pub failure_rate: Option<f64>,
    pub final_window_failure_rate: Option<f64>,
    pub satisfies_eps: Option<bool>,
    pub mean_queue: Option<f64>,
    pub migration_pct: Option<f64>,
    pub drift_violations: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMean {
    pub parameter: String,
    pub value: f64,
    pub scheme: Scheme,
    pub runs: u64,
    pub failed_runs: u64,
    pub energy_avg: f64,
    pub failure_rate: f64,
    pub final_window_failure_rate: f64,
    pub mean_queue: f64,
    pub migration_pct: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub means: Vec<SweepMean>,
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    spec.validate()?;
    let jobs: Vec<(f64, Scheme, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| {
            spec.schemes
                .iter()
                .flat_map(move |&s| (0..spec.replications).map(move |r| (v, s, r)))
        })
        .collect();
    let rows: Vec<SweepRow> = jobs
        .into_par_iter()
        .map(|(value, scheme, rep)| {
            let mut cfg = spec.base.clone();
            apply_parameter(&mut cfg, &spec.parameter, value).expect("validated");
            cfg.seed = replication_seed(&spec.base, rep);
            let res = simulate(&cfg, scheme);
            let ok = res.as_ref().ok();
            SweepRow {
                parameter: spec.parameter.clone(),
                value,
                scheme,
                replication: rep as u64,
                seed: cfg.seed,
                error: res.as_ref().err().map(|e| e.to_string()),
                energy_avg: ok.map(|o| o.report.energy_avg),
                failure_rate: ok.map(|o| o.report.failure_rate),
                final_window_failure_rate: ok.map(|o| o.report.final_window_failure_rate),
                satisfies_eps: ok.map(|o| o.report.satisfies_eps),
                mean_queue: ok.map(|o| o.report.mean_queue),
                migration_pct: ok.map(|o| o.report.migration_pct),
                drift_violations: ok.map(|o| o.drift.violations as u64),
            }
        })
        .collect();
    let mut means = Vec::new();
    for &value in &spec.values {
        for &scheme in &spec.schemes {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.value == value && r.scheme == scheme && r.error.is_none())
                .collect();
            let n = group.len().max(1) as f64;
            let mean = |f: fn(&SweepRow) -> Option<f64>| group.iter().filter_map(|r| f(r)).sum::<f64>() / n;
            means.push(SweepMean {
                parameter: spec.parameter.clone(),
                value,
                scheme,
                runs: group.len() as u64,
                failed_runs: (spec.replications - group.len()) as u64,
                energy_avg: mean(|r| r.energy_avg),
                failure_rate: mean(|r| r.failure_rate),
                final_window_failure_rate: mean(|r| r.final_window_failure_rate),
                mean_queue: mean(|r| r.mean_queue),
                migration_pct: mean(|r| r.migration_pct),
            });
        }
    }
    Ok(SweepSummary { rows, means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::single::run_single_user;

    const SPEC: &str = r#"
parameter = "control_v"
values = [1000.0, 5000.0]
replications = 2

[base]
seed = 7
[base.schedule]
horizon = 20
"#;

    #[test]
    fn parses_and_runs() {
        let spec = SweepSpec::from_toml_str(SPEC).unwrap();
        assert_eq!(spec.schemes, vec![Scheme::Proposed]);
        let out = sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert_eq!(out.means.len(), 2);
        assert!(out.rows.iter().all(|r| r.error.is_none()));
        // replication seeds are shared across values
        assert_eq!(out.rows[0].seed, out.rows[2].seed);
        assert_ne!(out.rows[0].seed, out.rows[1].seed);
    }

    #[test]
    fn single_value_matches_direct_run() {
        let mut spec = SweepSpec::from_toml_str(SPEC).unwrap();
        spec.values = vec![5000.0];
        spec.replications = 1;
        let out = sweep(&spec).unwrap();
        let mut cfg = spec.base.clone();
        cfg.seed = out.rows[0].seed;
        let direct = run_single_user(&cfg).unwrap();
        assert_eq!(out.rows[0].energy_avg, Some(direct.report.energy_avg));
        assert_eq!(out.means[0].energy_avg, direct.report.energy_avg);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SweepSpec::from_toml_str("parameter = \"control_v\"\nvalues = []\n").is_err());
        assert!(SweepSpec::from_toml_str("parameter = \"colour\"\nvalues = [1.0]\n").is_err());
        assert!(SweepSpec::from_toml_str("parameter = \"migration_delay\"\nvalues = [2.5]\n").is_err());
        assert!(SweepSpec::from_toml_str("parameter = \"control_v\"\nvalues = [1.0]\nreplications = 0\n").is_err());
        assert!(SweepSpec::from_toml_str("parameter = \"control_v\"\nvalues = [1.0]\nextra = 1\n").is_err());
        // migration delay must stay below the frame size
        assert!(SweepSpec::from_toml_str("parameter = \"migration_delay\"\nvalues = [500.0]\n").is_err());
    }
}
