//! Scenario configuration, the frame/slot calendar, and seeded random streams.

mod streams;

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use streams::{ArrivalStream, IndexedStream, RngStreams, StreamKind};

/// Thermal noise density used for the default noise power.
pub const NOISE_PSD_DBM_PER_HZ: f64 = -174.0;

/// Noise power in watts for a given density (dBm/Hz) over `bandwidth` Hz.
pub fn noise_power_from_psd(dbm_per_hz: f64, bandwidth: f64) -> f64 {
    10f64.powf((dbm_per_hz + 10.0 * bandwidth.log10() - 30.0) / 10.0)
}

/// The homogeneous task type plus its per-slot arrival probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSpec {
    /// Input size in bits.
    pub input_bits: f64,
    pub cycles_per_bit: f64,
    /// Latency requirement in seconds.
    pub deadline: f64,
    pub arrival_prob: f64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            input_bits: 5_000.0,
            cycles_per_bit: 2_640.0,
            deadline: 0.01,
            arrival_prob: 0.5,
        }
    }
}

impl TaskSpec {
    /// Total CPU cycles needed for one task.
    pub fn total_cycles(&self) -> f64 {
        self.cycles_per_bit * self.input_bits
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSchedule {
    /// Slot length in seconds.
    pub slot_len: f64,
    /// Slots per frame.
    pub frame_size: u32,
    /// Outage slots at the start of a frame in which the service migrates.
    pub migration_delay: u32,
    /// Number of frames simulated.
    pub horizon: u32,
}

impl Default for FrameSchedule {
    fn default() -> Self {
        FrameSchedule {
            slot_len: 0.01,
            frame_size: 500,
            migration_delay: 5,
            horizon: 2_500,
        }
    }
}

/// Slot sets of one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameSlots {
    pub migration: Range<u64>,
    pub offloadable: Range<u64>,
}

impl FrameSchedule {
    /// Fraction of a frame lost to a migration.
    pub fn alpha(&self) -> f64 {
        self.migration_delay as f64 / self.frame_size as f64
    }

    pub fn total_slots(&self) -> u64 {
        self.horizon as u64 * self.frame_size as u64
    }

    pub fn frame_duration(&self) -> f64 {
        self.slot_len * self.frame_size as f64
    }

    /// Migration and offloadable slots of frame `k`. The two ranges are
    /// contiguous and together cover the frame.
    pub fn slot_index_sets(&self, k: u64, migrated: bool) -> FrameSlots {
        let start = k * self.frame_size as u64;
        let end = start + self.frame_size as u64;
        let outage = if migrated { self.migration_delay as u64 } else { 0 };
        FrameSlots {
            migration: start..start + outage,
            offloadable: start + outage..end,
        }
    }
}

/// Multiuser extension parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiuserConfig {
    pub num_users: usize,
    /// Compute rate a BS offers a lone user, cycles/s.
    pub base_rate: f64,
    /// Per-additional-user multiplicative rate decay.
    pub degradation: f64,
    /// Each user's constant speed is drawn uniformly from this set.
    pub speeds: Vec<f64>,
}

impl Default for MultiuserConfig {
    fn default() -> Self {
        MultiuserConfig {
            num_users: 100,
            base_rate: 2e10,
            degradation: 0.926,
            speeds: vec![2.0, 4.0, 6.0, 8.0, 10.0],
        }
    }
}

/// Every network, timing, channel and control parameter of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub num_bs: usize,
    /// Side of the square service area, meters.
    pub area_side: f64,
    /// Channel bandwidth, Hz.
    pub bandwidth: f64,
    /// Noise power, watts.
    pub noise_power: f64,
    /// Peak transmit power, watts.
    pub peak_power: f64,
    pub compute_rate_min: f64,
    pub compute_rate_max: f64,
    pub control_v: f64,
    pub reliability_eps: f64,
    /// Single-user speed, m/s.
    pub user_speed: f64,
    /// Margin used by the RSS-with-hysteresis benchmark.
    pub hysteresis_margin: f64,
    pub task: TaskSpec,
    pub schedule: FrameSchedule,
    pub multiuser: MultiuserConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            num_bs: 25,
            area_side: 2_000.0,
            bandwidth: 1e7,
            noise_power: noise_power_from_psd(NOISE_PSD_DBM_PER_HZ, 1e7),
            peak_power: 1.0,
            compute_rate_min: 1e10,
            compute_rate_max: 2e10,
            control_v: 5_000.0,
            reliability_eps: 1e-3,
            user_speed: 5.0,
            hysteresis_margin: 2.0,
            task: TaskSpec::default(),
            schedule: FrameSchedule::default(),
            multiuser: MultiuserConfig::default(),
        }
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(msg))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.task;
        let s = &self.schedule;
        let m = &self.multiuser;
        check(t.input_bits > 0.0, "task.input_bits must be positive")?;
        check(t.cycles_per_bit > 0.0, "task.cycles_per_bit must be positive")?;
        check(s.slot_len > 0.0, "schedule.slot_len must be positive")?;
        check(
            t.deadline > 0.0 && t.deadline <= s.slot_len,
            "task.deadline must lie in (0, slot_len]",
        )?;
        check(
            (0.0..=1.0).contains(&t.arrival_prob),
            "task.arrival_prob must lie in [0, 1]",
        )?;
        check(s.frame_size >= 1, "schedule.frame_size must be at least 1")?;
        check(
            s.migration_delay < s.frame_size,
            "schedule.migration_delay must be smaller than frame_size",
        )?;
        check(s.horizon >= 1, "schedule.horizon must be at least 1")?;
        check(self.num_bs >= 1, "num_bs must be at least 1")?;
        check(self.area_side > 0.0, "area_side must be positive")?;
        check(self.bandwidth > 0.0, "bandwidth must be positive")?;
        check(self.noise_power > 0.0, "noise_power must be positive")?;
        check(self.peak_power > 0.0, "peak_power must be positive")?;
        check(
            self.compute_rate_min > 0.0 && self.compute_rate_min <= self.compute_rate_max,
            "compute rates must satisfy 0 < compute_rate_min <= compute_rate_max",
        )?;
        check(
            self.reliability_eps > 0.0 && self.reliability_eps < 1.0,
            "reliability_eps must lie in (0, 1)",
        )?;
        check(self.control_v >= 0.0, "control_v must be non-negative")?;
        check(self.user_speed > 0.0, "user_speed must be positive")?;
        check(
            self.hysteresis_margin >= 0.0,
            "hysteresis_margin must be non-negative",
        )?;
        check(m.num_users >= 1, "multiuser.num_users must be at least 1")?;
        check(m.base_rate > 0.0, "multiuser.base_rate must be positive")?;
        check(
            m.degradation > 0.0 && m.degradation <= 1.0,
            "multiuser.degradation must lie in (0, 1]",
        )?;
        check(
            !m.speeds.is_empty() && m.speeds.iter().all(|&v| v > 0.0),
            "multiuser.speeds must be a non-empty list of positive speeds",
        )?;
        Ok(())
    }

    pub fn streams(&self) -> RngStreams {
        RngStreams::new(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_noise_power_matches_density() {
        let cfg = ScenarioConfig::default();
        assert!((cfg.noise_power - 3.981_071_705_534_97e-14).abs() < 1e-24);
        assert_eq!(cfg.task.total_cycles(), 1.32e7);
    }

    #[test]
    fn slot_sets_with_migration() {
        let s = FrameSchedule::default();
        let sets = s.slot_index_sets(0, true);
        assert_eq!(sets.migration, 0..5);
        assert_eq!(sets.offloadable, 5..500);
    }

    #[test]
    fn slot_sets_without_migration() {
        let s = FrameSchedule::default();
        let sets = s.slot_index_sets(2, false);
        assert!(sets.migration.is_empty());
        assert_eq!(sets.offloadable, 1000..1500);
    }

    #[test]
    fn zero_delay_migration_is_instant() {
        let s = FrameSchedule {
            frame_size: 10,
            migration_delay: 0,
            ..Default::default()
        };
        let sets = s.slot_index_sets(1, true);
        assert!(sets.migration.is_empty());
        assert_eq!(sets.offloadable, 10..20);
        assert_eq!(s.alpha(), 0.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::from_toml_str("seed = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
        let err = ScenarioConfig::from_toml_str("[task]\nweight = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = ScenarioConfig::from_toml_str("control_v = 2000\n[schedule]\nmigration_delay = 10\n")
            .unwrap();
        assert_eq!(cfg.control_v, 2000.0);
        assert_eq!(cfg.schedule.migration_delay, 10);
        assert_eq!(cfg.schedule.frame_size, 500);
        assert_eq!(cfg.num_bs, 25);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ScenarioConfig::default();
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn invalid_values_are_rejected() {
        for doc in [
            "[schedule]\nmigration_delay = 500\n",
            "[task]\ndeadline = 0.02\n",
            "[task]\narrival_prob = 1.5\n",
            "reliability_eps = 0.0\n",
            "compute_rate_min = 3e10\n",
            "num_bs = 0\n",
            "control_v = -1\n",
        ] {
            let err = ScenarioConfig::from_toml_str(doc).unwrap_err();
            assert!(matches!(err, Error::InvalidConfig(_)), "{doc}: {err}");
        }
    }
}
