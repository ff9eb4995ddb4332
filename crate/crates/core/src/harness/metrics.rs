//! Run-level accumulation of energy, failures and queue samples.

use serde::{Deserialize, Serialize};

use crate::offloading::SlotOutcome;

/// Fraction of frames, counted from the end, that forms the convergence window.
pub const FINAL_WINDOW_FRACTION: f64 = 0.2;
/// Slack on `ε` granted to the final-window failure rate.
pub const EPS_SLACK: f64 = 1.2;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsAccumulator {
    pub energy: f64,
    pub failures: u64,
    pub arrivals: u64,
    pub drops: u64,
    pub outages: u64,
    pub slots: u64,
    pub migrations: u64,
    /// `Q` at the start of every frame.
    pub frame_queue: Vec<f64>,
    pub frame_energy: Vec<f64>,
    pub frame_failures: Vec<u64>,
    frame_slots: Vec<u64>,
    cur_energy: f64,
    cur_failures: u64,
    cur_slots: u64,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn begin_frame(&mut self, queue_len: f64, migrated: bool) {
        self.frame_queue.push(queue_len);
        self.migrations += migrated as u64;
        self.cur_energy = 0.0;
        self.cur_failures = 0;
        self.cur_slots = 0;
    }

    pub fn record_slot(&mut self, arrival: bool, out: &SlotOutcome) {
        debug_assert!(!out.failed || arrival);
        self.slots += 1;
        self.cur_slots += 1;
        self.arrivals += arrival as u64;
        self.energy += out.energy;
        self.cur_energy += out.energy;
        if out.failed {
            self.failures += 1;
            self.cur_failures += 1;
            if out.dropped {
                self.drops += 1;
            } else {
                self.outages += 1;
            }
        }
    }

    pub fn end_frame(&mut self) {
        self.frame_energy.push(self.cur_energy);
        self.frame_failures.push(self.cur_failures);
        self.frame_slots.push(self.cur_slots);
    }

    pub fn frames(&self) -> usize {
        self.frame_energy.len()
    }

    /// Failures per slot over the last `FINAL_WINDOW_FRACTION` of frames.
    pub fn final_window_failure_rate(&self) -> f64 {
        let k = self.frames();
        if k == 0 {
            return 0.0;
        }
        let w = ((k as f64 * FINAL_WINDOW_FRACTION).ceil() as usize).clamp(1, k);
        let fails: u64 = self.frame_failures[k - w..].iter().sum();
        let slots: u64 = self.frame_slots[k - w..].iter().sum();
        if slots == 0 {
            0.0
        } else {
            fails as f64 / slots as f64
        }
    }

    pub fn report(&self, scheme: &str, seed: u64, eps: f64) -> MetricsReport {
        let slots = self.slots.max(1) as f64;
        let frames = self.frames();
        let mean_queue = if frames == 0 {
            0.0
        } else {
            self.frame_queue.iter().sum::<f64>() / frames as f64
        };
        let fw = self.final_window_failure_rate();
        MetricsReport {
            scheme: scheme.to_string(),
            seed,
            frames: frames as u64,
            slots: self.slots,
            energy_avg: self.energy / slots,
            failure_rate: self.failures as f64 / slots,
            final_window_failure_rate: fw,
            satisfies_eps: fw <= EPS_SLACK * eps,
            mean_queue,
            max_queue: self.frame_queue.iter().cloned().fold(0.0, f64::max),
            migration_pct: if frames == 0 {
                0.0
            } else {
                100.0 * self.migrations as f64 / frames as f64
            },
            arrivals: self.arrivals,
            failures: self.failures,
            drops: self.drops,
            outages: self.outages,
            total_energy: self.energy,
        }
    }
}

/// Flat summary of one run; one CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scheme: String,
    pub seed: u64,
    pub frames: u64,
    pub slots: u64,
    /// Joules per slot.
    pub energy_avg: f64,
    /// Failures per slot.
    pub failure_rate: f64,
    pub final_window_failure_rate: f64,
    pub satisfies_eps: bool,
    /// Mean of the frame-start queue lengths.
    pub mean_queue: f64,
    pub max_queue: f64,
    pub migration_pct: f64,
    pub arrivals: u64,
    pub failures: u64,
    pub drops: u64,
    pub outages: u64,
    pub total_energy: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities() {
        let mut m = MetricsAccumulator::new();
        for k in 0..10 {
            m.begin_frame(k as f64, k % 2 == 0);
            for t in 0..4 {
                let out = match t {
                    0 => SlotOutcome::OUTAGE,
                    1 => SlotOutcome {
                        power: 0.1,
                        failed: false,
                        energy: 0.5,
                        dropped: false,
                    },
                    2 => SlotOutcome::DROPPED,
                    _ => SlotOutcome::IDLE,
                };
                m.record_slot(t != 3, &out);
            }
            m.end_frame();
        }
        let r = m.report("proposed", 1, 0.1);
        assert_eq!(r.slots, 40);
        assert_eq!(r.failure_rate, 20.0 / 40.0);
        assert_eq!(r.energy_avg, 5.0 / 40.0);
        assert_eq!((r.drops, r.outages, r.arrivals), (10, 10, 30));
        assert_eq!(r.migration_pct, 50.0);
        assert_eq!(r.mean_queue, 4.5);
        assert_eq!(r.final_window_failure_rate, 0.5);
        assert!(!r.satisfies_eps);
        assert!(r.failures <= r.arrivals);
    }

    #[test]
    fn empty_run() {
        let r = MetricsAccumulator::new().report("rss", 0, 1e-3);
        assert_eq!((r.frames, r.energy_avg, r.final_window_failure_rate), (0, 0.0, 0.0));
    }
}
