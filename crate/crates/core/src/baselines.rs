//! Signal-strength handover baselines and their reliability-gated power rule.

use crate::offloading::{PhyModel, SlotDecisionContext, SlotOutcome};

/// Power cap fraction used while the running failure rate meets the target.
pub const SAVING_POWER_FRACTION: f64 = 0.05;

/// Strongest BS; lowest index on ties.
pub fn rss_only_decision(gains: &[f64]) -> usize {
    let mut best = 0;
    for (n, &h) in gains.iter().enumerate() {
        if h > gains[best] {
            best = n;
        }
    }
    best
}

/// Moves to the strongest other BS only when it beats the current one by
/// the factor `1 + margin`.
pub fn rss_hysteresis_decision(gains: &[f64], current: usize, margin: f64) -> usize {
    let mut best: Option<usize> = None;
    for (n, &h) in gains.iter().enumerate() {
        if n != current && best.map_or(true, |b| h > gains[b]) {
            best = Some(n);
        }
    }
    match best {
        Some(b) if gains[b] > (1.0 + margin) * gains[current] => b,
        _ => current,
    }
}

/// Running failure rate of a benchmark user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkState {
    pub failures: u64,
    pub slots: u64,
    pub eps: f64,
}

impl BenchmarkState {
    pub fn new(eps: f64) -> Self {
        BenchmarkState {
            failures: 0,
            slots: 0,
            eps,
        }
    }

    /// Cumulative failures over elapsed slots; 0 before the first slot.
    pub fn failure_rate(&self) -> f64 {
        if self.slots == 0 {
            0.0
        } else {
            self.failures as f64 / self.slots as f64
        }
    }

    pub fn record(&mut self, failed: bool) {
        self.slots += 1;
        self.failures += failed as u64;
    }

    /// Full peak power while behind the target, a small fraction otherwise.
    pub fn power_cap(&self, peak_power: f64) -> f64 {
        if self.failure_rate() > self.eps {
            peak_power
        } else {
            SAVING_POWER_FRACTION * peak_power
        }
    }
}

/// Offload at `p_min` if it fits under the reliability-gated cap.
pub fn benchmark_power(phy: &PhyModel, ctx: &SlotDecisionContext, state: &BenchmarkState) -> SlotOutcome {
    if !ctx.arrival {
        return SlotOutcome::IDLE;
    }
    if ctx.during_migration {
        return SlotOutcome::OUTAGE;
    }
    phy.offload_below(ctx.gain, ctx.compute_rate, state.power_cap(phy.peak_power))
}
