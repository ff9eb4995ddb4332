//! Per-slot offloading model: latency, energy, the power thresholds and the
//! threshold-structured optimal power rule.

use crate::scenario::ScenarioConfig;

/// Link and task constants shared by every slot decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhyModel {
    pub input_bits: f64,
    /// Cycles for the whole task.
    pub total_cycles: f64,
    pub deadline: f64,
    pub bandwidth: f64,
    pub noise_power: f64,
    pub peak_power: f64,
}

impl PhyModel {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        PhyModel {
            input_bits: cfg.task.input_bits,
            total_cycles: cfg.task.total_cycles(),
            deadline: cfg.task.deadline,
            bandwidth: cfg.bandwidth,
            noise_power: cfg.noise_power,
            peak_power: cfg.peak_power,
        }
    }

    /// Transmission time left once computing is accounted for, `[τ_d - ξ/f]⁺`.
    pub fn time_budget(&self, compute_rate: f64) -> f64 {
        (self.deadline - self.total_cycles / compute_rate).max(0.0)
    }

    /// Whether a server at `compute_rate` can finish a task in time at all.
    pub fn is_feasible(&self, compute_rate: f64) -> bool {
        self.time_budget(compute_rate) > 0.0
    }

    /// `2^(L / (W b)) - 1`: the SNR needed to push the task through in `budget` seconds.
    pub fn required_snr(&self, budget: f64) -> f64 {
        (self.input_bits / (self.bandwidth * budget) * std::f64::consts::LN_2).exp_m1()
    }

    /// Upload plus compute time at power `p` over gain `h`.
    pub fn latency(&self, h: f64, f: f64, p: f64) -> f64 {
        self.transmission_time(h, p) + self.total_cycles / f
    }

    pub fn transmission_time(&self, h: f64, p: f64) -> f64 {
        self.input_bits / (self.bandwidth * (p * h / self.noise_power).ln_1p() / std::f64::consts::LN_2)
    }

    /// Upload energy at power `p` over gain `h`.
    pub fn energy(&self, h: f64, p: f64) -> f64 {
        p * self.transmission_time(h, p)
    }

    /// Smallest power meeting the deadline, or `None` when computing alone
    /// already uses up the deadline.
    pub fn p_min(&self, h: f64, f: f64) -> Option<f64> {
        let budget = self.time_budget(f);
        (budget > 0.0).then(|| self.noise_power / h * self.required_snr(budget))
    }

    /// Largest power worth spending on one task in a frame with queue `q`:
    /// beyond it, dropping (price `q`) is cheaper than `V` times the energy.
    pub fn p_max(&self, f: f64, q: f64, v: f64) -> f64 {
        let budget = self.time_budget(f);
        if budget <= 0.0 {
            return 0.0;
        }
        if v == 0.0 {
            // energy is free
            return self.peak_power;
        }
        (q / (v * budget)).min(self.peak_power)
    }

    /// Threshold rule: transmit at `p_min` when it does not exceed `p_max`,
    /// otherwise drop. Nothing is sent in migration slots or empty slots.
    pub fn optimal_power(&self, ctx: &SlotDecisionContext) -> SlotOutcome {
        if !ctx.arrival {
            return SlotOutcome::IDLE;
        }
        if ctx.during_migration {
            return SlotOutcome::OUTAGE;
        }
        let p_max = self.p_max(ctx.compute_rate, ctx.queue_len, ctx.control_v);
        self.offload_below(ctx.gain, ctx.compute_rate, p_max)
    }

    /// Offload at `p_min` if it is at most `cap`, else drop.
    pub fn offload_below(&self, h: f64, f: f64, cap: f64) -> SlotOutcome {
        match self.p_min(h, f) {
            Some(p) if p <= cap => SlotOutcome {
                power: p,
                failed: false,
                // at p_min the upload takes exactly the remaining budget
                energy: p * self.time_budget(f),
                dropped: false,
            },
            _ => SlotOutcome::DROPPED,
        }
    }
}

/// Inputs of one slot's power decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotDecisionContext {
    pub gain: f64,
    pub compute_rate: f64,
    /// Queue length at the start of the frame.
    pub queue_len: f64,
    pub control_v: f64,
    pub during_migration: bool,
    pub arrival: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotOutcome {
    pub power: f64,
    /// Task failure indicator.
    pub failed: bool,
    pub energy: f64,
    /// An arrival outside the migration outage that was not offloaded.
    pub dropped: bool,
}

impl SlotOutcome {
    pub const IDLE: SlotOutcome = SlotOutcome {
        power: 0.0,
        failed: false,
        energy: 0.0,
        dropped: false,
    };
    pub const OUTAGE: SlotOutcome = SlotOutcome {
        power: 0.0,
        failed: true,
        energy: 0.0,
        dropped: false,
    };
    pub const DROPPED: SlotOutcome = SlotOutcome {
        power: 0.0,
        failed: true,
        energy: 0.0,
        dropped: true,
    };

    pub fn failure(&self) -> f64 {
        if self.failed {
            1.0
        } else {
            0.0
        }
    }

    /// `V·E + Q·X`.
    pub fn cost(&self, v: f64, q: f64) -> f64 {
        v * self.energy + q * self.failure()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phy() -> PhyModel {
        PhyModel::from_config(&ScenarioConfig::default())
    }

    // Bisection on latency(h, f, p) = deadline; independent of the closed form.
    fn bisect_p_min(phy: &PhyModel, h: f64, f: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while phy.latency(h, f, hi) > phy.deadline {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phy.latency(h, f, mid) > phy.deadline {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    #[test]
    fn latency_at_unit_snr() {
        let phy = phy();
        let h = 1e-10;
        let p = phy.noise_power / h;
        let d = phy.latency(h, 2e10, p);
        assert!((d - 1.16e-3).abs() < 1e-15, "{d}");
        let floor = phy.total_cycles / 2e10;
        assert!(phy.latency(h, 2e10, 1e30) - floor < 1e-5);
        for p in [1e-6, 1e-3, 0.5] {
            assert!(phy.latency(h, 2e10, 2.0 * p) < phy.latency(h, 2e10, p));
        }
    }

    #[test]
    fn p_min_matches_bisection() {
        let phy = phy();
        let oracle = bisect_p_min(&phy, 1e-10, 2e10);
        let p = phy.p_min(1e-10, 2e10).unwrap();
        assert!((p / oracle - 1.0).abs() < 1e-9, "{p} vs {oracle}");
        assert!((p - 1.505e-5).abs() < 0.001e-5);
        let d = phy.latency(1e-10, 2e10, p);
        assert!((d / phy.deadline - 1.0).abs() < 1e-9);
        let half = phy.p_min(2e-10, 2e10).unwrap();
        assert!((half - p / 2.0).abs() <= 1e-15 * p);
    }

    #[test]
    fn p_min_infeasible_when_compute_eats_deadline() {
        let phy = phy();
        let f = phy.total_cycles / phy.deadline;
        assert_eq!(phy.p_min(1e-10, f), None);
        assert_eq!(phy.p_max(f, 10.0, 5000.0), 0.0);
        let ctx = SlotDecisionContext {
            gain: 1.0,
            compute_rate: f,
            queue_len: 100.0,
            control_v: 1.0,
            during_migration: false,
            arrival: true,
        };
        assert_eq!(phy.optimal_power(&ctx), SlotOutcome::DROPPED);
    }

    #[test]
    fn energy_at_p_min() {
        let phy = phy();
        let p = bisect_p_min(&phy, 1e-10, 2e10);
        let e = phy.energy(1e-10, p);
        let budget = phy.deadline - phy.total_cycles / 2e10;
        assert!((e / (p * budget) - 1.0).abs() < 1e-8);
        assert!((e - 1.406e-7).abs() < 0.001e-7, "{e}");
        assert!(phy.energy(1e-10, 2.0 * p) > e);
        assert!(phy.energy(2e-10, p) < e);
    }

    #[test]
    fn p_max_regimes() {
        let phy = phy();
        assert_eq!(phy.p_max(2e10, 0.0, 5000.0), 0.0);
        assert_eq!(phy.p_max(2e10, 1e6, 5000.0), phy.peak_power);
        let q = 9.34e-3 * 5000.0;
        assert!((phy.p_max(2e10, q, 5000.0) - 1.0).abs() < 1e-12);
        assert!((phy.p_max(2e10, q / 2.0, 5000.0) - 0.5).abs() < 1e-12);
        assert_eq!(phy.p_max(2e10, 3.0, 0.0), phy.peak_power);
    }

    #[test]
    fn optimal_power_cases() {
        let phy = phy();
        let base = SlotDecisionContext {
            gain: 1e-10,
            compute_rate: 2e10,
            queue_len: 10.0,
            control_v: 5000.0,
            during_migration: false,
            arrival: true,
        };
        let mig = phy.optimal_power(&SlotDecisionContext {
            during_migration: true,
            ..base
        });
        assert_eq!(mig, SlotOutcome::OUTAGE);
        let idle = phy.optimal_power(&SlotDecisionContext {
            arrival: false,
            ..base
        });
        assert_eq!(idle, SlotOutcome::IDLE);
        let out = phy.optimal_power(&base);
        let p_min = phy.p_min(1e-10, 2e10).unwrap();
        assert_eq!(out.power, p_min);
        assert!(!out.failed);
        assert!((out.energy - p_min * 9.34e-3).abs() < 1e-20);
        // drop when p_min exceeds p_max
        let weak = phy.optimal_power(&SlotDecisionContext {
            gain: 1e-17,
            ..base
        });
        assert_eq!(weak, SlotOutcome::DROPPED);
    }
}
