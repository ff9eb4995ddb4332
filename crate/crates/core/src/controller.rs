//! Frame-level migration control: the virtual queue, the expected per-frame
//! costs under Rayleigh fading, the exact migration rule, the fast rules for
//! homogeneous rates and unconstrained power, and drift-bound diagnostics.

use crate::error::{Error, Result};
use crate::numerics::exp_integral_e1;
use crate::offloading::PhyModel;
use crate::scenario::ScenarioConfig;

/// `max(q + x - eps, 0)`.
pub fn queue_update(q: f64, x: f64, eps: f64) -> f64 {
    (q + x - eps).max(0.0)
}

/// Failure-excess queue enforcing the long-run reliability target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VirtualQueue {
    len: f64,
    eps: f64,
}

impl VirtualQueue {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("reliability target must lie in (0, 1), got {eps}")));
        }
        Ok(VirtualQueue { len: 0.0, eps })
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Applies one slot's failure indicator and returns the new length.
    pub fn update(&mut self, failure: f64) -> f64 {
        self.len = queue_update(self.len, failure, self.eps);
        self.len
    }
}

/// Per-BS constants of the closed-form cost for one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameThreshold {
    /// `σ·b·(2^(L/(W b)) - 1)`: energy of one offload at unit channel gain.
    pub e: f64,
    /// Channel gain below which a slot's task is dropped. Infinite when `p_max = 0`.
    pub h_min: f64,
}

/// `(e, h_min)` for a server at rate `f`, or `None` when the server cannot
/// meet the deadline at all.
pub fn e_and_hmin(phy: &PhyModel, f: f64, q: f64, v: f64) -> Option<FrameThreshold> {
    let b = phy.time_budget(f);
    if b <= 0.0 {
        return None;
    }
    let snr = phy.required_snr(b);
    let p_max = phy.p_max(f, q, v);
    let h_min = if p_max > 0.0 {
        phy.noise_power * snr / p_max
    } else {
        f64::INFINITY
    };
    Some(FrameThreshold {
        e: phy.noise_power * b * snr,
        h_min,
    })
}

/// `Z = (V e / H)·E₁(h_min/H) + Q·(1 - e^(-h_min/H))`, the expected
/// per-arrival cost of a frame spent with mean gain `H`.
pub fn z_closed_form(th: &FrameThreshold, h_mean: f64, q: f64, v: f64) -> f64 {
    let nu = th.h_min / h_mean;
    if !nu.is_finite() {
        return q;
    }
    let energy_term = if v == 0.0 {
        0.0
    } else {
        v * th.e / h_mean * exp_integral_e1(nu).expect("nu > 0")
    };
    energy_term - q * (-nu).exp_m1()
}

/// Closed-form `Z` for mean gain `h_mean` and rate `f`; an infeasible server
/// costs `q` (every arrival dropped).
pub fn z_frame_closed_form(phy: &PhyModel, h_mean: f64, f: f64, q: f64, v: f64) -> f64 {
    match e_and_hmin(phy, f, q, v) {
        Some(th) => z_closed_form(&th, h_mean, q, v),
        None => q,
    }
}

/// Frame constants the migration rule needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameParams {
    pub arrival_prob: f64,
    pub frame_size: u32,
    pub migration_delay: u32,
}

impl FrameParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        FrameParams {
            arrival_prob: cfg.task.arrival_prob,
            frame_size: cfg.schedule.frame_size,
            migration_delay: cfg.schedule.migration_delay,
        }
    }

    /// Fraction of a frame lost to a migration.
    pub fn alpha(&self) -> f64 {
        self.migration_delay as f64 / self.frame_size as f64
    }

    /// Expected frame cost: `ρTZ` when staying, `ρ(T-C)Z + ρCQ` when moving.
    pub fn z_sum(&self, z: f64, q: f64, same_bs: bool) -> f64 {
        let rho = self.arrival_prob;
        let t = self.frame_size as f64;
        if same_bs {
            rho * t * z
        } else {
            let c = self.migration_delay as f64;
            rho * (t - c) * z + rho * c * q
        }
    }
}

/// Everything known at the start of frame `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCostInputs {
    pub gains: Vec<f64>,
    pub rates: Vec<f64>,
    pub queue_len: f64,
    pub control_v: f64,
    pub prev: usize,
}

impl FrameCostInputs {
    fn check(&self) -> Result<()> {
        if self.gains.is_empty() || self.gains.len() != self.rates.len() {
            return Err(Error::Domain("gains and rates must be non-empty and of equal length".into()));
        }
        if self.prev >= self.gains.len() {
            return Err(Error::Domain(format!("previous BS {} out of range", self.prev)));
        }
        if self.gains.iter().chain(&self.rates).any(|&x| !(x > 0.0)) {
            return Err(Error::Domain("gains and rates must be positive".into()));
        }
        if !(self.queue_len >= 0.0) || !(self.control_v >= 0.0) {
            return Err(Error::Domain("queue length and V must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameDecision {
    pub chosen: usize,
    pub migrated: bool,
    pub z: Vec<f64>,
    pub z_sum: Vec<f64>,
    /// Best BS other than the chosen one by `z_sum`, if any.
    pub runner_up: Option<usize>,
}

/// Exact rule from per-BS costs: move to the cheapest other BS only if that
/// strictly lowers the frame cost. Ties stay, then go to the lowest index.
pub fn decide_from_costs(params: &FrameParams, z: Vec<f64>, q: f64, prev: usize) -> FrameDecision {
    let z_sum: Vec<f64> = z
        .iter()
        .enumerate()
        .map(|(n, &zn)| params.z_sum(zn, q, n == prev))
        .collect();
    let candidate = argmin_excluding(&z, prev);
    let chosen = match candidate {
        Some(c) if z_sum[c] < z_sum[prev] => c,
        _ => prev,
    };
    let runner_up = argmin_excluding(&z_sum, chosen);
    FrameDecision {
        chosen,
        migrated: chosen != prev,
        z,
        z_sum,
        runner_up,
    }
}

fn argmin_excluding(xs: &[f64], skip: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (n, &x) in xs.iter().enumerate() {
        if n != skip && best.map_or(true, |b| x < xs[b]) {
            best = Some(n);
        }
    }
    best
}

fn argmax_excluding(xs: &[f64], skip: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (n, &x) in xs.iter().enumerate() {
        if n != skip && best.map_or(true, |b| x > xs[b]) {
            best = Some(n);
        }
    }
    best
}

/// Which branch of a fast rule produced the decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastRule {
    Stay,
    Migrate,
    Fallback,
}

/// Stateless frame-level controller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Controller {
    pub phy: PhyModel,
    pub frame: FrameParams,
}

impl Controller {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Controller {
            phy: PhyModel::from_config(cfg),
            frame: FrameParams::from_config(cfg),
        }
    }

    pub fn frame_costs(&self, inputs: &FrameCostInputs) -> Vec<f64> {
        inputs
            .gains
            .iter()
            .zip(&inputs.rates)
            .map(|(&h, &f)| z_frame_closed_form(&self.phy, h, f, inputs.queue_len, inputs.control_v))
            .collect()
    }

    pub fn migrate_decision(&self, inputs: &FrameCostInputs) -> Result<FrameDecision> {
        inputs.check()?;
        let z = self.frame_costs(inputs);
        Ok(decide_from_costs(&self.frame, z, inputs.queue_len, inputs.prev))
    }

    /// Fast rule when every server runs at the same rate. The candidate is
    /// the strongest other BS; undecided cases use the exact rule.
    pub fn prop3_policy(&self, inputs: &FrameCostInputs) -> Result<(FrameDecision, FastRule)> {
        inputs.check()?;
        let f = inputs.rates[0];
        if inputs.rates.iter().any(|&r| r != f) {
            return Err(Error::Precondition("homogeneous-rate rule needs equal compute rates".into()));
        }
        let exact = || self.migrate_decision(inputs);
        let Some(th) = e_and_hmin(&self.phy, f, inputs.queue_len, inputs.control_v) else {
            return Err(Error::Precondition("homogeneous-rate rule needs a feasible compute rate".into()));
        };
        if !th.h_min.is_finite() {
            // Q = 0: every BS costs nothing, thresholds are degenerate
            return Ok((exact()?, FastRule::Fallback));
        }
        let prev = inputs.prev;
        let Some(cand) = argmax_excluding(&inputs.gains, prev) else {
            return Ok((exact()?, FastRule::Fallback));
        };
        let h_alpha = th.h_min / -(-self.frame.alpha()).ln_1p();
        let h_prev = inputs.gains[prev];
        let h_cand = inputs.gains[cand];
        let (chosen, rule) = if h_prev > h_alpha {
            (prev, FastRule::Stay)
        } else {
            let ratio = if h_alpha.is_finite() {
                h_alpha / (h_alpha + h_cand)
            } else {
                1.0
            };
            if h_prev <= h_cand * ratio.min(0.5) {
                (cand, FastRule::Migrate)
            } else {
                return Ok((exact()?, FastRule::Fallback));
            }
        };
        Ok((self.decision_for(inputs, chosen), rule))
    }

    /// Fast rule when the peak power never binds. Works on
    /// `ν_n = h_min_n / H_n`; undecided cases use the exact rule.
    pub fn prop4_policy(&self, inputs: &FrameCostInputs) -> Result<(FrameDecision, FastRule)> {
        inputs.check()?;
        let q = inputs.queue_len;
        let v = inputs.control_v;
        if !(q > 0.0) || !(v > 0.0) {
            return Err(Error::Precondition("unconstrained-power rule needs Q > 0 and V > 0".into()));
        }
        let mut nu = Vec::with_capacity(inputs.gains.len());
        for (&h, &f) in inputs.gains.iter().zip(&inputs.rates) {
            let b = self.phy.time_budget(f);
            if b <= 0.0 || self.phy.peak_power <= q / (v * b) {
                return Err(Error::Precondition(format!(
                    "unconstrained-power rule needs peak power above Q/(V b) at rate {f}"
                )));
            }
            let th = e_and_hmin(&self.phy, f, q, v).expect("feasible");
            nu.push(th.h_min / h);
        }
        let prev = inputs.prev;
        let Some(cand) = argmin_excluding(&nu, prev) else {
            return Ok((self.migrate_decision(inputs)?, FastRule::Fallback));
        };
        let l = -(-self.frame.alpha()).ln_1p();
        let (chosen, rule) = if nu[prev] < l {
            (prev, FastRule::Stay)
        } else if nu[prev] >= (nu[cand] + l).max(2.0 * nu[cand]) {
            (cand, FastRule::Migrate)
        } else {
            return Ok((self.migrate_decision(inputs)?, FastRule::Fallback));
        };
        Ok((self.decision_for(inputs, chosen), rule))
    }

    fn decision_for(&self, inputs: &FrameCostInputs, chosen: usize) -> FrameDecision {
        let z = self.frame_costs(inputs);
        let z_sum: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(n, &zn)| self.frame.z_sum(zn, inputs.queue_len, n == inputs.prev))
            .collect();
        let runner_up = argmin_excluding(&z_sum, chosen);
        FrameDecision {
            chosen,
            migrated: chosen != inputs.prev,
            z,
            z_sum,
            runner_up,
        }
    }
}

/// One frame of a simulated trace, as needed for the drift check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameTrace {
    pub queue_start: f64,
    pub queue_end: f64,
    pub energy: f64,
    pub failures: f64,
    pub slots: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftDiagnostics {
    pub b1: f64,
    pub b2: f64,
    pub e_max: f64,
    /// `½(Q_end² - Q_start²) + V·ΣE` per frame.
    pub drift_plus_penalty: Vec<f64>,
    /// `B2·T + V·ΣE + Q_start·(ΣX - Tε)` per frame.
    pub bound: Vec<f64>,
    pub violations: usize,
}

/// `B1 = (ρ + ε²)/2`.
pub fn drift_b1(rho: f64, eps: f64) -> f64 {
    0.5 * (rho + eps * eps)
}

/// `B2 = B1 + (T-1)·((1-ε)ρ + ε²)/2`.
pub fn drift_b2(rho: f64, eps: f64, frame_size: u32) -> f64 {
    drift_b1(rho, eps) + (frame_size as f64 - 1.0) * ((1.0 - eps) * rho + eps * eps) / 2.0
}

/// Largest per-slot energy: peak power over the longest upload window.
pub fn max_slot_energy(phy: &PhyModel, f_hi: f64) -> f64 {
    phy.peak_power * phy.time_budget(f_hi)
}

pub fn drift_diagnostics(
    trace: &[FrameTrace],
    rho: f64,
    eps: f64,
    v: f64,
    phy: &PhyModel,
    f_hi: f64,
) -> DriftDiagnostics {
    let frame_size = trace.first().map_or(1, |t| t.slots);
    let b2 = drift_b2(rho, eps, frame_size);
    let mut dpp = Vec::with_capacity(trace.len());
    let mut bound = Vec::with_capacity(trace.len());
    let mut violations = 0;
    for fr in trace {
        let t = fr.slots as f64;
        let lhs = 0.5 * (fr.queue_end * fr.queue_end - fr.queue_start * fr.queue_start) + v * fr.energy;
        let rhs = drift_b2(rho, eps, fr.slots) * t + v * fr.energy + fr.queue_start * (fr.failures - t * eps);
        if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
            violations += 1;
        }
        dpp.push(lhs);
        bound.push(rhs);
    }
    DriftDiagnostics {
        b1: drift_b1(rho, eps),
        b2,
        e_max: max_slot_energy(phy, f_hi),
        drift_plus_penalty: dpp,
        bound,
        violations,
    }
}

/// Average-queue bound `(B2 + V·E_max)/δ` for each hypothetical slack `δ`.
pub fn queue_bound_curve(b2: f64, v: f64, e_max: f64, deltas: &[f64]) -> Vec<(f64, f64)> {
    deltas.iter().map(|&d| (d, (b2 + v * e_max) / d)).collect()
}
