//! Single-user simulation under the proposed controller or a benchmark.

use serde::{Deserialize, Serialize};

use super::metrics::{MetricsAccumulator, MetricsReport};
use super::Scheme;
use crate::baselines::{benchmark_power, rss_hysteresis_decision, rss_only_decision, BenchmarkState};
use crate::controller::{drift_diagnostics, Controller, DriftDiagnostics, FrameCostInputs, FrameTrace, VirtualQueue};
use crate::environment::{draw_compute_rates, rwp_advance, BaseStationLayout, RwpState};
use crate::error::{Error, Result};
use crate::offloading::{SlotDecisionContext, SlotOutcome};
use crate::scenario::ScenarioConfig;

/// One row of the per-frame decision log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameLog {
    pub frame: u64,
    pub bs: usize,
    pub migrated: bool,
    /// Queue at the start of the frame; the decision uses this value.
    pub queue_start: f64,
    pub queue_end: f64,
    pub z_chosen: Option<f64>,
    pub z_runner_up: Option<f64>,
    pub energy: f64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub report: MetricsReport,
    pub frames: Vec<FrameLog>,
    pub drift: DriftDiagnostics,
    /// Frames in which no BS could meet the deadline.
    pub infeasible_frames: u64,
}

pub fn run_single_user(cfg: &ScenarioConfig) -> Result<SimOutput> {
    simulate(cfg, Scheme::Proposed)
}

pub fn run_benchmark(cfg: &ScenarioConfig, scheme: Scheme) -> Result<SimOutput> {
    if scheme == Scheme::Proposed {
        return Err(Error::InvalidConfig("benchmark runs take rss or rss-hyst".into()));
    }
    simulate(cfg, scheme)
}

/// Runs `horizon` frames for one user moving by random waypoint.
pub fn simulate(cfg: &ScenarioConfig, scheme: Scheme) -> Result<SimOutput> {
    cfg.validate()?;
    let streams = cfg.streams();
    let sched = &cfg.schedule;
    let layout = BaseStationLayout::grid(cfg.num_bs, cfg.area_side);
    let ctl = Controller::from_config(cfg);
    let phy = ctl.phy;

    let mut mobility = streams.mobility(0);
    let mut rwp = RwpState::random(&mut mobility, cfg.area_side, cfg.user_speed);
    let mut arrivals = streams.arrivals(0, cfg.task.arrival_prob);
    let mut fading = streams.fading(0);
    let mut rate_stream = streams.compute_rates();

    let mut queue = VirtualQueue::new(cfg.reliability_eps)?;
    let mut bench = BenchmarkState::new(cfg.reliability_eps);
    let mut metrics = MetricsAccumulator::new();
    let mut logs = Vec::with_capacity(sched.horizon as usize);
    let mut trace = Vec::with_capacity(sched.horizon as usize);
    let mut infeasible_frames = 0;
    let mut prev = layout.nearest(&rwp.position);
    let t_frame = sched.frame_size as u64;

    for k in 0..sched.horizon as u64 {
        let gains = layout.gains(&rwp.position).0;
        let rates = draw_compute_rates(&mut rate_stream, k, cfg.num_bs, cfg.compute_rate_min, cfg.compute_rate_max).0;
        if !rates.iter().any(|&f| phy.is_feasible(f)) {
            infeasible_frames += 1;
        }
        let q0 = queue.len();
        let (bs, z_chosen, z_runner_up) = match scheme {
            Scheme::Proposed => {
                let d = ctl.migrate_decision(&FrameCostInputs {
                    gains: gains.clone(),
                    rates: rates.clone(),
                    queue_len: q0,
                    control_v: cfg.control_v,
                    prev,
                })?;
                (d.chosen, Some(d.z[d.chosen]), d.runner_up.map(|r| d.z[r]))
            }
            Scheme::RssOnly => (rss_only_decision(&gains), None, None),
            Scheme::RssHysteresis => (rss_hysteresis_decision(&gains, prev, cfg.hysteresis_margin), None, None),
        };
        let migrated = bs != prev;
        metrics.begin_frame(q0, migrated);
        let (h_mean, f) = (gains[bs], rates[bs]);
        let mut frame_energy = 0.0;
        let mut frame_failures = 0;
        for j in 0..t_frame {
            let t = k * t_frame + j;
            let arrival = arrivals.sample(t);
            let during_migration = migrated && j < sched.migration_delay as u64;
            let out = if !arrival {
                SlotOutcome::IDLE
            } else if during_migration {
                SlotOutcome::OUTAGE
            } else {
                let ctx = SlotDecisionContext {
                    gain: h_mean * fading.exp1_at(bs as u64, t),
                    compute_rate: f,
                    queue_len: q0,
                    control_v: cfg.control_v,
                    during_migration,
                    arrival,
                };
                match scheme {
                    Scheme::Proposed => phy.optimal_power(&ctx),
                    _ => benchmark_power(&phy, &ctx, &bench),
                }
            };
            bench.record(out.failed);
            queue.update(out.failure());
            metrics.record_slot(arrival, &out);
            frame_energy += out.energy;
            frame_failures += out.failed as u64;
        }
        metrics.end_frame();
        trace.push(FrameTrace {
            queue_start: q0,
            queue_end: queue.len(),
            energy: frame_energy,
            failures: frame_failures as f64,
            slots: sched.frame_size,
        });
        logs.push(FrameLog {
            frame: k,
            bs,
            migrated,
            queue_start: q0,
            queue_end: queue.len(),
            z_chosen,
            z_runner_up,
            energy: frame_energy,
            failures: frame_failures,
        });
        prev = bs;
        rwp = rwp_advance(&rwp, sched.frame_duration(), cfg.area_side, &mut mobility);
    }

    let drift = drift_diagnostics(
        &trace,
        cfg.task.arrival_prob,
        cfg.reliability_eps,
        cfg.control_v,
        &phy,
        cfg.compute_rate_max,
    );
    Ok(SimOutput {
        report: metrics.report(scheme.as_str(), cfg.seed, cfg.reliability_eps),
        frames: logs,
        drift,
        infeasible_frames,
    })
}
