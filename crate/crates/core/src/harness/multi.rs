//! Multiuser simulation: per-frame association (the worst-association search
//! or a signal-strength baseline), load-dependent rates, per-user slots.

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{EPS_SLACK, FINAL_WINDOW_FRACTION};
use super::Scheme;
use crate::baselines::{rss_hysteresis_decision, rss_only_decision, BenchmarkState};
use crate::controller::{FrameParams, VirtualQueue};
use crate::environment::{rwp_advance, BaseStationLayout, RwpState};
use crate::error::Result;
use crate::multiuser::{algorithm2, load_rate, Algorithm2Options, AssociationMatrix, MultiuserScenario, MultiuserUser};
use crate::offloading::PhyModel;
use crate::scenario::{ArrivalStream, IndexedStream};
use crate::scenario::ScenarioConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiuserReport {
    pub scheme: String,
    pub seed: u64,
    pub num_users: u64,
    pub frames: u64,
    /// Joules per slot, averaged over users.
    pub mean_energy: f64,
    pub worst_user_energy: f64,
    pub mean_failure_rate: f64,
    pub max_failure_rate: f64,
    /// Share of users whose final-window failure rate is within `1.2·ε`.
    pub users_satisfying_eps: f64,
    pub migration_pct: f64,
    pub mean_max_load: f64,
    pub max_load: u64,
    pub mean_iterations: f64,
    pub max_iterations: u64,
    pub iteration_cap_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiuserFrameLog {
    pub frame: u64,
    pub iterations: u64,
    pub initial_cost: Option<f64>,
    pub final_cost: Option<f64>,
    pub migrations: u64,
    pub max_load: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSummary {
    pub user: u64,
    pub speed: f64,
    pub energy_avg: f64,
    pub failure_rate: f64,
    pub final_window_failure_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedBucket {
    pub speed: f64,
    pub users: u64,
    pub mean_energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiuserRun {
    pub report: MultiuserReport,
    pub frames: Vec<MultiuserFrameLog>,
    pub users: Vec<UserSummary>,
    pub speed_buckets: Vec<SpeedBucket>,
}

struct UserState {
    speed: f64,
    rwp: RwpState,
    mobility: rand_chacha::ChaCha8Rng,
    arrivals: ArrivalStream,
    fading: IndexedStream,
    queue: VirtualQueue,
    bench: BenchmarkState,
    bs: usize,
    energy: f64,
    failures: u64,
    window_failures: u64,
    window_slots: u64,
    slots: u64,
}

/// Per-frame link constants of one user.
struct FrameLink {
    budget: f64,
    snr: f64,
}

impl FrameLink {
    fn new(phy: &PhyModel, f: f64) -> Self {
        let budget = phy.time_budget(f);
        FrameLink {
            budget,
            snr: if budget > 0.0 { phy.required_snr(budget) } else { f64::INFINITY },
        }
    }

    // Same arithmetic as `PhyModel::offload_below`.
    #[inline]
    fn offload(&self, phy: &PhyModel, gain: f64, cap: f64) -> Option<f64> {
        if self.budget <= 0.0 {
            return None;
        }
        let p = phy.noise_power / gain * self.snr;
        (p <= cap).then(|| p * self.budget)
    }
}

/// Runs `cfg.multiuser.num_users` users for `horizon` frames.
pub fn run_multiuser(cfg: &ScenarioConfig, scheme: Scheme) -> Result<MultiuserRun> {
    cfg.validate()?;
    let mu = &cfg.multiuser;
    let m = mu.num_users;
    let n = cfg.num_bs;
    let sched = &cfg.schedule;
    let streams = cfg.streams();
    let layout = BaseStationLayout::grid(n, cfg.area_side);
    let phy = PhyModel::from_config(cfg);
    let frame = FrameParams::from_config(cfg);
    let mut speed_rng = streams.speeds();

    let mut users: Vec<UserState> = (0..m)
        .map(|i| {
            let speed = *mu.speeds.choose(&mut speed_rng).expect("non-empty speeds");
            let mut mobility = streams.mobility(i as u64);
            let rwp = RwpState::random(&mut mobility, cfg.area_side, speed);
            let bs = layout.nearest(&rwp.position);
            Ok(UserState {
                speed,
                rwp,
                mobility,
                arrivals: streams.arrivals(i as u64, cfg.task.arrival_prob),
                fading: streams.fading(i as u64),
                queue: VirtualQueue::new(cfg.reliability_eps)?,
                bench: BenchmarkState::new(cfg.reliability_eps),
                bs,
                energy: 0.0,
                failures: 0,
                window_failures: 0,
                window_slots: 0,
                slots: 0,
            })
        })
        .collect::<Result<_>>()?;

    let horizon = sched.horizon as u64;
    let window_start = horizon - ((horizon as f64 * FINAL_WINDOW_FRACTION).ceil() as u64).clamp(1, horizon);
    let t_frame = sched.frame_size as u64;
    let opts = Algorithm2Options::default();
    let mut logs = Vec::with_capacity(horizon as usize);
    let mut migrations_total = 0u64;
    let mut cap_hits = 0u64;

    for k in 0..horizon {
        let gains: Vec<Vec<f64>> = users.iter().map(|u| layout.gains(&u.rwp.position).0).collect();
        let prev: Vec<usize> = users.iter().map(|u| u.bs).collect();
        let (assign, iterations, r0, r1, hit_cap) = match scheme {
            Scheme::Proposed => {
                let sc = MultiuserScenario {
                    phy,
                    frame,
                    control_v: cfg.control_v,
                    base_rate: mu.base_rate,
                    degradation: vec![mu.degradation; n],
                    users: gains
                        .iter()
                        .zip(&users)
                        .map(|(g, u)| MultiuserUser {
                            gains: g.clone(),
                            queue_len: u.queue.len(),
                            prev: u.bs,
                        })
                        .collect(),
                };
                let x0 = AssociationMatrix::new(prev.clone(), n)?;
                let out = algorithm2(&x0, &sc, &opts)?;
                (
                    out.association.assignment().to_vec(),
                    out.iterations as u64,
                    Some(out.initial_cost),
                    Some(out.final_cost),
                    out.hit_iteration_cap,
                )
            }
            Scheme::RssOnly => (gains.iter().map(|g| rss_only_decision(g)).collect(), 0, None, None, false),
            Scheme::RssHysteresis => (
                gains
                    .iter()
                    .zip(&prev)
                    .map(|(g, &p)| rss_hysteresis_decision(g, p, cfg.hysteresis_margin))
                    .collect(),
                0,
                None,
                None,
                false,
            ),
        };
        let mut loads = vec![0usize; n];
        for &b in &assign {
            loads[b] += 1;
        }
        let mut migrations = 0;
        let in_window = k >= window_start;
        for (i, u) in users.iter_mut().enumerate() {
            let bs = assign[i];
            let migrated = bs != u.bs;
            migrations += migrated as u64;
            u.bs = bs;
            let f = load_rate(mu.base_rate, mu.degradation, loads[bs])?;
            let link = FrameLink::new(&phy, f);
            let h_mean = gains[i][bs];
            let q0 = u.queue.len();
            let proposed_cap = phy.p_max(f, q0, cfg.control_v);
            let mut failures = 0u64;
            for j in 0..t_frame {
                let t = k * t_frame + j;
                if !u.arrivals.sample(t) {
                    if scheme != Scheme::Proposed {
                        u.bench.record(false);
                    }
                    u.queue.update(0.0);
                    continue;
                }
                let energy = if migrated && j < sched.migration_delay as u64 {
                    None
                } else {
                    let cap = match scheme {
                        Scheme::Proposed => proposed_cap,
                        _ => u.bench.power_cap(phy.peak_power),
                    };
                    let gain = h_mean * u.fading.exp1_at(bs as u64, t);
                    link.offload(&phy, gain, cap)
                };
                let failed = energy.is_none();
                if scheme != Scheme::Proposed {
                    u.bench.record(failed);
                }
                u.queue.update(failed as u8 as f64);
                u.energy += energy.unwrap_or(0.0);
                failures += failed as u64;
            }
            u.failures += failures;
            u.slots += t_frame;
            if in_window {
                u.window_failures += failures;
                u.window_slots += t_frame;
            }
            u.rwp = rwp_advance(&u.rwp, sched.frame_duration(), cfg.area_side, &mut u.mobility);
        }
        migrations_total += migrations;
        logs.push(MultiuserFrameLog {
            frame: k,
            iterations,
            initial_cost: r0,
            final_cost: r1,
            migrations,
            max_load: *loads.iter().max().unwrap() as u64,
        });
        cap_hits += hit_cap as u64;
    }

    let summaries: Vec<UserSummary> = users
        .iter()
        .enumerate()
        .map(|(i, u)| UserSummary {
            user: i as u64,
            speed: u.speed,
            energy_avg: u.energy / u.slots.max(1) as f64,
            failure_rate: u.failures as f64 / u.slots.max(1) as f64,
            final_window_failure_rate: u.window_failures as f64 / u.window_slots.max(1) as f64,
        })
        .collect();
    let mf = m as f64;
    let frames = logs.len().max(1) as f64;
    let report = MultiuserReport {
        scheme: scheme.as_str().to_string(),
        seed: cfg.seed,
        num_users: m as u64,
        frames: horizon,
        mean_energy: summaries.iter().map(|s| s.energy_avg).sum::<f64>() / mf,
        worst_user_energy: summaries.iter().map(|s| s.energy_avg).fold(0.0, f64::max),
        mean_failure_rate: summaries.iter().map(|s| s.failure_rate).sum::<f64>() / mf,
        max_failure_rate: summaries.iter().map(|s| s.failure_rate).fold(0.0, f64::max),
        users_satisfying_eps: summaries
            .iter()
            .filter(|s| s.final_window_failure_rate <= EPS_SLACK * cfg.reliability_eps)
            .count() as f64
            / mf,
        migration_pct: 100.0 * migrations_total as f64 / (frames * mf),
        mean_max_load: logs.iter().map(|l| l.max_load as f64).sum::<f64>() / frames,
        max_load: logs.iter().map(|l| l.max_load).max().unwrap_or(0),
        mean_iterations: logs.iter().map(|l| l.iterations as f64).sum::<f64>() / frames,
        max_iterations: logs.iter().map(|l| l.iterations).max().unwrap_or(0),
        iteration_cap_hits: cap_hits,
    };
    let speed_buckets = speed_buckets(&mu.speeds, &summaries);
    Ok(MultiuserRun {
        report,
        frames: logs,
        users: summaries,
        speed_buckets,
    })
}

fn speed_buckets(speeds: &[f64], users: &[UserSummary]) -> Vec<SpeedBucket> {
    let mut distinct: Vec<f64> = speeds.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    distinct
        .into_iter()
        .map(|v| {
            let group: Vec<&UserSummary> = users.iter().filter(|u| u.speed == v).collect();
            SpeedBucket {
                speed: v,
                users: group.len() as u64,
                mean_energy: if group.is_empty() {
                    0.0
                } else {
                    group.iter().map(|u| u.energy_avg).sum::<f64>() / group.len() as f64
                },
            }
        })
        .collect()
}
