//! Smallest supportable reliability target, by bisection on a log scale.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::single::simulate;
use super::sweep::replication_seed;
use super::Scheme;
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsMinOptions {
    pub lo: f64,
    pub hi: f64,
    pub iterations: u32,
    pub replications: usize,
}

impl Default for EpsMinOptions {
    fn default() -> Self {
        EpsMinOptions {
            lo: 1e-5,
            hi: 1e-1,
            iterations: 12,
            replications: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsProbe {
    pub eps: f64,
    pub feasible_votes: u64,
    pub replications: u64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsMinResult {
    pub scheme: Scheme,
    /// `None` when even the upper end of the range is not met.
    pub eps_min: Option<f64>,
    pub probes: Vec<EpsProbe>,
}

/// Whether a majority of replications meet `eps` in the final window.
pub fn probe(cfg: &ScenarioConfig, scheme: Scheme, eps: f64, replications: usize) -> Result<EpsProbe> {
    let votes: Vec<Result<bool>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.reliability_eps = eps;
            c.seed = replication_seed(cfg, r);
            Ok(simulate(&c, scheme)?.report.satisfies_eps)
        })
        .collect();
    let mut yes = 0u64;
    for v in votes {
        yes += v? as u64;
    }
    Ok(EpsProbe {
        eps,
        feasible_votes: yes,
        replications: replications as u64,
        feasible: 2 * yes > replications as u64,
    })
}

pub fn epsilon_min(cfg: &ScenarioConfig, scheme: Scheme, opts: &EpsMinOptions) -> Result<EpsMinResult> {
    if !(opts.lo > 0.0 && opts.lo < opts.hi && opts.hi < 1.0) || opts.replications == 0 {
        return Err(Error::InvalidConfig("epsilon search needs 0 < lo < hi < 1 and replications >= 1".into()));
    }
    cfg.validate()?;
    let mut probes = Vec::new();
    let top = probe(cfg, scheme, opts.hi, opts.replications)?;
    probes.push(top);
    if !top.feasible {
        return Ok(EpsMinResult {
            scheme,
            eps_min: None,
            probes,
        });
    }
    let bottom = probe(cfg, scheme, opts.lo, opts.replications)?;
    probes.push(bottom);
    if bottom.feasible {
        return Ok(EpsMinResult {
            scheme,
            eps_min: Some(opts.lo),
            probes,
        });
    }
    // infeasible at lo, feasible at hi
    let (mut lo, mut hi) = (opts.lo.ln(), opts.hi.ln());
    for _ in 0..opts.iterations {
        let mid = 0.5 * (lo + hi);
        let p = probe(cfg, scheme, mid.exp(), opts.replications)?;
        probes.push(p);
        if p.feasible {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(EpsMinResult {
        scheme,
        eps_min: Some(hi.exp()),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsupported_when_nothing_is_served() {
        let mut cfg = ScenarioConfig::default();
        cfg.schedule.horizon = 5;
        cfg.compute_rate_min = 1e8;
        cfg.compute_rate_max = 1e9;
        let r = epsilon_min(&cfg, Scheme::Proposed, &EpsMinOptions::default()).unwrap();
        assert_eq!(r.eps_min, None);
        assert_eq!(r.probes.len(), 1);
    }

    #[test]
    fn trivially_met_without_arrivals() {
        let mut cfg = ScenarioConfig::default();
        cfg.schedule.horizon = 5;
        cfg.task.arrival_prob = 0.0;
        let r = epsilon_min(&cfg, Scheme::RssOnly, &EpsMinOptions::default()).unwrap();
        assert_eq!(r.eps_min, Some(1e-5));
    }

    #[test]
    fn bisection_brackets() {
        let mut cfg = ScenarioConfig::default();
        cfg.schedule.horizon = 30;
        let opts = EpsMinOptions {
            iterations: 4,
            replications: 1,
            ..Default::default()
        };
        let r = epsilon_min(&cfg, Scheme::Proposed, &opts).unwrap();
        let e = r.eps_min.unwrap();
        assert!((opts.lo..=opts.hi).contains(&e));
        assert!(epsilon_min(&cfg, Scheme::Proposed, &EpsMinOptions { lo: 0.2, hi: 0.1, ..opts }).is_err());
    }
}
