//! Two-timescale mobility management for multi-cell mobile edge computing.
//!
//! A user moves through a grid of base stations, each co-located with an
//! edge server. Once per frame the user decides which base station serves
//! it (migrating the service costs a few slots of outage); once per slot it
//! chooses a transmit power for the task that just arrived. A virtual queue
//! turns the long-run task-failure budget into a per-frame price, so that a
//! single control knob `V` trades energy against queue backlog.
//!
//! Module map:
//!
//! * [`scenario`]: configuration, frame calendar and seeded random streams.
//! * [`environment`]: base-station layout, random-waypoint mobility, fading
//!   and per-frame compute rates.
//! * [`offloading`]: per-slot latency/energy model and the threshold power rule.
//! * [`numerics`]: exponential integral, quadrature and Monte-Carlo helpers.
//! * [`controller`]: virtual queue, expected frame costs and migration policies.
//! * [`multiuser`]: load-coupled association with worst-pair improvement.
//! * [`baselines`]: RSS and RSS-with-hysteresis handover benchmarks.
//! * [`harness`]: simulations, sweeps, minimum-threshold search and outputs.

pub mod baselines;
pub mod controller;
pub mod environment;
pub mod error;
pub mod harness;
pub mod multiuser;
pub mod numerics;
pub mod offloading;
pub mod scenario;

pub use error::{Error, Result};
