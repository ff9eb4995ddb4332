//! The physical world: base-station layout, random-waypoint mobility,
//! path loss, Rayleigh small-scale fading and per-frame compute rates.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::scenario::IndexedStream;

/// Distances below this are clamped before evaluating path loss, meters.
pub const MIN_DISTANCE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn uniform_in_square<R: Rng + ?Sized>(rng: &mut R, side: f64) -> Self {
        let x = side * rng.random::<f64>();
        let y = side * rng.random::<f64>();
        Point { x, y }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseStationLayout {
    positions: Vec<Point>,
    area_side: f64,
}

impl BaseStationLayout {
    /// Regular grid of `n` stations in a square of side `area_side`, each at
    /// the center of its cell. 25 stations in 2 km give a 400 m pitch with a
    /// 200 m margin. Non-square counts fill a `ceil(sqrt n)`-column grid
    /// row by row.
    pub fn grid(n: usize, area_side: f64) -> Self {
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        let dx = area_side / cols as f64;
        let dy = area_side / rows as f64;
        let positions = (0..n)
            .map(|i| {
                let (r, c) = (i / cols, i % cols);
                Point::new((c as f64 + 0.5) * dx, (r as f64 + 0.5) * dy)
            })
            .collect();
        BaseStationLayout {
            positions,
            area_side,
        }
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn area_side(&self) -> f64 {
        self.area_side
    }

    pub fn distances(&self, from: &Point) -> Vec<f64> {
        self.positions.iter().map(|p| p.distance(from)).collect()
    }

    /// Closest station, lowest index on ties.
    pub fn nearest(&self, from: &Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (n, p) in self.positions.iter().enumerate() {
            let d = p.distance(from);
            if d < best_d {
                best = n;
                best_d = d;
            }
        }
        best
    }

    /// Large-scale gains `H_n` seen from `from`.
    pub fn gains(&self, from: &Point) -> LargeScaleGains {
        LargeScaleGains(
            self.positions
                .iter()
                .map(|p| large_scale_gain(p.distance(from)))
                .collect(),
        )
    }
}

/// Random-waypoint state: straight-line travel at constant speed toward a
/// uniformly drawn waypoint, zero pause time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwpState {
    pub position: Point,
    pub waypoint: Point,
    pub speed: f64,
}

impl RwpState {
    /// Uniform initial position and waypoint.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, area_side: f64, speed: f64) -> Self {
        let position = Point::uniform_in_square(rng, area_side);
        let waypoint = Point::uniform_in_square(rng, area_side);
        RwpState {
            position,
            waypoint,
            speed,
        }
    }
}

/// Moves `speed * duration` meters along the current leg; on reaching the
/// waypoint a new one is drawn and the remaining distance is spent on it.
pub fn rwp_advance<R: Rng + ?Sized>(
    state: &RwpState,
    duration: f64,
    area_side: f64,
    rng: &mut R,
) -> RwpState {
    let mut next = *state;
    let mut remaining = state.speed * duration;
    if remaining <= 0.0 {
        return next;
    }
    loop {
        let leg = next.position.distance(&next.waypoint);
        if remaining < leg {
            let f = remaining / leg;
            next.position.x += f * (next.waypoint.x - next.position.x);
            next.position.y += f * (next.waypoint.y - next.position.y);
            break;
        }
        remaining -= leg;
        next.position = next.waypoint;
        next.waypoint = Point::uniform_in_square(rng, area_side);
        if remaining <= 0.0 {
            break;
        }
    }
    next
}

/// Path loss `127 + 30 log10(d / 1 km)` dB converted to a linear power gain.
pub fn large_scale_gain(distance: f64) -> f64 {
    let d = distance.max(MIN_DISTANCE);
    let loss_db = 127.0 + 30.0 * (d / 1_000.0).log10();
    10f64.powf(-loss_db / 10.0)
}

/// Per-station large-scale gains for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LargeScaleGains(pub Vec<f64>);

impl LargeScaleGains {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One slot's channel to one station.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSample {
    pub small_scale: f64,
    pub gain: f64,
}

/// Unit-mean exponential fading of station `bs` at slot `t`.
pub fn sample_small_scale(stream: &mut IndexedStream, bs: usize, t: u64) -> f64 {
    stream.exp1_at(bs as u64, t)
}

pub fn sample_channel(
    stream: &mut IndexedStream,
    bs: usize,
    t: u64,
    large_scale: f64,
) -> ChannelSample {
    let small_scale = sample_small_scale(stream, bs, t);
    ChannelSample {
        small_scale,
        gain: small_scale * large_scale,
    }
}

/// Compute rates granted by every station for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ComputeRates(pub Vec<f64>);

impl ComputeRates {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Independent uniform draws on `[lo, hi]`, one per station, for frame `k`.
pub fn draw_compute_rates(
    stream: &mut IndexedStream,
    k: u64,
    num_bs: usize,
    lo: f64,
    hi: f64,
) -> ComputeRates {
    ComputeRates(
        (0..num_bs)
            .map(|n| {
                let u = stream.uniform_at(n as u64, k);
                (lo + (hi - lo) * u).min(hi)
            })
            .collect(),
    )
}

/// One row of a trajectory dump.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub frame: u64,
    pub position: Point,
    pub distances: Vec<f64>,
}

pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        let mut header = vec!["frame".to_string(), "x".into(), "y".into()];
        header.extend((0..first.distances.len()).map(|n| format!("d_bs{n}")));
        w.write_record(&header)?;
    }
    for row in rows {
        let mut rec = vec![
            row.frame.to_string(),
            row.position.x.to_string(),
            row.position.y.to_string(),
        ];
        rec.extend(row.distances.iter().map(|d| d.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
