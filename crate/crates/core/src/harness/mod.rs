//! Experiment orchestration: single-user and benchmark runs, multiuser runs,
//! parameter sweeps, the `ε_min` search and CSV/JSON output.

pub mod epsmin;
pub mod metrics;
pub mod multi;
pub mod output;
pub mod single;
pub mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use epsmin::{epsilon_min, EpsMinOptions, EpsMinResult};
pub use metrics::{MetricsAccumulator, MetricsReport};
pub use multi::{run_multiuser, MultiuserReport, MultiuserRun};
pub use single::{run_benchmark, run_single_user, simulate, FrameLog, SimOutput};
pub use sweep::{sweep, SweepRow, SweepSpec, SweepSummary};

/// Migration and power policy of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Proposed,
    #[serde(rename = "rss")]
    RssOnly,
    #[serde(rename = "rss-hyst")]
    RssHysteresis,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::RssOnly, Scheme::RssHysteresis];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::RssOnly => "rss",
            Scheme::RssHysteresis => "rss-hyst",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "rss" | "rss-only" | "rss_only" => Ok(Scheme::RssOnly),
            "rss-hyst" | "rss-hysteresis" | "rss_hysteresis" => Ok(Scheme::RssHysteresis),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme {other:?}; expected proposed, rss or rss-hyst"
            ))),
        }
    }
}
