//! C ABI over the `mecmob` simulator.
//!
//! Every entry point returns a [`MecStatus`]; values come back through out
//! pointers. On any status other than `MEC_STATUS_OK` a message is stored
//! in a thread-local slot readable with [`mec_last_error`]. Panics never
//! cross the boundary: they are caught and reported as `MEC_STATUS_PANIC`.
//!
//! Handles are opaque and owned by the caller once created; release them
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mecmob::controller::{Controller, FrameCostInputs, VirtualQueue};
use mecmob::harness::{simulate, Scheme};
use mecmob::numerics::exp_integral_e1;
use mecmob::offloading::SlotDecisionContext;
use mecmob::scenario::ScenarioConfig;
use mecmob::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Parse = 3,
    Domain = 4,
    Precondition = 5,
    InvalidArgument = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MecScheme {
    Proposed = 0,
    RssOnly = 1,
    RssHysteresis = 2,
}

impl From<MecScheme> for Scheme {
    fn from(s: MecScheme) -> Self {
        match s {
            MecScheme::Proposed => Scheme::Proposed,
            MecScheme::RssOnly => Scheme::RssOnly,
            MecScheme::RssHysteresis => Scheme::RssHysteresis,
        }
    }
}

/// Scenario configuration.
pub struct MecScenario {
    cfg: ScenarioConfig,
}

/// Single-user controller with its own virtual queue.
pub struct MecController {
    ctl: Controller,
    queue: VirtualQueue,
    control_v: f64,
    num_bs: usize,
}

/// Summary of one single-user run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MecRunReport {
    pub seed: u64,
    pub frames: u64,
    /// Joules per slot.
    pub energy_avg: f64,
    pub failure_rate: f64,
    pub final_window_failure_rate: f64,
    pub satisfies_eps: bool,
    pub mean_queue: f64,
    pub max_queue: f64,
    /// Percentage of frames that migrated.
    pub migration_pct: f64,
    pub drift_violations: u64,
}

/// Outcome of one slot's power decision.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MecSlotOutcome {
    pub power: f64,
    pub energy: f64,
    pub failed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    // interior NULs would truncate the C string; replace them
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(MecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidConfig(_) | Error::Constraint(_) => MecStatus::InvalidConfig,
            Error::Parse(_) => MecStatus::Parse,
            Error::Domain(_) | Error::Quadrature { .. } => MecStatus::Domain,
            Error::Precondition(_) => MecStatus::Precondition,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => MecStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MecStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, converting errors and panics into a status and the last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            MecStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            MecStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call on the
/// same thread.
#[no_mangle]
pub extern "C" fn mec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a scenario with every parameter at its default.
///
/// # Safety
/// `out` must be NULL or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mec_scenario_default(out: *mut *mut MecScenario) -> MecStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = Box::into_raw(Box::new(MecScenario {
            cfg: ScenarioConfig::default(),
        }));
        Ok(())
    })
}

/// Parses a scenario from TOML text; missing fields take their defaults.
///
/// # Safety
/// `toml` must be NULL or a NUL-terminated string; `out` must be NULL or
/// valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mec_scenario_from_toml(toml: *const c_char, out: *mut *mut MecScenario) -> MecStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|e| Failure(MecStatus::InvalidArgument, format!("toml is not UTF-8: {e}")))?;
        let cfg = ScenarioConfig::from_toml_str(text)?;
        *out = Box::into_raw(Box::new(MecScenario { cfg }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mec_scenario_set_seed(scenario: *mut MecScenario, seed: u64) -> MecStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.cfg.seed = seed;
        Ok(())
    })
}

/// Releases a scenario. NULL is ignored.
///
/// # Safety
/// `scenario` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mec_scenario_free(scenario: *mut MecScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Simulates the scenario under `scheme` and fills `out`.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be NULL or valid for
/// a write.
#[no_mangle]
pub unsafe extern "C" fn mec_run(scenario: *const MecScenario, scheme: MecScheme, out: *mut MecRunReport) -> MecStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let sim = simulate(&s.cfg, scheme.into())?;
        let r = &sim.report;
        *out = MecRunReport {
            seed: r.seed,
            frames: r.frames,
            energy_avg: r.energy_avg,
            failure_rate: r.failure_rate,
            final_window_failure_rate: r.final_window_failure_rate,
            satisfies_eps: r.satisfies_eps,
            mean_queue: r.mean_queue,
            max_queue: r.max_queue,
            migration_pct: r.migration_pct,
            drift_violations: sim.drift.violations as u64,
        };
        Ok(())
    })
}

/// Exponential integral `E1(x)` for `x > 0`.
///
/// # Safety
/// `out` must be NULL or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mec_exp_integral_e1(x: f64, out: *mut f64) -> MecStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = exp_integral_e1(x)?;
        Ok(())
    })
}

/// Creates a controller for the scenario, with an empty virtual queue.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be NULL or valid for
/// a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mec_controller_new(scenario: *const MecScenario, out: *mut *mut MecController) -> MecStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        s.cfg.validate()?;
        *out = Box::into_raw(Box::new(MecController {
            ctl: Controller::from_config(&s.cfg),
            queue: VirtualQueue::new(s.cfg.reliability_eps)?,
            control_v: s.cfg.control_v,
            num_bs: s.cfg.num_bs,
        }));
        Ok(())
    })
}

/// Releases a controller. NULL is ignored.
///
/// # Safety
/// `controller` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mec_controller_free(controller: *mut MecController) {
    if !controller.is_null() {
        drop(Box::from_raw(controller));
    }
}

/// # Safety
/// `controller` must be NULL or a live handle; `out` must be NULL or valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn mec_controller_queue_len(controller: *const MecController, out: *mut f64) -> MecStatus {
    guard(|| {
        let c = controller.as_ref().ok_or_else(|| null("controller"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = c.queue.len();
        Ok(())
    })
}

/// Advances the virtual queue by one slot with failure indicator `failure`
/// (0 or 1) and writes the new length to `out`, which may be NULL.
///
/// # Safety
/// `controller` must be NULL or a live handle; `out` must be NULL or valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn mec_controller_queue_update(
    controller: *mut MecController,
    failure: f64,
    out: *mut f64,
) -> MecStatus {
    guard(|| {
        let c = controller.as_mut().ok_or_else(|| null("controller"))?;
        if !(failure == 0.0 || failure == 1.0) {
            return Err(Failure(MecStatus::InvalidArgument, format!("failure must be 0 or 1, got {failure}")));
        }
        let q = c.queue.update(failure);
        if let Some(out) = out.as_mut() {
            *out = q;
        }
        Ok(())
    })
}

/// Optimal transmit power for one slot at the controller's current queue
/// length. `queue_len` is taken from the controller, not from the caller.
///
/// # Safety
/// `controller` must be NULL or a live handle; `out` must be NULL or valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn mec_controller_optimal_power(
    controller: *const MecController,
    gain: f64,
    compute_rate: f64,
    arrival: bool,
    during_migration: bool,
    out: *mut MecSlotOutcome,
) -> MecStatus {
    guard(|| {
        let c = controller.as_ref().ok_or_else(|| null("controller"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !(gain > 0.0 && gain.is_finite() && compute_rate > 0.0 && compute_rate.is_finite()) {
            return Err(Failure(
                MecStatus::InvalidArgument,
                format!("gain and compute_rate must be positive and finite, got {gain} and {compute_rate}"),
            ));
        }
        let o = c.ctl.phy.optimal_power(&SlotDecisionContext {
            gain,
            compute_rate,
            queue_len: c.queue.len(),
            control_v: c.control_v,
            during_migration,
            arrival,
        });
        *out = MecSlotOutcome {
            power: o.power,
            energy: o.energy,
            failed: o.failed,
        };
        Ok(())
    })
}

/// Frame-start association: picks the BS minimising the expected frame cost
/// given large-scale gains and compute rates of all `num_bs` stations.
///
/// # Safety
/// `controller` must be NULL or a live handle; `gains` and `rates` must be
/// NULL or point to `num_bs` readable values; `out_bs` must be NULL or valid
/// for a write; `out_migrated` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn mec_controller_decide(
    controller: *const MecController,
    gains: *const f64,
    rates: *const f64,
    num_bs: usize,
    prev: usize,
    out_bs: *mut usize,
    out_migrated: *mut bool,
) -> MecStatus {
    guard(|| {
        let c = controller.as_ref().ok_or_else(|| null("controller"))?;
        let out_bs = out_bs.as_mut().ok_or_else(|| null("out_bs"))?;
        if gains.is_null() {
            return Err(null("gains"));
        }
        if rates.is_null() {
            return Err(null("rates"));
        }
        if num_bs != c.num_bs {
            return Err(Failure(
                MecStatus::InvalidArgument,
                format!("scenario has {} base stations, got {num_bs}", c.num_bs),
            ));
        }
        let inputs = FrameCostInputs {
            gains: std::slice::from_raw_parts(gains, num_bs).to_vec(),
            rates: std::slice::from_raw_parts(rates, num_bs).to_vec(),
            queue_len: c.queue.len(),
            control_v: c.control_v,
            prev,
        };
        let d = c.ctl.migrate_decision(&inputs)?;
        *out_bs = d.chosen;
        if let Some(m) = out_migrated.as_mut() {
            *m = d.migrated;
        }
        Ok(())
    })
}
