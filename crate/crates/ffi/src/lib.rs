//! C interface to the farm simulator, the physics models and saved
//! Q-network checkpoints.
//!
//! Every fallible function returns a [`UavStatus`]; on anything other than
//! `UAV_OK` a message is available from [`uavfarm_last_error`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use uavfarm::env::{Action, FarmSim};
use uavfarm::harness::ExperimentConfig;
use uavfarm::nn::{checkpoint, Mlp};
use uavfarm::physics::{self, CommParams, PhysicsParams};
use uavfarm::rl::MultiAgentEnv;
use uavfarm::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(non_camel_case_types)]
pub enum UavStatus {
    UAV_OK = 0,
    UAV_NULL_POINTER = 1,
    UAV_INVALID_ARGUMENT = 2,
    UAV_CONFIG = 3,
    UAV_CONTRACT = 4,
    UAV_DOMAIN = 5,
    UAV_DIVERGENCE = 6,
    UAV_CHECKPOINT = 7,
    UAV_IO = 8,
    UAV_PANIC = 9,
    UAV_OTHER = 10,
}

/// Episode figures of an environment handle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UavMetrics {
    pub energy_j: f64,
    pub recognition_pct: f64,
    pub collection_pct: f64,
    pub completion_s: f64,
}

/// Opaque simulator handle.
pub struct UavEnv {
    sim: FarmSim,
    episode: u64,
}

/// Opaque Q-network handle.
pub struct UavQNet {
    net: Mlp,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> UavStatus {
    match err {
        Error::Config { .. } => UavStatus::UAV_CONFIG,
        Error::Contract(_) => UavStatus::UAV_CONTRACT,
        Error::Domain(_) => UavStatus::UAV_DOMAIN,
        Error::Divergence(_) => UavStatus::UAV_DIVERGENCE,
        Error::Checkpoint { .. } => UavStatus::UAV_CHECKPOINT,
        Error::Io { .. } => UavStatus::UAV_IO,
        _ => UavStatus::UAV_OTHER,
    }
}

struct Failure(UavStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: UavStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> UavStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UavStatus::UAV_OK,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UavStatus::UAV_PANIC
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        fail(UavStatus::UAV_NULL_POINTER, format!("`{name}` is null"))
    } else {
        Ok(())
    }
}

unsafe fn utf8<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(UavStatus::UAV_INVALID_ARGUMENT, format!("`{name}` is not valid UTF-8")),
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn uavfarm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

// ----------------------------------------------------------------------------
// physics with the default airframe and radio parameters

/// Flight power in watts at planar velocity (`vx`, `vy`) m/s.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_flight_power(vx: f64, vy: f64, out: *mut f64) -> UavStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(vx.is_finite() && vy.is_finite()) {
            return fail(UavStatus::UAV_INVALID_ARGUMENT, "velocity must be finite");
        }
        *out = physics::flight_power([vx, vy], &PhysicsParams::default());
        Ok(())
    })
}

/// Total energy in joules of one step of `dt` seconds at (`vx`, `vy`).
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_step_energy(vx: f64, vy: f64, dt: f64, out: *mut f64) -> UavStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = physics::step_energy([vx, vy], dt, &PhysicsParams::default())?.total;
        Ok(())
    })
}

/// Path loss in dB over `dist` metres.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_path_loss_db(dist: f64, out: *mut f64) -> UavStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = physics::path_loss_db(dist, &CommParams::default())?;
        Ok(())
    })
}

/// BPSK bit error rate at a linear SINR.
#[no_mangle]
pub extern "C" fn uavfarm_ber_bpsk(sinr: f64) -> f64 {
    physics::ber_bpsk(sinr)
}

/// Probability that a packet of `bits` bits has at least one bit error.
#[no_mangle]
pub extern "C" fn uavfarm_packet_loss_rate(ber: f64, bits: u32) -> f64 {
    physics::packet_loss_rate(ber, bits)
}

/// Probability of collecting a sensor's packet, positions in metres.
///
/// # Safety
/// `uav` and `sensor` must point to three readable doubles; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_collection_probability(
    uav: *const f64,
    sensor: *const f64,
    out: *mut f64,
) -> UavStatus {
    guard(|| {
        non_null(uav, "uav")?;
        non_null(sensor, "sensor")?;
        non_null(out, "out")?;
        let u = std::slice::from_raw_parts(uav, 3);
        let s = std::slice::from_raw_parts(sensor, 3);
        *out = physics::collection_probability([u[0], u[1], u[2]], [s[0], s[1], s[2]], &CommParams::default());
        Ok(())
    })
}

// ----------------------------------------------------------------------------
// environment

/// Creates a simulator from a TOML experiment config (null for the default
/// configuration). `layout_seed` fixes the farm, `episode_seed` the first
/// episode.
///
/// # Safety
/// `config_toml` must be null or a NUL-terminated string; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_new(
    config_toml: *const c_char,
    layout_seed: u64,
    episode_seed: u64,
    out: *mut *mut UavEnv,
) -> UavStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let text = if config_toml.is_null() { "" } else { utf8(config_toml, "config_toml")? };
        let cfg = ExperimentConfig::from_toml_str(text, None)?;
        let sim = FarmSim::new(&cfg.farm(), layout_seed, episode_seed)?;
        *out = Box::into_raw(Box::new(UavEnv { sim, episode: 0 }));
        Ok(())
    })
}

/// Releases an environment handle. Null is ignored.
///
/// # Safety
/// `env` must be null or a handle from [`uavfarm_env_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_free(env: *mut UavEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Number of UAVs, or 0 for a null handle.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_n_uavs(env: *const UavEnv) -> usize {
    env.as_ref().map_or(0, |e| e.sim.n_agents())
}

/// Length of one UAV's observation vector, or 0 for a null handle.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_obs_len(env: *const UavEnv) -> usize {
    env.as_ref().map_or(0, |e| e.sim.obs_len())
}

/// Starts a new episode on the same farm layout.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_reset(env: *mut UavEnv, episode_seed: u64) -> UavStatus {
    guard(|| {
        non_null(env, "env")?;
        let e = &mut *env;
        e.sim.reset_episode(episode_seed)?;
        e.episode += 1;
        Ok(())
    })
}

/// Writes UAV `uav`'s observation into `buf`, which must hold `len` doubles
/// with `len == uavfarm_env_obs_len(env)`.
///
/// # Safety
/// `env` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_observe(env: *const UavEnv, uav: usize, buf: *mut f64, len: usize) -> UavStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(buf, "buf")?;
        let e = &*env;
        if uav >= e.sim.n_agents() {
            return fail(UavStatus::UAV_INVALID_ARGUMENT, format!("no UAV {uav}"));
        }
        if len != e.sim.obs_len() {
            return fail(
                UavStatus::UAV_INVALID_ARGUMENT,
                format!("buffer holds {len} values, observation has {}", e.sim.obs_len()),
            );
        }
        let obs = e.sim.observe(uav);
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&obs);
        Ok(())
    })
}

/// Advances every UAV by one step. `actions[i]` is a compass index 0..=7
/// (N, NE, E, SE, S, SW, W, NW) or -1 to hover; dead UAVs' entries are
/// ignored. Per-UAV rewards go to `rewards` (may be null) and whether the
/// episode ended to `episode_done` (may be null).
///
/// # Safety
/// `env` must be a live handle, `actions` readable and `rewards` (if not
/// null) writable for `n` elements, `episode_done` null or writable.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_step(
    env: *mut UavEnv,
    actions: *const i32,
    n: usize,
    rewards: *mut f64,
    episode_done: *mut bool,
) -> UavStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(actions, "actions")?;
        let e = &mut *env;
        let count = e.sim.n_agents();
        if n != count {
            return fail(UavStatus::UAV_INVALID_ARGUMENT, format!("{n} actions for {count} UAVs"));
        }
        let mut joint = Vec::with_capacity(n);
        for (i, &code) in std::slice::from_raw_parts(actions, n).iter().enumerate() {
            let action = match code {
                -1 => None,
                0..=7 => Some(Action::ALL[code as usize]),
                other => return fail(UavStatus::UAV_INVALID_ARGUMENT, format!("action {other} for UAV {i}")),
            };
            joint.push(if e.sim.alive(i) { action } else { None });
        }
        let step = e.sim.step_joint(&joint)?;
        if !rewards.is_null() {
            let out = std::slice::from_raw_parts_mut(rewards, n);
            for (slot, a) in out.iter_mut().zip(&step.agents) {
                *slot = a.reward;
            }
        }
        if !episode_done.is_null() {
            *episode_done = step.episode_done;
        }
        Ok(())
    })
}

/// Figures of the finished episode; `UAV_CONTRACT` while it is still running.
///
/// # Safety
/// `env` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_env_metrics(env: *const UavEnv, out: *mut UavMetrics) -> UavStatus {
    guard(|| {
        non_null(env, "env")?;
        non_null(out, "out")?;
        let e = &*env;
        let m = e.sim.env().episode_metrics("ffi", e.sim.layout_seed(), e.episode as usize)?;
        *out = UavMetrics {
            energy_j: m.energy_j,
            recognition_pct: m.recognition_pct,
            collection_pct: m.collection_pct,
            completion_s: m.completion_s,
        };
        Ok(())
    })
}

// ----------------------------------------------------------------------------
// Q-network checkpoints

/// Loads a `.qnet` checkpoint written by the trainer.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_qnet_load(path: *const c_char, out: *mut *mut UavQNet) -> UavStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(utf8(path, "path")?);
        let net = checkpoint::load(&path)?;
        *out = Box::into_raw(Box::new(UavQNet { net }));
        Ok(())
    })
}

/// Releases a Q-network handle. Null is ignored.
///
/// # Safety
/// `net` must be null or a handle from [`uavfarm_qnet_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_qnet_free(net: *mut UavQNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Input width, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_qnet_input_len(net: *const UavQNet) -> usize {
    net.as_ref().map_or(0, |n| n.net.input_len())
}

/// Output width (number of actions), or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_qnet_output_len(net: *const UavQNet) -> usize {
    net.as_ref().map_or(0, |n| n.net.output_len())
}

/// Evaluates the network on one state.
///
/// # Safety
/// `net` must be a live handle, `input` readable for `in_len` and `output`
/// writable for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn uavfarm_qnet_forward(
    net: *const UavQNet,
    input: *const f64,
    in_len: usize,
    output: *mut f64,
    out_len: usize,
) -> UavStatus {
    guard(|| {
        non_null(net, "net")?;
        non_null(input, "input")?;
        non_null(output, "output")?;
        let n = &(*net).net;
        if out_len != n.output_len() {
            return fail(
                UavStatus::UAV_INVALID_ARGUMENT,
                format!("output buffer holds {out_len} values, network has {}", n.output_len()),
            );
        }
        let q = n.forward(std::slice::from_raw_parts(input, in_len))?;
        std::slice::from_raw_parts_mut(output, out_len).copy_from_slice(&q);
        Ok(())
    })
}
