use std::ffi::{CStr, CString};
use std::ptr;

use uavfarm::nn::{checkpoint, Mlp};
use uavfarm_ffi::*;

const TOY: &str = "preset = \"toy\"\n";

fn last_error() -> String {
    let p = uavfarm_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn toy_env(layout: u64, episode: u64) -> *mut UavEnv {
    let cfg = CString::new(TOY).unwrap();
    let mut env = ptr::null_mut();
    let st = unsafe { uavfarm_env_new(cfg.as_ptr(), layout, episode, &mut env) };
    assert_eq!(st, UavStatus::UAV_OK);
    assert!(!env.is_null());
    env
}

#[test]
fn physics_calls_match_the_library() {
    let mut p = 0.0;
    assert_eq!(unsafe { uavfarm_flight_power(20.0, 0.0, &mut p) }, UavStatus::UAV_OK);
    let want = uavfarm::physics::flight_power([20.0, 0.0], &Default::default());
    assert_eq!(p, want);
    assert_eq!(uavfarm_ber_bpsk(0.0), 0.5);
    assert_eq!(uavfarm_packet_loss_rate(0.0, 160), 0.0);

    let mut e = 0.0;
    assert_eq!(unsafe { uavfarm_step_energy(20.0, 20.0, 1.0, &mut e) }, UavStatus::UAV_OK);
    assert!(e > p);

    let (uav, sensor) = ([0.0, 0.0, 20.0], [0.0, 0.0, 0.0]);
    let mut prob = 0.0;
    let st = unsafe { uavfarm_collection_probability(uav.as_ptr(), sensor.as_ptr(), &mut prob) };
    assert_eq!(st, UavStatus::UAV_OK);
    assert!((prob - 1.0).abs() < 1e-6);
}

#[test]
fn domain_and_null_errors_set_a_message() {
    let mut out = 0.0;
    assert_eq!(unsafe { uavfarm_path_loss_db(-1.0, &mut out) }, UavStatus::UAV_DOMAIN);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { uavfarm_path_loss_db(1.0, ptr::null_mut()) }, UavStatus::UAV_NULL_POINTER);
    assert!(last_error().contains("out"));
    assert_eq!(unsafe { uavfarm_path_loss_db(100.0, &mut out) }, UavStatus::UAV_OK);
    assert!(uavfarm_last_error().is_null());
}

#[test]
fn bad_config_reports_the_field() {
    let cfg = CString::new("[scenario]\nn_uavs = \"two\"\n").unwrap();
    let mut env = ptr::null_mut();
    let st = unsafe { uavfarm_env_new(cfg.as_ptr(), 1, 1, &mut env) };
    assert_eq!(st, UavStatus::UAV_CONFIG);
    assert!(env.is_null());
    assert!(last_error().contains("scenario.n_uavs"));
}

#[test]
fn env_handle_runs_an_episode() {
    let env = toy_env(3, 9);
    unsafe {
        let n = uavfarm_env_n_uavs(env);
        let len = uavfarm_env_obs_len(env);
        assert_eq!(n, 2);
        assert!(len > 0);
        let mut obs = vec![f64::NAN; len];
        assert_eq!(uavfarm_env_observe(env, 0, obs.as_mut_ptr(), len), UavStatus::UAV_OK);
        assert!(obs.iter().all(|x| x.is_finite()));
        assert_eq!(uavfarm_env_observe(env, 5, obs.as_mut_ptr(), len), UavStatus::UAV_INVALID_ARGUMENT);
        assert_eq!(uavfarm_env_observe(env, 0, obs.as_mut_ptr(), len - 1), UavStatus::UAV_INVALID_ARGUMENT);

        let mut rewards = vec![0.0; n];
        let mut done = false;
        let bad = [9, -1];
        assert_eq!(
            uavfarm_env_step(env, bad.as_ptr(), n, rewards.as_mut_ptr(), &mut done),
            UavStatus::UAV_INVALID_ARGUMENT
        );
        let mut steps = 0;
        while !done {
            let actions = [steps % 8, -1];
            let st = uavfarm_env_step(env, actions.as_ptr(), n, rewards.as_mut_ptr(), &mut done);
            assert_eq!(st, UavStatus::UAV_OK, "{}", last_error());
            assert!(rewards.iter().all(|r| r.is_finite()));
            steps += 1;
            assert!(steps <= 1000);
        }
        let mut m = UavMetrics::default();
        assert_eq!(uavfarm_env_metrics(env, &mut m), UavStatus::UAV_OK);
        assert!(m.energy_j > 0.0);
        assert!((0.0..=100.0).contains(&m.recognition_pct));
        assert!((0.0..=100.0).contains(&m.collection_pct));

        assert_eq!(uavfarm_env_reset(env, 10), UavStatus::UAV_OK);
        assert_eq!(uavfarm_env_metrics(env, &mut m), UavStatus::UAV_CONTRACT);
        assert!(last_error().contains("before the episode ended"));
        uavfarm_env_free(env);
        uavfarm_env_free(ptr::null_mut());
        assert_eq!(uavfarm_env_n_uavs(ptr::null()), 0);
    }
}

#[test]
fn same_seeds_give_the_same_rewards() {
    let run = || unsafe {
        let env = toy_env(4, 4);
        let mut rewards = [0.0; 2];
        let mut trace = Vec::new();
        for t in 0..20 {
            let actions = [t % 8, (t * 3) % 8];
            uavfarm_env_step(env, actions.as_ptr(), 2, rewards.as_mut_ptr(), ptr::null_mut());
            trace.extend(rewards);
        }
        uavfarm_env_free(env);
        trace
    };
    assert_eq!(run(), run());
}

#[test]
fn qnet_checkpoint_forward_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agent.qnet");
    let net = Mlp::new(&[3, 5, 8], &mut uavfarm::rng::stream(1, 2)).unwrap();
    checkpoint::save(&net, &path).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut handle = ptr::null_mut();
    unsafe {
        assert_eq!(uavfarm_qnet_load(cpath.as_ptr(), &mut handle), UavStatus::UAV_OK);
        assert_eq!(uavfarm_qnet_input_len(handle), 3);
        assert_eq!(uavfarm_qnet_output_len(handle), 8);
        let input = [0.3, -0.2, 0.9];
        let mut q = [0.0; 8];
        assert_eq!(uavfarm_qnet_forward(handle, input.as_ptr(), 3, q.as_mut_ptr(), 8), UavStatus::UAV_OK);
        assert_eq!(q.to_vec(), net.forward(&input).unwrap());
        assert_eq!(
            uavfarm_qnet_forward(handle, input.as_ptr(), 2, q.as_mut_ptr(), 8),
            UavStatus::UAV_CONTRACT
        );
        uavfarm_qnet_free(handle);

        let missing = CString::new(dir.path().join("nope.qnet").to_str().unwrap()).unwrap();
        let st = uavfarm_qnet_load(missing.as_ptr(), &mut handle);
        assert_ne!(st, UavStatus::UAV_OK);
        assert!(handle.is_null());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/uavfarm.h")).unwrap();
    for name in [
        "uavfarm_last_error",
        "uavfarm_env_new",
        "uavfarm_env_step",
        "uavfarm_env_free",
        "uavfarm_qnet_load",
        "uavfarm_qnet_forward",
        "typedef struct UavEnv UavEnv",
        "UAV_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c99() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(format!("-I{dir}/include"))
        .arg(format!("{dir}/tests/c/smoke.c"))
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("no C compiler available, skipping: {e}"),
    }
}
