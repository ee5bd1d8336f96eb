//! Exercises the C ABI from Rust: handle lifecycle, buffer contracts, error
//! codes, and the JSON experiment entry point.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use tqbeam_ffi::*;

fn one_ring_scenario(antennas: usize) -> *mut TqScenario {
    let theta = [-0.5f64, 0.5];
    let delta = [0.24f64, 0.24];
    let users = [2usize, 2];
    let outer = [4usize, 4];
    let mut handle: *mut TqScenario = ptr::null_mut();
    let status = unsafe {
        tq_scenario_one_ring(
            antennas,
            2,
            theta.as_ptr(),
            delta.as_ptr(),
            users.as_ptr(),
            outer.as_ptr(),
            0.5,
            1.0,
            10.0,
            &mut handle,
        )
    };
    assert_eq!(status, TqStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn version_and_status_names_are_static_strings() {
    let version = unsafe { CStr::from_ptr(tq_version()) };
    assert!(!version.to_str().unwrap().is_empty());
    let name = unsafe { CStr::from_ptr(tq_status_name(TqStatus::InfeasibleBd)) };
    assert_eq!(name.to_str().unwrap(), "block diagonalization infeasible");
}

#[test]
fn scenario_lifecycle_and_accessors() {
    let scenario = one_ring_scenario(16);
    unsafe {
        assert_eq!(tq_scenario_antennas(scenario), 16);
        assert_eq!(tq_scenario_groups(scenario), 2);
        tq_scenario_free(scenario);
        tq_scenario_free(ptr::null_mut());
    }
}

#[test]
fn scenario_rejects_bad_geometry() {
    let theta = [9.0f64];
    let delta = [0.2f64];
    let users = [2usize];
    let outer = [4usize];
    let mut handle: *mut TqScenario = ptr::null_mut();
    let status = unsafe {
        tq_scenario_one_ring(
            8,
            1,
            theta.as_ptr(),
            delta.as_ptr(),
            users.as_ptr(),
            outer.as_ptr(),
            0.5,
            1.0,
            10.0,
            &mut handle,
        )
    };
    assert_eq!(status, TqStatus::InvalidInput);
    assert!(handle.is_null());
    let mut buf = [0 as c_char; 256];
    let len = unsafe { tq_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    let message = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(message.contains("center angle"), "got {message:?}");
}

#[test]
fn null_pointers_are_reported() {
    let status = unsafe {
        tq_scenario_one_ring(
            8,
            1,
            ptr::null(),
            ptr::null(),
            ptr::null(),
            ptr::null(),
            0.5,
            1.0,
            10.0,
            ptr::null_mut(),
        )
    };
    assert_eq!(status, TqStatus::NullPointer);
    let mut out: *mut TqOuterBeamformer = ptr::null_mut();
    assert_eq!(
        unsafe { tq_outer_design(ptr::null(), 0, TqMethod::Tqp, 1e-4, 100, 1.0, 0.95, &mut out) },
        TqStatus::NullPointer
    );
}

#[test]
fn tqp_design_through_the_abi() {
    let scenario = one_ring_scenario(16);
    let mut beamformer: *mut TqOuterBeamformer = ptr::null_mut();
    let status = unsafe {
        tq_outer_design(
            scenario,
            0,
            TqMethod::Tqp,
            1e-6,
            1000,
            1.0,
            0.95,
            &mut beamformer,
        )
    };
    assert_eq!(status, TqStatus::Ok);
    unsafe {
        let rows = tq_outer_rows(beamformer);
        let cols = tq_outer_cols(beamformer);
        assert_eq!((rows, cols), (16, 4));
        assert!(tq_outer_iterations(beamformer) >= 1);

        // Objective trace: monotone non-decreasing.
        let trace_len = tq_outer_objective_len(beamformer);
        assert!(trace_len >= 2);
        let mut trace = vec![0.0f64; trace_len];
        assert_eq!(
            tq_outer_objective(beamformer, trace.as_mut_ptr(), trace.len()),
            TqStatus::Ok
        );
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }

        // Matrix buffer: columns come back orthonormal.
        let mut flat = vec![0.0f64; 2 * rows * cols];
        assert_eq!(
            tq_outer_matrix(beamformer, flat.as_mut_ptr(), flat.len()),
            TqStatus::Ok
        );
        for a in 0..cols {
            for b in 0..cols {
                let mut re = 0.0;
                let mut im = 0.0;
                for r in 0..rows {
                    let (ar, ai) = (flat[2 * (r * cols + a)], flat[2 * (r * cols + a) + 1]);
                    let (br, bi) = (flat[2 * (r * cols + b)], flat[2 * (r * cols + b) + 1]);
                    re += ar * br + ai * bi;
                    im += ar * bi - ai * br;
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((re - expect).abs() < 1e-9 && im.abs() < 1e-9);
            }
        }

        // Undersized buffers are refused.
        assert_eq!(
            tq_outer_matrix(beamformer, flat.as_mut_ptr(), 3),
            TqStatus::BufferTooSmall
        );
        assert_eq!(
            tq_outer_objective(beamformer, trace.as_mut_ptr(), trace_len - 1),
            TqStatus::BufferTooSmall
        );

        tq_outer_free(beamformer);
        tq_scenario_free(scenario);
    }
}

#[test]
fn infeasible_bd_maps_to_its_status() {
    // One wide-spread interferer at full retention exhausts a small array.
    let theta = [-0.5f64, 0.5];
    let delta = [1.2f64, 1.2];
    let users = [2usize, 2];
    let outer = [4usize, 4];
    let mut scenario: *mut TqScenario = ptr::null_mut();
    let status = unsafe {
        tq_scenario_one_ring(
            4,
            2,
            theta.as_ptr(),
            delta.as_ptr(),
            users.as_ptr(),
            outer.as_ptr(),
            0.5,
            1.0,
            10.0,
            &mut scenario,
        )
    };
    assert_eq!(status, TqStatus::Ok);
    let mut beamformer: *mut TqOuterBeamformer = ptr::null_mut();
    let status = unsafe {
        tq_outer_design(
            scenario,
            0,
            TqMethod::Bd,
            1e-4,
            100,
            1.0,
            1.0,
            &mut beamformer,
        )
    };
    assert_eq!(status, TqStatus::InfeasibleBd);
    unsafe { tq_scenario_free(scenario) };
}

#[test]
fn experiment_runner_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "m": 12,
        "g": 2,
        "theta_deg": [-30.0, 30.0],
        "delta_deg": [13.846153846153847, 13.846153846153847],
        "k_g": [2, 2],
        "m_g": [4, 4],
        "sigma2": 1.0,
        "pt_db": [15.0],
        "trials": 10,
        "seed": 5,
        "methods": ["TQP", "BD"],
        "inner": "ZF"
    });
    let cfg = CString::new(cfg.to_string()).unwrap();
    let experiment = CString::new("sumrate").unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let json_b = dir.path().join("b.json");
    let path_a = CString::new(csv_a.to_str().unwrap()).unwrap();
    let path_b = CString::new(csv_b.to_str().unwrap()).unwrap();
    let path_json = CString::new(json_b.to_str().unwrap()).unwrap();

    let status = unsafe {
        tq_run_experiment_json(cfg.as_ptr(), experiment.as_ptr(), path_a.as_ptr(), ptr::null(), 1)
    };
    assert_eq!(status, TqStatus::Ok);
    let status = unsafe {
        tq_run_experiment_json(
            cfg.as_ptr(),
            experiment.as_ptr(),
            path_b.as_ptr(),
            path_json.as_ptr(),
            4,
        )
    };
    assert_eq!(status, TqStatus::Ok);
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "CSV must not depend on thread count");
    assert!(json_b.exists());

    let bad = CString::new("{\"m\": 0}").unwrap();
    let status = unsafe {
        tq_run_experiment_json(bad.as_ptr(), experiment.as_ptr(), path_a.as_ptr(), ptr::null(), 0)
    };
    assert_eq!(status, TqStatus::ConfigError);

    let bad_exp = CString::new("warp").unwrap();
    let status = unsafe {
        tq_run_experiment_json(cfg.as_ptr(), bad_exp.as_ptr(), path_a.as_ptr(), ptr::null(), 0)
    };
    assert_eq!(status, TqStatus::ConfigError);
}
