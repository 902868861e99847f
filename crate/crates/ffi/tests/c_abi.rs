use std::ffi::{CStr, CString};
use std::ptr;

use noon_diffusion_ffi::*;

fn last_error() -> String {
    let p = nd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn stokes_einstein_matches_hand_value() {
    let mut d = 0.0;
    let st = unsafe { nd_stokes_einstein(300.0, 1e-3, 1e-9, &mut d) };
    assert_eq!(st, NdStatus::Ok);
    let hand = 1.380649e-23 * 300.0 / (6.0 * std::f64::consts::PI * 1e-3 * 1e-9);
    assert!((d - hand).abs() < 1e-12 * hand);

    let st = unsafe { nd_stokes_einstein(-1.0, 1e-3, 1e-9, &mut d) };
    assert_eq!(st, NdStatus::InvalidInput);
    assert!(last_error().contains("temperature") || !last_error().is_empty());
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(unsafe { nd_stokes_einstein(300.0, 1e-3, 1e-9, ptr::null_mut()) }, NdStatus::NullPointer);
    assert_eq!(unsafe { nd_curve_len(ptr::null()) }, 0);
    unsafe {
        nd_curve_free(ptr::null_mut());
        nd_spin_system_free(ptr::null_mut());
        nd_string_free(ptr::null_mut());
    }
}

#[test]
fn stejskal_tanner_and_timing_guard() {
    let mut s = 0.0;
    let st = unsafe { nd_stejskal_tanner(0.1, 2e-3, 50e-3, 1e-9, 2.675e8, &mut s) };
    assert_eq!(st, NdStatus::Ok);
    let b = (2.675e8f64 * 0.1 * 2e-3).powi(2) * (50e-3 - 2e-3 / 3.0);
    assert!((s - (-b * 1e-9).exp()).abs() < 1e-15);
    let st = unsafe { nd_stejskal_tanner(0.1, 2e-3, 1e-3, 1e-9, 2.675e8, &mut s) };
    assert_eq!(st, NdStatus::Physics);
}

#[test]
fn spin_system_handle() {
    let mut sys = ptr::null_mut();
    let st = unsafe { nd_spin_system_new(1.08394e8, 2.6752218744e8, 10, 11.0, NdRepresentation::DickeSubspace, &mut sys) };
    assert_eq!(st, NdStatus::Ok);
    let mut g = 0.0;
    assert_eq!(unsafe { nd_spin_system_gamma_eff(sys, &mut g) }, NdStatus::Ok);
    assert!((g - (1.08394e8 + 9.0 * 2.6752218744e8)).abs() < 1.0);
    unsafe { nd_spin_system_free(sys) };

    let mut bad = ptr::null_mut();
    let st = unsafe { nd_spin_system_new(1.0, 1.0, 20, 11.0, NdRepresentation::FullTensor, &mut bad) };
    assert_eq!(st, NdStatus::Physics);
    assert!(bad.is_null());
}

#[test]
fn curve_fit_round_trip() {
    let (delta, big, q, d) = (2e-3, 50e-3, 2.6752218744e8, 6.24e-10);
    let mut curve = ptr::null_mut();
    assert_eq!(unsafe { nd_curve_new(delta, big, q, &mut curve) }, NdStatus::Ok);
    for i in 0..21 {
        let g = 0.3325 * i as f64 / 20.0;
        let s = (-(q * g * delta).powi(2) * (big - delta / 3.0) * d).exp();
        assert_eq!(unsafe { nd_curve_push(curve, g, s, f64::NAN) }, NdStatus::Ok);
    }
    assert_eq!(unsafe { nd_curve_len(curve) }, 21);
    let mut fit = NdFitResult::default();
    let st = unsafe { nd_fit_diffusion(curve, NdFitMethod::NonlinearLs, 50, 7, &mut fit) };
    assert_eq!(st, NdStatus::Ok);
    assert!(((fit.d_fit - d) / d).abs() < 1e-9);
    assert!(!fit.degenerate);
    unsafe { nd_curve_free(curve) };
}

#[test]
fn flat_curve_is_degenerate() {
    let mut curve = ptr::null_mut();
    unsafe { nd_curve_new(2e-3, 50e-3, 2.675e8, &mut curve) };
    for i in 0..5 {
        unsafe { nd_curve_push(curve, 0.1 * i as f64, 1.0, f64::NAN) };
    }
    let mut fit = NdFitResult::default();
    let st = unsafe { nd_fit_diffusion(curve, NdFitMethod::LogLinear, 0, 0, &mut fit) };
    assert_eq!(st, NdStatus::Degenerate);
    assert!(fit.degenerate);
    unsafe { nd_curve_free(curve) };
}

const DESCRIPTOR: &str = r#"{
  "system": {"control": {"label": "31P"}, "target": {"label": "1H"}, "n_total": 3, "j_coupling_Hz": 11.0},
  "sequence": "noon",
  "timing": {"big_delta_s": 0.005, "little_delta_s": 0.001},
  "sweep": {"g_max_T_per_m": 1.0, "n_points": 5},
  "diffusion": {"d_true_m2_per_s": 1e-9},
  "fit": {"bootstrap_samples": 0},
  "seed": 3
}"#;

#[test]
fn simulate_json_returns_report() {
    let input = CString::new(DESCRIPTOR).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { nd_simulate_json(input.as_ptr(), &mut out) };
    assert_eq!(st, NdStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { nd_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let d = v["fit"]["d_fit_m2_per_s"].as_f64().unwrap();
    assert!(((d - 1e-9) / 1e-9).abs() < 1e-6);
}

#[test]
fn simulate_json_errors() {
    let mut out = ptr::null_mut();
    let bad = CString::new(DESCRIPTOR.replace("\"seed\": 3", "\"sed\": 3")).unwrap();
    assert_eq!(unsafe { nd_simulate_json(bad.as_ptr(), &mut out) }, NdStatus::InvalidInput);
    assert!(last_error().contains("sed"));
    let guard = CString::new(DESCRIPTOR.replace("\"big_delta_s\": 0.005", "\"big_delta_s\": 0.0005")).unwrap();
    assert_eq!(unsafe { nd_simulate_json(guard.as_ptr(), &mut out) }, NdStatus::Physics);
    assert!(out.is_null());
}

#[test]
fn header_is_generated() {
    let header = include_str!("../include/noon_diffusion.h");
    for name in ["nd_fit_diffusion", "nd_simulate_json", "NdStatus", "typedef struct NdCurve NdCurve"] {
        assert!(header.contains(name), "{name}");
    }
}
