// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use segflow_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        segflow_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn entropy_of_uniform_counts() {
    let counts = [2.0, 2.0, 2.0, 2.0];
    let mut out = f64::NAN;
    let st = unsafe { segflow_entropy(counts.as_ptr(), 4, &mut out) };
    assert_eq!(st, SegflowStatus::Ok);
    assert!((out - 4f64.ln()).abs() < 1e-12);
}

#[test]
fn errors_are_reported_per_thread() {
    let mut out = 0.0;
    let st = unsafe { segflow_entropy(ptr::null(), 3, &mut out) };
    assert_eq!(st, SegflowStatus::NullPointer);
    assert!(last_error().contains("counts"));
    assert!(segflow_last_error_length() > 0);

    let zeros = [0.0, 0.0];
    let st = unsafe { segflow_entropy(zeros.as_ptr(), 2, &mut out) };
    assert_ne!(st, SegflowStatus::Ok);

    let other = std::thread::spawn(|| segflow_last_error_length()).join().unwrap();
    assert_eq!(other, 0);

    let ok = [1.0];
    assert_eq!(unsafe { segflow_entropy(ok.as_ptr(), 1, &mut out) }, SegflowStatus::Ok);
    assert_eq!(segflow_last_error_length(), 0);
}

#[test]
fn truncated_message_is_terminated() {
    let mut out = 0.0;
    unsafe { segflow_gini(ptr::null(), 2, &mut out) };
    let full = segflow_last_error_length();
    let mut buf = [1 as c_char; 4];
    let n = unsafe { segflow_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full);
    assert_eq!(buf[3], 0);
}

#[test]
fn gini_and_pearson() {
    let v = [0.0, 0.0, 0.0, 1.0];
    let mut g = 0.0;
    assert_eq!(unsafe { segflow_gini(v.as_ptr(), 4, &mut g) }, SegflowStatus::Ok);
    assert!((g - 0.75).abs() < 1e-12);

    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [2.0, 4.0, 6.0, 8.5];
    let mut r = 0.0;
    assert_eq!(unsafe { segflow_pearson(x.as_ptr(), y.as_ptr(), ptr::null(), 4, &mut r) }, SegflowStatus::Ok);
    assert!(r > 0.99);
    let flat = [1.0; 4];
    let st = unsafe { segflow_pearson(x.as_ptr(), flat.as_ptr(), ptr::null(), 4, &mut r) };
    assert_eq!(st, SegflowStatus::Degenerate);
}

#[test]
fn group_labels() {
    let scores = [5.0, 1.0, 3.0, 2.0, 4.0, 0.0];
    let mut labels = [0usize; 6];
    let st = unsafe { segflow_assign_groups(scores.as_ptr(), 6, 3, true, labels.as_mut_ptr()) };
    assert_eq!(st, SegflowStatus::Ok);
    assert_eq!(labels, [3, 1, 2, 2, 3, 1]);
}

#[test]
fn network_and_mixing_roundtrip() {
    let n = 4;
    let w = [
        0.0, 1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 2.0, //
        0.0, 0.0, 2.0, 0.0,
    ];
    let pop = [10.0; 4];
    let users = [5.0; 4];
    let mut net = ptr::null_mut();
    let st = unsafe { segflow_network_new(n, w.as_ptr(), pop.as_ptr(), users.as_ptr(), SegflowChannel::Purchase, &mut net) };
    assert_eq!(st, SegflowStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { segflow_network_len(net) }, 4);

    let labels = [1usize, 1, 2, 2];
    let mut mix = ptr::null_mut();
    let st = unsafe { segflow_mixing_new(net, labels.as_ptr(), 2, false, &mut mix) };
    assert_ne!(st, SegflowStatus::Ok, "raw networks need the explicit flag");

    let mut weighted = ptr::null_mut();
    assert_eq!(unsafe { segflow_network_population_weight(net, &mut weighted) }, SegflowStatus::Ok);
    let mut ww = [0.0; 16];
    assert_eq!(unsafe { segflow_network_weights(weighted, ww.as_mut_ptr(), 16) }, SegflowStatus::Ok);
    assert!((ww[1] - 2.0).abs() < 1e-12);
    assert_eq!(unsafe { segflow_network_weights(weighted, ww.as_mut_ptr(), 3) }, SegflowStatus::InvalidArgument);

    assert_eq!(unsafe { segflow_mixing_new(weighted, labels.as_ptr(), 2, false, &mut mix) }, SegflowStatus::Ok);
    let mut r = 0.0;
    assert_eq!(unsafe { segflow_mixing_assortativity(mix, &mut r) }, SegflowStatus::Ok);
    assert!((r - 1.0).abs() < 1e-12);
    let mut e = [0.0; 4];
    assert_eq!(unsafe { segflow_mixing_normalized(mix, e.as_mut_ptr(), 4) }, SegflowStatus::Ok);
    assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    unsafe {
        segflow_mixing_free(mix);
        segflow_network_free(weighted);
        segflow_network_free(net);
        segflow_network_free(ptr::null_mut());
    }
}

#[test]
fn grid_bias() {
    let mass = [0.0, 3.0, 1.0, 0.0];
    let mut mix = ptr::null_mut();
    assert_eq!(unsafe { segflow_mixing_from_grid(2, mass.as_ptr(), &mut mix) }, SegflowStatus::Ok);
    let mut b = 0.0;
    assert_eq!(unsafe { segflow_mixing_asymmetry_bias(mix, &mut b) }, SegflowStatus::Ok);
    assert!((b - 0.5).abs() < 1e-12);
    unsafe { segflow_mixing_free(mix) };
}

#[test]
fn gravity_simulate_then_fit() {
    let n = 6;
    let coords: Vec<(f64, f64)> = (0..n).map(|i| ((i % 3) as f64 * 2.0, (i / 3) as f64 * 3.0)).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (coords[i], coords[j]);
            dist[i * n + j] = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        }
    }
    let origin: Vec<f64> = (0..n).map(|i| 10.0 + 7.0 * i as f64).collect();
    let dest: Vec<f64> = (0..n).map(|i| 3.0 + ((i * 5) % 7) as f64).collect();
    let planted = SegflowGravityParams { c: 0.249, beta1: 0.762, beta2: 0.598, epsilon: 0.233, alpha: 0.918, r2_weighted: 0.0 };
    let mut flows = vec![0.0; n * n];
    let st = unsafe {
        segflow_simulate_gravity(&planted, n, dist.as_ptr(), origin.as_ptr(), dest.as_ptr(), flows.as_mut_ptr())
    };
    assert_eq!(st, SegflowStatus::Ok, "{}", last_error());
    let expect = 0.249 * origin[1].powf(0.762) * dest[4].powf(0.598) / (dist[n + 4] + 0.233).powf(0.918);
    assert!((flows[n + 4] - expect).abs() < 1e-9 * expect);

    let pop = vec![1.0; n];
    let mut net = ptr::null_mut();
    let st = unsafe { segflow_network_new(n, flows.as_ptr(), pop.as_ptr(), pop.as_ptr(), SegflowChannel::Purchase, &mut net) };
    assert_eq!(st, SegflowStatus::Ok);
    let mut fit = SegflowGravityParams { c: 0.0, beta1: 0.0, beta2: 0.0, epsilon: 0.0, alpha: 0.0, r2_weighted: 0.0 };
    let st = unsafe { segflow_fit_gravity(net, dist.as_ptr(), origin.as_ptr(), dest.as_ptr(), &mut fit) };
    assert_eq!(st, SegflowStatus::Ok, "{}", last_error());
    assert!((fit.alpha - 0.918).abs() < 0.01, "{fit:?}");
    assert!((fit.beta1 - 0.762).abs() < 0.01, "{fit:?}");
    unsafe { segflow_network_free(net) };
}

#[test]
fn synth_writes_city() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    let preset = CString::new("neutral").unwrap();
    let st = unsafe { segflow_synth_write(preset.as_ptr(), 3, path.as_ptr()) };
    assert_eq!(st, SegflowStatus::Ok, "{}", last_error());
    assert!(dir.path().join("neighborhoods.csv").exists());

    let bad = CString::new("nonexistent").unwrap();
    let st = unsafe { segflow_synth_write(bad.as_ptr(), 3, path.as_ptr()) };
    assert_eq!(st, SegflowStatus::InvalidArgument);
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(segflow_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_exports() {
    let header = include_str!("../include/segflow.h");
    for sym in ["segflow_network_new", "segflow_fit_gravity", "segflow_last_error_message", "SEGFLOW_STATUS_PANIC"] {
        assert!(header.contains(sym), "{sym}");
    }
}
