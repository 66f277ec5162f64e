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

//! C ABI over the segflow library.
//!
//! Every fallible function returns a [`SegflowStatus`]; on failure the
//! message is kept per thread and read with [`segflow_last_error_message`].
//! Handles are created by `*_new` functions and released with the matching
//! `*_free`. Matrices are row-major `n*n` arrays, origin first.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use segflow::models::{fit_gravity, simulate_gravity, GravityFitOptions, GravityParams};
use segflow::network::{Channel, DistanceMatrix, InteractionNetwork, Weighting};
use segflow::segregation::{
    asymmetry_bias, assign_groups_from_scores, assortativity, mixing_matrix, mixing_matrix_raw, GroupAssignment,
    MixingMatrix,
};
use segflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Zero variance, zero mass or too few usable entries.
    Degenerate = 3,
    /// Singular or ill-conditioned linear algebra.
    Numerical = 4,
    Io = 5,
    Parse = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegflowChannel {
    Purchase = 0,
    Mention = 1,
}

impl From<SegflowChannel> for Channel {
    fn from(c: SegflowChannel) -> Channel {
        match c {
            SegflowChannel::Purchase => Channel::Purchase,
            SegflowChannel::Mention => Channel::Mention,
        }
    }
}

/// Fitted or planted gravity constants.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegflowGravityParams {
    pub c: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub alpha: f64,
    /// Output only.
    pub r2_weighted: f64,
}

/// Opaque interaction network.
pub struct SegflowNetwork(InteractionNetwork);

/// Opaque group-level mixing matrix.
pub struct SegflowMixing(MixingMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SegflowStatus {
    match e {
        Error::Input { .. } | Error::Output { .. } => SegflowStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::MalformedPolygon { .. } | Error::DuplicateId(_) => {
            SegflowStatus::Parse
        }
        Error::EmptyActivity
        | Error::DegenerateCorrelation
        | Error::DegenerateAttributeDistribution
        | Error::NoInteractionMass
        | Error::AllZero
        | Error::TooFewPositiveEntries { .. }
        | Error::TooFewEdges { .. }
        | Error::TooManyDegenerateReplicates { .. } => SegflowStatus::Degenerate,
        Error::SingularNormalEquations { .. } | Error::DistanceSingularity | Error::ZeroSimulatedFlow { .. } => {
            SegflowStatus::Numerical
        }
        _ => SegflowStatus::InvalidArgument,
    }
}

struct Fail(SegflowStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SegflowStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic for the calling thread.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SegflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SegflowStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SegflowStatus::Panic
        }
    }
}

/// Borrows `len` values; a zero length accepts a null pointer.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn square(n: usize, what: &str) -> Result<usize, Fail> {
    n.checked_mul(n)
        .ok_or_else(|| Fail(SegflowStatus::InvalidArgument, format!("{what}: n*n overflows")))
}

/// Length of the last error message on this thread, 0 if none.
#[no_mangle]
pub extern "C" fn segflow_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message, NUL-terminated and truncated to
/// `capacity`. Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn segflow_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn segflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Shannon entropy (nats) of non-negative counts.
///
/// # Safety
/// `counts` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_entropy(counts: *const f64, n: usize, out: *mut f64) -> SegflowStatus {
    guard(|| {
        let counts = input(counts, n, "counts")?;
        *output(out, "out")? = segflow::metrics::individual_diversity(counts.iter().copied())?;
        Ok(())
    })
}

/// GINI coefficient of non-negative values.
///
/// # Safety
/// `values` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_gini(values: *const f64, n: usize, out: *mut f64) -> SegflowStatus {
    guard(|| {
        let values = input(values, n, "values")?;
        *output(out, "out")? = segflow::stats::gini(values)?;
        Ok(())
    })
}

/// Pearson correlation; `weights` may be null.
///
/// # Safety
/// `x`, `y` and a non-null `weights` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn segflow_pearson(
    x: *const f64,
    y: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut f64,
) -> SegflowStatus {
    guard(|| {
        let x = input(x, n, "x")?;
        let y = input(y, n, "y")?;
        let w = if weights.is_null() { None } else { Some(input(weights, n, "weights")?) };
        *output(out, "out")? = segflow::metrics::pearson(x, y, w)?;
        Ok(())
    })
}

/// Equal-size SES groups: writes labels 1..=k for each of the `n` scores.
///
/// # Safety
/// `scores` must point to `n` doubles and `labels_out` to `n` writable
/// `size_t`s.
#[no_mangle]
pub unsafe extern "C" fn segflow_assign_groups(
    scores: *const f64,
    n: usize,
    k: usize,
    ses_ascending: bool,
    labels_out: *mut usize,
) -> SegflowStatus {
    guard(|| {
        let scores = input(scores, n, "scores")?;
        if labels_out.is_null() {
            return Err(null("labels_out"));
        }
        let ids: Vec<String> = (0..n).map(|i| format!("{i:020}")).collect();
        let groups = assign_groups_from_scores(scores, &ids, k, ses_ascending)?;
        slice::from_raw_parts_mut(labels_out, n).copy_from_slice(groups.labels());
        Ok(())
    })
}

/// Raw network from an `n*n` weight matrix with per-node population and
/// sampled-user counts.
///
/// # Safety
/// `weights` must point to `n*n` doubles, `population` and `users` to `n`
/// doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_network_new(
    n: usize,
    weights: *const f64,
    population: *const f64,
    users: *const f64,
    channel: SegflowChannel,
    out: *mut *mut SegflowNetwork,
) -> SegflowStatus {
    guard(|| {
        let out = output(out, "out")?;
        let w = input(weights, square(n, "weights")?, "weights")?;
        let p = input(population, n, "population")?;
        let u = input(users, n, "users")?;
        let ids = (0..n).map(|i| format!("{i:020}")).collect();
        let net = InteractionNetwork::from_dense(ids, w.to_vec(), channel.into(), Weighting::Raw, p.to_vec(), u.to_vec())?;
        *out = Box::into_raw(Box::new(SegflowNetwork(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn segflow_network_free(net: *mut SegflowNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Population-weighted copy of a raw network.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_network_population_weight(
    net: *const SegflowNetwork,
    out: *mut *mut SegflowNetwork,
) -> SegflowStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let out = output(out, "out")?;
        *out = Box::into_raw(Box::new(SegflowNetwork(net.0.weighted()?)));
        Ok(())
    })
}

/// Copies the `n*n` weights into `buf`.
///
/// # Safety
/// `net` must be a live handle and `buf` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn segflow_network_weights(
    net: *const SegflowNetwork,
    buf: *mut f64,
    capacity: usize,
) -> SegflowStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let w = net.0.weights();
        if capacity < w.len() {
            return Err(Fail(SegflowStatus::InvalidArgument, format!("buffer holds {capacity}, need {}", w.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        slice::from_raw_parts_mut(buf, w.len()).copy_from_slice(w);
        Ok(())
    })
}

/// Node count of a network handle, 0 for null.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn segflow_network_len(net: *const SegflowNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.len())
}

/// Group-level mixing of a network under 1-based `labels`. Raw networks are
/// rejected unless `allow_raw` is set.
///
/// # Safety
/// `net` must be a live handle, `labels` must point to one label per node.
#[no_mangle]
pub unsafe extern "C" fn segflow_mixing_new(
    net: *const SegflowNetwork,
    labels: *const usize,
    k: usize,
    allow_raw: bool,
    out: *mut *mut SegflowMixing,
) -> SegflowStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let out = output(out, "out")?;
        let labels = input(labels, net.0.len(), "labels")?;
        let groups = GroupAssignment::from_labels(k, labels.to_vec())?;
        let mix = if allow_raw {
            mixing_matrix_raw(&net.0, &groups)?
        } else {
            mixing_matrix(&net.0, &groups)?
        };
        *out = Box::into_raw(Box::new(SegflowMixing(mix)));
        Ok(())
    })
}

/// Mixing matrix from a `k*k` grid of group masses, labels 1..=k.
///
/// # Safety
/// `mass` must point to `k*k` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_mixing_from_grid(k: usize, mass: *const f64, out: *mut *mut SegflowMixing) -> SegflowStatus {
    guard(|| {
        let out = output(out, "out")?;
        let mass = input(mass, square(k, "mass")?, "mass")?;
        let mix = MixingMatrix::from_grid(k, mass.to_vec(), Channel::Purchase)?;
        *out = Box::into_raw(Box::new(SegflowMixing(mix)));
        Ok(())
    })
}

/// # Safety
/// `mix` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn segflow_mixing_free(mix: *mut SegflowMixing) {
    if !mix.is_null() {
        drop(Box::from_raw(mix));
    }
}

/// # Safety
/// `mix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_mixing_assortativity(mix: *const SegflowMixing, out: *mut f64) -> SegflowStatus {
    guard(|| {
        let mix = mix.as_ref().ok_or_else(|| null("mix"))?;
        *output(out, "out")? = assortativity(&mix.0)?;
        Ok(())
    })
}

/// Upper minus lower triangle of the normalized mixing matrix.
///
/// # Safety
/// `mix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_mixing_asymmetry_bias(mix: *const SegflowMixing, out: *mut f64) -> SegflowStatus {
    guard(|| {
        let mix = mix.as_ref().ok_or_else(|| null("mix"))?;
        *output(out, "out")? = asymmetry_bias(&mix.0)?;
        Ok(())
    })
}

/// Copies the globally normalized `k*k` matrix into `buf`.
///
/// # Safety
/// `mix` must be a live handle and `buf` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn segflow_mixing_normalized(mix: *const SegflowMixing, buf: *mut f64, capacity: usize) -> SegflowStatus {
    guard(|| {
        let mix = mix.as_ref().ok_or_else(|| null("mix"))?;
        let e = mix.0.normalized()?;
        if capacity < e.len() {
            return Err(Fail(SegflowStatus::InvalidArgument, format!("buffer holds {capacity}, need {}", e.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        slice::from_raw_parts_mut(buf, e.len()).copy_from_slice(&e);
        Ok(())
    })
}

/// Weighted least-squares gravity fit on a raw network with default options.
///
/// # Safety
/// `net` must be a live handle; `dist_km` must point to `n*n` doubles and
/// `origin`, `dest` to `n` doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn segflow_fit_gravity(
    net: *const SegflowNetwork,
    dist_km: *const f64,
    origin: *const f64,
    dest: *const f64,
    out: *mut SegflowGravityParams,
) -> SegflowStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let n = net.0.len();
        let out = output(out, "out")?;
        let dist = DistanceMatrix::from_dense(n, input(dist_km, square(n, "dist_km")?, "dist_km")?.to_vec())?;
        let origin = input(origin, n, "origin")?;
        let dest = input(dest, n, "dest")?;
        let p = fit_gravity(&net.0, &dist, origin, dest, &GravityFitOptions::default())?;
        *out = SegflowGravityParams {
            c: p.c,
            beta1: p.beta1,
            beta2: p.beta2,
            epsilon: p.epsilon,
            alpha: p.alpha,
            r2_weighted: p.r2_weighted,
        };
        Ok(())
    })
}

/// Writes model flows `c·o_i^β1·d_j^β2/(T_ij+ε)^α` into `weights_out`.
///
/// # Safety
/// `params` must be readable; `dist_km` and `weights_out` must hold `n*n`
/// doubles, `origin` and `dest` `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn segflow_simulate_gravity(
    params: *const SegflowGravityParams,
    n: usize,
    dist_km: *const f64,
    origin: *const f64,
    dest: *const f64,
    weights_out: *mut f64,
) -> SegflowStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let nn = square(n, "dist_km")?;
        let dist = DistanceMatrix::from_dense(n, input(dist_km, nn, "dist_km")?.to_vec())?;
        let origin = input(origin, n, "origin")?;
        let dest = input(dest, n, "dest")?;
        if weights_out.is_null() {
            return Err(null("weights_out"));
        }
        let params = GravityParams::new(p.c, p.beta1, p.beta2, p.epsilon, p.alpha, Channel::Purchase)?;
        let ids = (0..n).map(|i| format!("{i:020}")).collect();
        let template = InteractionNetwork::from_dense(ids, vec![0.0; nn], Channel::Purchase, Weighting::Raw, vec![1.0; n], vec![1.0; n])?;
        let sim = simulate_gravity(&params, &dist, origin, dest, &template)?;
        slice::from_raw_parts_mut(weights_out, nn).copy_from_slice(sim.weights());
        Ok(())
    })
}

/// Generates a preset synthetic city into directory `dir`.
///
/// # Safety
/// `preset` and `dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn segflow_synth_write(preset: *const c_char, seed: u64, dir: *const c_char) -> SegflowStatus {
    guard(|| {
        let utf8 = |p: *const c_char, what: &str| -> Result<String, Fail> {
            if p.is_null() {
                return Err(null(what));
            }
            CStr::from_ptr(p)
                .to_str()
                .map(str::to_string)
                .map_err(|_| Fail(SegflowStatus::InvalidArgument, format!("{what} is not UTF-8")))
        };
        let preset = utf8(preset, "preset")?;
        let dir = utf8(dir, "dir")?;
        let cfg = segflow::synth::SynthConfig::preset(&preset, seed)?;
        segflow::synth::generate_city(&cfg)?.write_to(Path::new(&dir))?;
        Ok(())
    })
}
