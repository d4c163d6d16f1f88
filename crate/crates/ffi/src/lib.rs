//! C ABI for the qnnent engine.
//!
//! States are opaque heap handles created and destroyed by this library;
//! every fallible call returns a [`QnnentStatus`] and stores a message
//! retrievable with [`qnnent_last_error_message`] (thread local, valid
//! until the next failing call on the same thread). The generated header
//! lives at `include/qnnent.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};

use libc::{c_char, c_double};
use qnnent::quasi_product::{cluster_state_1d, graph_state, toric};
use qnnent::state::{Bipartition, DenseState};
use qnnent::Error;

/// Status codes mirrored from the engine's error taxonomy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnnentStatus {
    Ok = 0,
    InvalidArgument = 1,
    Config = 2,
    Resource = 3,
    Degenerate = 4,
    Precondition = 5,
    Format = 6,
    Io = 7,
    NullPointer = 8,
}

/// Opaque dense-state handle.
pub struct QnnentState {
    inner: DenseState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("no interior nul");
    });
}

fn status_of(err: &Error) -> QnnentStatus {
    match err {
        Error::Input(_) => QnnentStatus::InvalidArgument,
        Error::Config(_) => QnnentStatus::Config,
        Error::Resource(_) => QnnentStatus::Resource,
        Error::Degenerate(_) => QnnentStatus::Degenerate,
        Error::Precondition(_) => QnnentStatus::Precondition,
        Error::Format(_) => QnnentStatus::Format,
        Error::Io(_) => QnnentStatus::Io,
    }
}

fn fail(err: &Error) -> QnnentStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn null_pointer(what: &str) -> QnnentStatus {
    set_error(&format!("null pointer: {what}"));
    QnnentStatus::NullPointer
}

fn emit(out: *mut *mut QnnentState, state: DenseState) -> QnnentStatus {
    unsafe {
        *out = Box::into_raw(Box::new(QnnentState { inner: state }));
    }
    QnnentStatus::Ok
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, QnnentStatus> {
    if ptr.is_null() {
        return Err(null_pointer("path"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(QnnentStatus::InvalidArgument)
        }
    }
}

/// Message of the most recent failure on this thread. Never null; empty
/// before the first failure. The pointer is invalidated by the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn qnnent_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Version string of the underlying engine (static storage).
#[no_mangle]
pub extern "C" fn qnnent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a state handle; a null handle is a no-op.
///
/// # Safety
/// `state` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qnnent_state_free(state: *mut QnnentState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of sites of a state; 0 for a null handle.
///
/// # Safety
/// `state` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn qnnent_state_n_sites(state: *const QnnentState) -> u32 {
    state.as_ref().map_or(0, |s| s.inner.n_sites() as u32)
}

/// Reads one amplitude by basis index.
///
/// # Safety
/// `state` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qnnent_state_amplitude(
    state: *const QnnentState,
    index: u64,
    re: *mut c_double,
    im: *mut c_double,
) -> QnnentStatus {
    let Some(state) = state.as_ref() else {
        return null_pointer("state");
    };
    if re.is_null() || im.is_null() {
        return null_pointer("amplitude output");
    }
    if index >= state.inner.amplitudes().len() as u64 {
        set_error(&format!("basis index {index} out of range"));
        return QnnentStatus::InvalidArgument;
    }
    let amp = state.inner.amplitude(index);
    *re = amp.re;
    *im = amp.im;
    QnnentStatus::Ok
}

/// Normalizes a state in place. Needed before entropy or rank queries on
/// states loaded from files that were saved unnormalized.
///
/// # Safety
/// `state` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qnnent_state_normalize(state: *mut QnnentState) -> QnnentStatus {
    let Some(state) = state.as_mut() else {
        return null_pointer("state");
    };
    match state.inner.normalize() {
        Ok(normalized) => {
            state.inner = normalized;
            QnnentStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Loads a `.qns` state file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qnnent_state_read(
    path: *const c_char,
    out: *mut *mut QnnentState,
) -> QnnentStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match qnnent::qns::read(Path::new(&path)) {
        Ok(state) => emit(out, state),
        Err(e) => fail(&e),
    }
}

/// Writes a state to a `.qns` file (atomic rename).
///
/// # Safety
/// `state` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qnnent_state_write(
    state: *const QnnentState,
    path: *const c_char,
) -> QnnentStatus {
    let Some(state) = state.as_ref() else {
        return null_pointer("state");
    };
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match qnnent::qns::write(&state.inner, Path::new(&path)) {
        Ok(()) => QnnentStatus::Ok,
        Err(e) => fail(&e),
    }
}

fn max_sites() -> Result<usize, Error> {
    qnnent::cli::max_sites_from_env()
}

/// Builds the normalized periodic cluster state on `n_sites >= 3` qubits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qnnent_cluster_state(
    n_sites: u32,
    out: *mut *mut QnnentState,
) -> QnnentStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    let build = || -> Result<DenseState, Error> {
        let cover = cluster_state_1d(n_sites as usize)?;
        cover.evaluate(max_sites()?)?.normalize()
    };
    match build() {
        Ok(state) => emit(out, state),
        Err(e) => fail(&e),
    }
}

/// Builds the normalized toric-code ground state of winding sector
/// `(winding_x, winding_y)` on the `l x l` torus.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qnnent_toric_ground_state(
    l: u32,
    winding_x: u8,
    winding_y: u8,
    out: *mut *mut QnnentState,
) -> QnnentStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    let build = || -> Result<DenseState, Error> {
        toric::ground_state(l as usize, (winding_x, winding_y), max_sites()?)
    };
    match build() {
        Ok(state) => emit(out, state),
        Err(e) => fail(&e),
    }
}

/// Builds a normalized graph state from an edge list given as
/// `edge_count` pairs of vertex indices.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable u32 values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn qnnent_graph_state(
    n_vertices: u32,
    edges: *const u32,
    edge_count: usize,
    out: *mut *mut QnnentState,
) -> QnnentStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    if edges.is_null() && edge_count > 0 {
        return null_pointer("edges");
    }
    let pairs: Vec<(usize, usize)> = (0..edge_count)
        .map(|k| {
            let i = *edges.add(2 * k) as usize;
            let j = *edges.add(2 * k + 1) as usize;
            (i, j)
        })
        .collect();
    let build = || -> Result<DenseState, Error> {
        let cover = graph_state(&pairs, n_vertices as usize)?;
        cover.evaluate(max_sites()?)?.normalize()
    };
    match build() {
        Ok(state) => emit(out, state),
        Err(e) => fail(&e),
    }
}

/// Rényi entropy (nats) of the reduced state on `region`, a list of
/// distinct site indices.
///
/// # Safety
/// `state` must be a live handle, `region` must point to `region_len`
/// readable u32 values, and `out_nats` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qnnent_renyi_entropy(
    state: *const QnnentState,
    region: *const u32,
    region_len: usize,
    alpha: c_double,
    out_nats: *mut c_double,
) -> QnnentStatus {
    let Some(state) = state.as_ref() else {
        return null_pointer("state");
    };
    if region.is_null() || out_nats.is_null() {
        return null_pointer("region/out");
    }
    let sites: Vec<usize> = (0..region_len).map(|k| *region.add(k) as usize).collect();
    let compute = || -> Result<f64, Error> {
        let part = Bipartition::new(state.inner.n_sites(), sites.iter().copied())?;
        state.inner.schmidt(&part)?.renyi_entropy(alpha)
    };
    match compute() {
        Ok(entropy) => {
            *out_nats = entropy;
            QnnentStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Schmidt rank of the reduced state on `region` at relative tolerance
/// `rel_tol` (pass 0 to use the engine default).
///
/// # Safety
/// Same contracts as [`qnnent_renyi_entropy`].
#[no_mangle]
pub unsafe extern "C" fn qnnent_schmidt_rank(
    state: *const QnnentState,
    region: *const u32,
    region_len: usize,
    rel_tol: c_double,
    out_rank: *mut u64,
) -> QnnentStatus {
    let Some(state) = state.as_ref() else {
        return null_pointer("state");
    };
    if region.is_null() || out_rank.is_null() {
        return null_pointer("region/out");
    }
    let sites: Vec<usize> = (0..region_len).map(|k| *region.add(k) as usize).collect();
    let tol = if rel_tol > 0.0 {
        rel_tol
    } else {
        qnnent::DEFAULT_RANK_TOL
    };
    let compute = || -> Result<usize, Error> {
        let part = Bipartition::new(state.inner.n_sites(), sites.iter().copied())?;
        Ok(state.inner.schmidt(&part)?.numerical_rank(tol))
    };
    match compute() {
        Ok(rank) => {
            *out_rank = rank as u64;
            QnnentStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn cluster_state_entropy_through_the_c_abi() {
        unsafe {
            let mut handle: *mut QnnentState = ptr::null_mut();
            let status = qnnent_cluster_state(8, &mut handle);
            assert_eq!(status, QnnentStatus::Ok);
            assert_eq!(qnnent_state_n_sites(handle), 8);

            let region: Vec<u32> = vec![0, 1, 2, 3];
            let mut entropy = 0.0;
            let status =
                qnnent_renyi_entropy(handle, region.as_ptr(), region.len(), 2.0, &mut entropy);
            assert_eq!(status, QnnentStatus::Ok);
            assert!((entropy - 2.0 * std::f64::consts::LN_2).abs() < 1e-9);

            let mut rank = 0u64;
            let status = qnnent_schmidt_rank(handle, region.as_ptr(), region.len(), 0.0, &mut rank);
            assert_eq!(status, QnnentStatus::Ok);
            assert_eq!(rank, 4);
            qnnent_state_free(handle);
        }
    }

    #[test]
    fn file_round_trip_through_the_c_abi() {
        unsafe {
            let dir = tempfile::tempdir().unwrap();
            let path = cstr(dir.path().join("toric.qns").to_str().unwrap());

            let mut handle: *mut QnnentState = ptr::null_mut();
            assert_eq!(
                qnnent_toric_ground_state(2, 0, 0, &mut handle),
                QnnentStatus::Ok
            );
            assert_eq!(qnnent_state_write(handle, path.as_ptr()), QnnentStatus::Ok);

            let mut reloaded: *mut QnnentState = ptr::null_mut();
            assert_eq!(
                qnnent_state_read(path.as_ptr(), &mut reloaded),
                QnnentStatus::Ok
            );
            assert_eq!(qnnent_state_n_sites(reloaded), 8);

            let (mut re, mut im) = (0.0, 0.0);
            assert_eq!(
                qnnent_state_amplitude(reloaded, 0, &mut re, &mut im),
                QnnentStatus::Ok
            );
            assert!((re - 1.0 / 8f64.sqrt()).abs() < 1e-12);

            qnnent_state_free(handle);
            qnnent_state_free(reloaded);
        }
    }

    #[test]
    fn graph_state_matches_direct_construction() {
        unsafe {
            let edges: Vec<u32> = vec![0, 1, 1, 2];
            let mut handle: *mut QnnentState = ptr::null_mut();
            assert_eq!(
                qnnent_graph_state(3, edges.as_ptr(), 2, &mut handle),
                QnnentStatus::Ok
            );
            let direct = graph_state(&[(0, 1), (1, 2)], 3)
                .unwrap()
                .evaluate(22)
                .unwrap()
                .normalize()
                .unwrap();
            for idx in 0..8u64 {
                let (mut re, mut im) = (0.0, 0.0);
                assert_eq!(
                    qnnent_state_amplitude(handle, idx, &mut re, &mut im),
                    QnnentStatus::Ok
                );
                let expected = direct.amplitude(idx);
                assert!((re - expected.re).abs() < 1e-12 && (im - expected.im).abs() < 1e-12);
            }
            qnnent_state_free(handle);
        }
    }

    #[test]
    fn unnormalized_states_can_be_normalized_in_place() {
        unsafe {
            let dir = tempfile::tempdir().unwrap();
            let path_buf = dir.path().join("raw.qns");
            // Save an unnormalized state through the library...
            let raw =
                qnnent::state::DenseState::new(2, vec![num_complex::Complex64::new(2.0, 0.0); 4])
                    .unwrap();
            qnnent::qns::write(&raw, &path_buf).unwrap();

            // ...load it over the C ABI: entropy must refuse, then work
            // after an in-place normalize.
            let path = cstr(path_buf.to_str().unwrap());
            let mut handle: *mut QnnentState = ptr::null_mut();
            assert_eq!(
                qnnent_state_read(path.as_ptr(), &mut handle),
                QnnentStatus::Ok
            );
            let region = [0u32];
            let mut entropy = -1.0;
            assert_eq!(
                qnnent_renyi_entropy(handle, region.as_ptr(), 1, 2.0, &mut entropy),
                QnnentStatus::Precondition
            );
            assert_eq!(qnnent_state_normalize(handle), QnnentStatus::Ok);
            assert_eq!(
                qnnent_renyi_entropy(handle, region.as_ptr(), 1, 2.0, &mut entropy),
                QnnentStatus::Ok
            );
            assert!(entropy.abs() < 1e-12);
            qnnent_state_free(handle);
        }
    }

    #[test]
    fn errors_set_status_and_message() {
        unsafe {
            let mut handle: *mut QnnentState = ptr::null_mut();
            assert_eq!(
                qnnent_cluster_state(2, &mut handle),
                QnnentStatus::InvalidArgument
            );
            let msg = CStr::from_ptr(qnnent_last_error_message());
            assert!(msg.to_str().unwrap().contains("n >= 3"));

            assert_eq!(
                qnnent_toric_ground_state(4, 0, 0, &mut handle),
                QnnentStatus::Resource
            );

            let missing = cstr("/nonexistent/path.qns");
            assert_eq!(
                qnnent_state_read(missing.as_ptr(), &mut handle),
                QnnentStatus::Io
            );

            assert_eq!(
                qnnent_cluster_state(8, ptr::null_mut()),
                QnnentStatus::NullPointer
            );

            // Bad alpha on a valid handle.
            assert_eq!(qnnent_cluster_state(4, &mut handle), QnnentStatus::Ok);
            let region = [0u32];
            let mut entropy = 0.0;
            assert_eq!(
                qnnent_renyi_entropy(handle, region.as_ptr(), 1, -1.0, &mut entropy),
                QnnentStatus::InvalidArgument
            );
            qnnent_state_free(handle);
        }
    }
}
