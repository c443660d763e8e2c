//! C ABI for the cbsim simulator.
//!
//! Conventions: opaque handles created by `_new`/`_place` constructors and
//! released by the matching `_free`; every fallible call returns a
//! [`CbStatus`] and writes results through out-pointers. Passing a handle
//! to the wrong free, or using one after free, is undefined behavior, as
//! in any C API. All functions catch Rust panics and report
//! `CB_STATUS_INTERNAL` instead of unwinding across the boundary.
//!
//! The matching header lives at `include/cbsim.h`.

use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cbsim::analysis;
use cbsim::beamform::{
    build_gain_context, default_quadrature_order, gain_statistics, GainContext, NodeSubset,
};
use cbsim::decode::{linearization_error, DecodeScheme};
use cbsim::experiments::{run_ber_experiment, ExperimentConfig, GainModelKind};
use cbsim::geometry::{place_nodes, NetworkLayout};
use cbsim::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbStatus {
    CbStatusOk = 0,
    CbStatusNullPointer = 1,
    CbStatusInvalidParameter = 2,
    CbStatusRuntime = 3,
    CbStatusInternal = 4,
}

use CbStatus::*;

fn status_of(err: &Error) -> CbStatus {
    if err.is_config_error() {
        CbStatusInvalidParameter
    } else {
        CbStatusRuntime
    }
}

fn guarded(f: impl FnOnce() -> CbStatus) -> CbStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(CbStatusInternal)
}

/// Opaque node-placement handle.
pub struct CbLayout {
    inner: NetworkLayout,
}

/// Opaque gain-evaluation handle (phase table + quadrature rule).
pub struct CbGainContext {
    inner: GainContext,
}

/// One simulated BER point; NaN marks models that were not run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CbBerPoint {
    pub gamma_db: f64,
    pub actual_ber: f64,
    pub actual_ci: f64,
    pub actual_errors: u64,
    pub artificial_ber: f64,
    pub artificial_ci: f64,
    pub artificial_errors: u64,
    pub analytic_ber: f64,
    pub total_bits: u64,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn cb_status_message(status: CbStatus) -> *const c_char {
    let msg: &'static str = match status {
        CbStatusOk => "ok\0",
        CbStatusNullPointer => "null pointer argument\0",
        CbStatusInvalidParameter => "invalid parameter\0",
        CbStatusRuntime => "runtime failure\0",
        CbStatusInternal => "internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Places `l` nodes uniformly on a disk of radius `r_max` (deterministic
/// per seed) and returns a new layout handle through `out`.
///
/// # Safety
/// `out` must be a valid pointer. The returned handle must be released
/// with [`cb_layout_free`].
#[no_mangle]
pub unsafe extern "C" fn cb_layout_place(
    l: u64,
    r_max: f64,
    seed: u64,
    out: *mut *mut CbLayout,
) -> CbStatus {
    if out.is_null() {
        return CbStatusNullPointer;
    }
    guarded(|| match place_nodes(l as usize, r_max, seed) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CbLayout { inner }));
            CbStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// Overrides the receiver elevation angle (radians) and distance (meters).
///
/// # Safety
/// `layout` must be a live handle from [`cb_layout_place`].
#[no_mangle]
pub unsafe extern "C" fn cb_layout_set_geometry(
    layout: *mut CbLayout,
    theta0: f64,
    d: f64,
) -> CbStatus {
    if layout.is_null() {
        return CbStatusNullPointer;
    }
    guarded(|| {
        let handle = &mut *layout;
        handle.inner = handle.inner.clone().with_theta0(theta0).with_distance(d);
        CbStatusOk
    })
}

/// Number of nodes; 0 for a null handle.
///
/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_layout_len(layout: *const CbLayout) -> u64 {
    if layout.is_null() {
        return 0;
    }
    (*layout).inner.len() as u64
}

/// Reads one node's polar coordinates.
///
/// # Safety
/// All pointers must be valid; `layout` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cb_layout_node(
    layout: *const CbLayout,
    idx: u64,
    r_out: *mut f64,
    phi_out: *mut f64,
) -> CbStatus {
    if layout.is_null() || r_out.is_null() || phi_out.is_null() {
        return CbStatusNullPointer;
    }
    let layout = &(*layout).inner;
    match layout.nodes().get(idx as usize) {
        Some(node) => {
            *r_out = node.r;
            *phi_out = node.phi;
            CbStatusOk
        }
        None => CbStatusInvalidParameter,
    }
}

/// Releases a layout handle; null is a no-op.
///
/// # Safety
/// `layout` must be null or an unreleased handle from [`cb_layout_place`].
#[no_mangle]
pub unsafe extern "C" fn cb_layout_free(layout: *mut CbLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

/// Builds the quadrature phase table for a layout at the given wavelength.
/// `quadrature_order` of 0 selects the bandwidth-scaled default.
///
/// # Safety
/// `layout` must be a live handle and `out` a valid pointer. The returned
/// handle must be released with [`cb_gain_context_free`].
#[no_mangle]
pub unsafe extern "C" fn cb_gain_context_new(
    layout: *const CbLayout,
    wavelength: f64,
    quadrature_order: u64,
    out: *mut *mut CbGainContext,
) -> CbStatus {
    if layout.is_null() || out.is_null() {
        return CbStatusNullPointer;
    }
    guarded(|| {
        let layout = &(*layout).inner;
        let order = if quadrature_order == 0 {
            if !wavelength.is_finite() || wavelength <= 0.0 {
                return CbStatusInvalidParameter;
            }
            default_quadrature_order(layout, wavelength)
        } else {
            quadrature_order as usize
        };
        match build_gain_context(layout, wavelength, order) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CbGainContext { inner }));
                CbStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a gain-context handle; null is a no-op.
///
/// # Safety
/// `ctx` must be null or an unreleased handle from [`cb_gain_context_new`].
#[no_mangle]
pub unsafe extern "C" fn cb_gain_context_free(ctx: *mut CbGainContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

unsafe fn subset_from_raw(
    ctx: &GainContext,
    indices: *const u64,
    n: u64,
) -> Result<NodeSubset, CbStatus> {
    if n > 0 && indices.is_null() {
        return Err(CbStatusNullPointer);
    }
    let slice = if n == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(indices, n as usize)
    };
    let idx: Vec<usize> = slice.iter().map(|&i| i as usize).collect();
    NodeSubset::from_indices(&idx, ctx.n_nodes()).map_err(|e| status_of(&e))
}

macro_rules! subset_eval {
    ($name:ident, $method:ident, $doc:literal) => {
        #[doc = $doc]
        ///
        /// # Safety
        /// `ctx` must be a live handle; `indices` must point to `n`
        /// readable elements; `out` must be valid.
        #[no_mangle]
        pub unsafe extern "C" fn $name(
            ctx: *const CbGainContext,
            indices: *const u64,
            n: u64,
            out: *mut f64,
        ) -> CbStatus {
            if ctx.is_null() || out.is_null() {
                return CbStatusNullPointer;
            }
            guarded(|| {
                let ctx = &(*ctx).inner;
                let subset = match subset_from_raw(ctx, indices, n) {
                    Ok(s) => s,
                    Err(status) => return status,
                };
                match ctx.$method(&subset) {
                    Ok(v) => {
                        *out = v;
                        CbStatusOk
                    }
                    Err(e) => status_of(&e),
                }
            })
        }
    };
}

subset_eval!(
    cb_directivity,
    directivity,
    "Directivity of the node subset (errors on an empty subset)."
);
subset_eval!(
    cb_gain,
    gain,
    "Beamforming power gain of the node subset (efficiency 1)."
);
subset_eval!(
    cb_amplification,
    amplification,
    "Coherent amplitude multiplier sqrt(gain) * |S|; 0 for an empty subset."
);

/// Min/mean/max gain over `n_samples` random subsets of the given size.
///
/// # Safety
/// `ctx` must be a live handle; the three out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cb_gain_statistics(
    ctx: *const CbGainContext,
    subset_size: u64,
    n_samples: u64,
    seed: u64,
    min_out: *mut f64,
    mean_out: *mut f64,
    max_out: *mut f64,
) -> CbStatus {
    if ctx.is_null() || min_out.is_null() || mean_out.is_null() || max_out.is_null() {
        return CbStatusNullPointer;
    }
    guarded(|| {
        match gain_statistics(
            &(*ctx).inner,
            subset_size as usize,
            n_samples as usize,
            seed,
        ) {
            Ok(stats) => {
                *min_out = stats.min;
                *mean_out = stats.mean;
                *max_out = stats.max;
                CbStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Gaussian upper-tail probability Q(x).
#[no_mangle]
pub extern "C" fn cb_q_function(x: f64) -> f64 {
    analysis::q_function(x)
}

/// Approximate per-bit SNR `9 L gamma_hat / 16`.
#[no_mangle]
pub extern "C" fn cb_snr_tilde(l: u64, gamma_hat: f64) -> f64 {
    analysis::snr_tilde(l as usize, gamma_hat)
}

/// Closed-form BER approximation `Q(3 sqrt(L gamma_hat) / 4)`.
#[no_mangle]
pub extern "C" fn cb_ber_tilde(l: u64, gamma_hat: f64) -> f64 {
    analysis::ber_tilde(l as usize, gamma_hat)
}

/// Maximum relative linearization error over all splits `a + b = l` and
/// the split attaining it.
///
/// # Safety
/// The out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cb_linearization_error(
    l: u64,
    max_out: *mut f64,
    a_out: *mut u64,
    b_out: *mut u64,
) -> CbStatus {
    if max_out.is_null() || a_out.is_null() || b_out.is_null() {
        return CbStatusNullPointer;
    }
    guarded(|| match linearization_error(l as usize) {
        Ok((max_err, (a, b))) => {
            *max_out = max_err;
            *a_out = a;
            *b_out = b;
            CbStatusOk
        }
        Err(e) => status_of(&e),
    })
}

pub const CB_MODEL_EXACT: c_int = 1;
pub const CB_MODEL_IDEALIZED: c_int = 2;

pub const CB_DECODER_BIT_LEVEL: c_int = 0;
pub const CB_DECODER_CHIP_LEVEL: c_int = 1;
pub const CB_DECODER_POWER_2_3: c_int = 2;

/// Simulates one normalized-SNR point of the BER sweep with the paper's
/// radio constants. `models_mask` ORs `CB_MODEL_*` flags;
/// `quadrature_order` of 0 selects the desk-scale default; `noiseless`
/// nonzero disables AWGN. Models not requested come back as NaN.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cb_ber_sweep_point(
    l: u64,
    bits_per_node: u64,
    gamma_db: f64,
    quadrature_order: u64,
    layout_seed: u64,
    data_seed: u64,
    noise_seed: u64,
    models_mask: c_int,
    decoder: c_int,
    noiseless: c_int,
    out: *mut CbBerPoint,
) -> CbStatus {
    if out.is_null() {
        return CbStatusNullPointer;
    }
    guarded(|| {
        let mut models = Vec::new();
        if models_mask & CB_MODEL_EXACT != 0 {
            models.push(GainModelKind::Exact);
        }
        if models_mask & CB_MODEL_IDEALIZED != 0 {
            models.push(GainModelKind::Idealized);
        }
        let decoder = match decoder {
            CB_DECODER_BIT_LEVEL => DecodeScheme::BitLevel,
            CB_DECODER_CHIP_LEVEL => DecodeScheme::ChipLevel,
            CB_DECODER_POWER_2_3 => DecodeScheme::PowerTwoThirds,
            _ => return CbStatusInvalidParameter,
        };
        let cfg = ExperimentConfig {
            l: l as usize,
            bits_per_node: bits_per_node as usize,
            gamma_db_grid: vec![gamma_db],
            layout_seed,
            data_seed,
            noise_seed,
            quadrature_order: if quadrature_order == 0 {
                None
            } else {
                Some(quadrature_order as usize)
            },
            models,
            decoder,
            noiseless: noiseless != 0,
            ..ExperimentConfig::default()
        };
        match run_ber_experiment(&cfg) {
            Ok(curve) => {
                let p = &curve.points[0];
                let unpack = |m: &Option<cbsim::experiments::ModelBer>| match m {
                    Some(m) => (m.ber, m.ci_half_width, m.errors),
                    None => (f64::NAN, f64::NAN, 0),
                };
                let (actual_ber, actual_ci, actual_errors) = unpack(&p.actual);
                let (artificial_ber, artificial_ci, artificial_errors) = unpack(&p.artificial);
                *out = CbBerPoint {
                    gamma_db: p.gamma_db,
                    actual_ber,
                    actual_ci,
                    actual_errors,
                    artificial_ber,
                    artificial_ci,
                    artificial_errors,
                    analytic_ber: p.analytic_ber,
                    total_bits: p.total_bits,
                };
                CbStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}
