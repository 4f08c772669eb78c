//! C ABI for the vortex-stretching laboratory.
//!
//! Everything crosses the boundary through three shapes: opaque handles
//! ([`IvseField`]) created and released here, status codes ([`IvseStatus`])
//! mirroring the library's error taxonomy, and NUL-terminated UTF-8 strings
//! owned by the library and reclaimed with [`ivse_string_free`]. The header
//! `include/ivse.h` is generated from these signatures at build time.
//!
//! Failure reporting: every fallible call returns a status; on anything but
//! `Ok` a human-readable message is stored per thread and can be read back
//! with [`ivse_last_error_message`] until the next failing call on the same
//! thread. All entry points catch panics and convert them to
//! [`IvseStatus::Panic`] rather than unwinding across the boundary.

use ivse::config::parse_config;
use ivse::error::Error;
use ivse::field::{functional_q, support_region, AxiGrid, AxiScalarField, RingPair};
use ivse::kappa::{default_schedule, estimate_kappa};
use ivse::quadrature::PhiQuadRule;
use ivse::runner::run_mode_report;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call in this interface.
///
/// `Ok` is zero; everything else indicates failure and leaves a message for
/// [`ivse_last_error_message`]. The variants follow the library's error
/// taxonomy: `Config` and `Geometry` mean the request was wrong, the rest mean
/// the computation could not be carried out.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IvseStatus {
    Ok = 0,
    /// Invalid configuration value or combination.
    Config = 1,
    /// Geometry not representable on the requested grid.
    Geometry = 2,
    /// Kernel evaluated at a singular configuration.
    SingularEvaluation = 3,
    /// A mathematically required property failed to hold.
    Numerical = 4,
    /// Input outside the domain of the operation.
    Domain = 5,
    /// No cells above the support threshold.
    EmptySupport = 6,
    /// Malformed snapshot or report structure.
    Format = 7,
    /// Operating-system I/O failure.
    Io = 8,
    /// JSON (de)serialization failure.
    Json = 9,
    /// A required pointer argument was null.
    NullPointer = 10,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 11,
    /// The library panicked; state on this handle should not be trusted.
    Panic = 12,
}

/// Opaque handle to a meridian vorticity field sampled on its grid.
pub struct IvseField {
    inner: AxiScalarField,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> IvseStatus {
    match e {
        Error::Config(_) => IvseStatus::Config,
        Error::Geometry(_) => IvseStatus::Geometry,
        Error::SingularEvaluation(_) => IvseStatus::SingularEvaluation,
        Error::Numerical(_) => IvseStatus::Numerical,
        Error::Domain(_) => IvseStatus::Domain,
        Error::EmptySupport(_) => IvseStatus::EmptySupport,
        Error::Format(_) => IvseStatus::Format,
        Error::Io(_) => IvseStatus::Io,
        Error::Json(_) => IvseStatus::Json,
    }
}

/// Run `body`, translating library errors and panics into statuses.
fn guarded(body: impl FnOnce() -> Result<(), Error>) -> IvseStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => IvseStatus::Ok,
        Ok(Err(e)) => {
            remember(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            remember(&format!("panic: {msg}"));
            IvseStatus::Panic
        }
    }
}

fn null_arg(what: &str) -> IvseStatus {
    remember(&format!("{what} must not be null"));
    IvseStatus::NullPointer
}

/// Library version as a static NUL-terminated string. Never freed.
#[no_mangle]
pub extern "C" fn ivse_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message from the most recent failing call on this thread, empty if none.
///
/// The pointer stays valid until the next failing call on the same thread;
/// copy the string out before calling anything else. Never free it.
#[no_mangle]
pub extern "C" fn ivse_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Sample the two-ring datum with centers `(r_c, ±z_c)`, semi-axes
/// `(rho_r, rho_z)` and the given (negative) amplitude on an `n_r × n_z`
/// cell-centered grid over `[r_min, r_max] × [z_min, z_max]`, and return an
/// owning handle through `out`.
///
/// On failure `*out` is untouched. Release with [`ivse_field_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ivse_field_new(
    r_c: f64,
    z_c: f64,
    rho_r: f64,
    rho_z: f64,
    amplitude: f64,
    r_min: f64,
    r_max: f64,
    z_min: f64,
    z_max: f64,
    n_r: usize,
    n_z: usize,
    out: *mut *mut IvseField,
) -> IvseStatus {
    if out.is_null() {
        return null_arg("out");
    }
    guarded(|| {
        let ring = RingPair::new(r_c, z_c, rho_r, rho_z, amplitude)?;
        let grid = AxiGrid::new(r_min, r_max, z_min, z_max, n_r, n_z)?;
        let field = ring.sample(grid)?;
        unsafe { out.write(Box::into_raw(Box::new(IvseField { inner: field }))) };
        Ok(())
    })
}

/// Release a handle from [`ivse_field_new`]. Null is a no-op.
///
/// # Safety
/// `field` must be null or a pointer previously returned by
/// [`ivse_field_new`] that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn ivse_field_free(field: *mut IvseField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Growth functional `Q = −∫ r ω dr dz` of the field.
///
/// # Safety
/// `field` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ivse_field_q(field: *const IvseField, out: *mut f64) -> IvseStatus {
    if field.is_null() {
        return null_arg("field");
    }
    if out.is_null() {
        return null_arg("out");
    }
    guarded(|| {
        unsafe { out.write(functional_q(&(*field).inner)) };
        Ok(())
    })
}

/// Sup norm `‖ω‖_∞` over the grid.
///
/// # Safety
/// `field` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ivse_field_sup_norm(
    field: *const IvseField,
    out: *mut f64,
) -> IvseStatus {
    if field.is_null() {
        return null_arg("field");
    }
    if out.is_null() {
        return null_arg("out");
    }
    guarded(|| {
        unsafe { out.write((*field).inner.sup_norm()) };
        Ok(())
    })
}

/// Interaction-kernel lower constant κ of the field's support, minimized over
/// pairs by the refining search at the default level schedule.
///
/// `rule_order` is the azimuthal quadrature order (32 reproduces the CLI
/// default). Cells with `|ω| ≤ 1e-12` are treated as empty.
///
/// # Safety
/// `field` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ivse_field_kappa(
    field: *const IvseField,
    rule_order: usize,
    out: *mut f64,
) -> IvseStatus {
    if field.is_null() {
        return null_arg("field");
    }
    if out.is_null() {
        return null_arg("out");
    }
    guarded(|| {
        let rule = PhiQuadRule::new(rule_order)?;
        let region = support_region(&(*field).inner, 1e-12)?;
        let estimate = estimate_kappa(&region, &rule, &default_schedule())?;
        unsafe { out.write(estimate.value) };
        Ok(())
    })
}

/// Induced meridian velocity `(u_r, u_z)` at the probe `(r, z)` by direct
/// kernel summation over the field's support.
///
/// `delta` is the kernel regularization; zero is exact but fails with
/// [`IvseStatus::SingularEvaluation`] if the probe coincides with a source
/// cell center. Probes below the symmetry plane (`z < 0`) are valid.
///
/// # Safety
/// `field` must be a live handle; `out_u_r` and `out_u_z` must point to
/// writable storage.
#[no_mangle]
pub unsafe extern "C" fn ivse_field_velocity(
    field: *const IvseField,
    rule_order: usize,
    delta: f64,
    r: f64,
    z: f64,
    out_u_r: *mut f64,
    out_u_z: *mut f64,
) -> IvseStatus {
    if field.is_null() {
        return null_arg("field");
    }
    if out_u_r.is_null() {
        return null_arg("out_u_r");
    }
    if out_u_z.is_null() {
        return null_arg("out_u_z");
    }
    guarded(|| {
        let rule = PhiQuadRule::new(rule_order)?;
        let vel = ivse::biot_savart::velocity_at_probes(&(*field).inner, &rule, delta, &[(r, z)])?;
        unsafe {
            out_u_r.write(vel[0].0);
            out_u_z.write(vel[0].1);
        }
        Ok(())
    })
}

/// Run one mode from a flat JSON configuration and return the report as a
/// newly allocated JSON string through `out_report_json`.
///
/// The configuration uses exactly the CLI's keys and must include `"mode"`
/// (`"simulate"`, `"euler"`, `"compare"`, `"kappa"`, `"oracle"`, or
/// `"verify"`); unset keys take the mode's defaults. The returned document is
/// `{"tool_version", "mode", "report"}` where `report` matches the
/// corresponding CLI report file. Nothing is written to disk. Free the string
/// with [`ivse_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_report_json` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ivse_run_json(
    config_json: *const c_char,
    out_report_json: *mut *mut c_char,
) -> IvseStatus {
    if config_json.is_null() {
        return null_arg("config_json");
    }
    if out_report_json.is_null() {
        return null_arg("out_report_json");
    }
    let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            remember("config_json is not valid UTF-8");
            return IvseStatus::InvalidUtf8;
        }
    };
    guarded(|| {
        let cfg = parse_config(text, &[])?;
        let report = run_mode_report(&cfg)?;
        let document = serde_json::json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "mode": cfg.mode.as_str(),
            "report": report,
        });
        let rendered = serde_json::to_string_pretty(&document)?;
        let owned = CString::new(rendered.replace('\0', " ")).unwrap_or_default();
        unsafe { out_report_json.write(owned.into_raw()) };
        Ok(())
    })
}

/// Release a string returned by this interface. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by [`ivse_run_json`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn ivse_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_keep_their_contract_values() {
        assert_eq!(IvseStatus::Ok as i32, 0);
        assert_eq!(IvseStatus::Config as i32, 1);
        assert_eq!(IvseStatus::Panic as i32, 12);
    }

    #[test]
    fn error_messages_survive_interior_nuls() {
        remember("a\0b");
        let text = LAST_ERROR.with(|slot| slot.borrow().to_str().unwrap().to_string());
        assert_eq!(text, "a b");
    }
}
