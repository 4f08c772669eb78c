//! Exercise the C entry points exactly as a foreign caller would: through raw
//! pointers and status codes, never through the library's Rust API.

use ivse_ffi::{
    ivse_field_free, ivse_field_kappa, ivse_field_new, ivse_field_q, ivse_field_sup_norm,
    ivse_field_velocity, ivse_last_error_message, ivse_run_json, ivse_string_free, ivse_version,
    IvseField, IvseStatus,
};
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ivse_last_error_message()) }
        .to_str()
        .unwrap()
        .to_string()
}

fn new_canonical_field() -> *mut IvseField {
    let mut field: *mut IvseField = ptr::null_mut();
    let status = unsafe {
        ivse_field_new(
            2.0, 1.0, 0.35, 0.35, -1.0, // ring
            1.0, 3.0, 0.25, 2.0, 64, 64, // grid
            &mut field,
        )
    };
    assert_eq!(status, IvseStatus::Ok, "{}", last_error());
    assert!(!field.is_null());
    field
}

#[test]
fn version_is_a_nonempty_dotted_string() {
    let v = unsafe { CStr::from_ptr(ivse_version()) }.to_str().unwrap();
    assert!(v.contains('.'), "unexpected version {v:?}");
}

#[test]
fn field_handle_supports_the_scalar_queries() {
    let field = new_canonical_field();

    let mut q = 0.0;
    assert_eq!(unsafe { ivse_field_q(field, &mut q) }, IvseStatus::Ok);
    assert!(q > 0.0, "negative-amplitude datum must have positive Q, got {q}");

    let mut sup = 0.0;
    assert_eq!(unsafe { ivse_field_sup_norm(field, &mut sup) }, IvseStatus::Ok);
    // Cell centers straddle the profile peak |amplitude| e^{-1}.
    assert!(sup > 0.3 && sup <= (-1.0f64).exp(), "sup norm {sup}");

    let mut kappa = 0.0;
    assert_eq!(unsafe { ivse_field_kappa(field, 8, &mut kappa) }, IvseStatus::Ok);
    assert!(kappa > 0.0 && kappa < 1.0, "kappa {kappa}");

    // Off-lattice probe above and below the symmetry plane: u_r is even.
    let (mut ur_up, mut uz_up, mut ur_dn, mut uz_dn) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { ivse_field_velocity(field, 8, 0.0, 2.13, 0.91, &mut ur_up, &mut uz_up) },
        IvseStatus::Ok
    );
    assert_eq!(
        unsafe { ivse_field_velocity(field, 8, 0.0, 2.13, -0.91, &mut ur_dn, &mut uz_dn) },
        IvseStatus::Ok
    );
    assert!(ur_up.is_finite() && uz_up.is_finite());
    assert_eq!(ur_up, ur_dn);
    assert_eq!(uz_up, -uz_dn);

    unsafe { ivse_field_free(field) };
}

#[test]
fn invalid_requests_return_statuses_and_messages() {
    let mut field: *mut IvseField = ptr::null_mut();
    let status = unsafe {
        ivse_field_new(
            2.0, 1.0, -0.5, 0.35, -1.0, // nonpositive radial semi-axis
            1.0, 3.0, 0.25, 2.0, 64, 64, &mut field,
        )
    };
    assert_eq!(status, IvseStatus::Config, "{}", last_error());
    assert!(field.is_null(), "failed construction must not hand out a handle");
    assert!(last_error().contains("rho_r"), "message was {:?}", last_error());

    let mut q = 0.0;
    assert_eq!(
        unsafe { ivse_field_q(ptr::null(), &mut q) },
        IvseStatus::NullPointer
    );
    assert!(last_error().contains("null"));

    let good = new_canonical_field();
    assert_eq!(
        unsafe { ivse_field_q(good, ptr::null_mut()) },
        IvseStatus::NullPointer
    );
    // A probe sitting exactly on a source cell center with zero
    // regularization is a singular evaluation.
    let (mut ur, mut uz) = (0.0, 0.0);
    let r_center = 1.0 + 35.5 * (2.0 / 64.0);
    let z_center = 0.25 + 27.5 * (1.75 / 64.0);
    assert_eq!(
        unsafe { ivse_field_velocity(good, 8, 0.0, r_center, z_center, &mut ur, &mut uz) },
        IvseStatus::SingularEvaluation
    );
    unsafe { ivse_field_free(good) };
    unsafe { ivse_field_free(ptr::null_mut()) };
}

#[test]
fn run_json_round_trips_a_verify_report() {
    let config = CString::new(
        r#"{"mode": "verify", "n_r": 24, "n_z": 24, "rule_order": 8, "kappa_levels": [6, 12]}"#,
    )
    .unwrap();
    let mut report: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { ivse_run_json(config.as_ptr(), &mut report) };
    assert_eq!(status, IvseStatus::Ok, "{}", last_error());

    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap();
    let doc: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(doc["mode"], "verify");
    assert!(doc["report"]["riccati_margin"].as_f64().unwrap() > 1.0);
    assert!(doc["report"]["rel_lhs_vs_rhs"].as_f64().unwrap() <= 1e-10);
    unsafe { ivse_string_free(report) };
}

#[test]
fn run_json_rejects_bad_configurations() {
    let mut report: *mut std::ffi::c_char = ptr::null_mut();

    let garbage = CString::new("not a json document").unwrap();
    let status = unsafe { ivse_run_json(garbage.as_ptr(), &mut report) };
    assert_eq!(status, IvseStatus::Config);
    assert!(last_error().contains("JSON"), "message was {:?}", last_error());

    let missing_mode = CString::new("{}").unwrap();
    let status = unsafe { ivse_run_json(missing_mode.as_ptr(), &mut report) };
    assert_eq!(status, IvseStatus::Config);
    assert!(last_error().contains("mode"));

    assert_eq!(
        unsafe { ivse_run_json(ptr::null(), &mut report) },
        IvseStatus::NullPointer
    );
    assert!(report.is_null(), "no report may be produced on failure");
}
