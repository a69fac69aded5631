use ssmlab_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ssm_last_error()) }.to_str().unwrap().to_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { ssm_string_free(p) };
    s
}

const RATIONAL: &str = r#"{"class": "rational", "arity": 2, "terms": [
    {"pole": [0.5, 1.0], "powers": [1, 2], "coeff": [1.0, 0.0]},
    {"pole": [-0.3, -0.8], "powers": [2, 1], "coeff": [0.0, 0.5]}]}"#;

#[test]
fn self_adjoint_round_trip() {
    unsafe {
        let mut inst = ptr::null_mut();
        let spec = cstr(r#"{"seed": 7, "dim": 8, "arity": 2, "family": "shared_basis"}"#);
        assert_eq!(ssm_instance_generate(spec.as_ptr(), &mut inst), SsmStatus::Ok);
        assert_eq!((ssm_instance_dim(inst), ssm_instance_arity(inst)), (8, 2));
        assert!(ssm_instance_is_self_adjoint(inst));

        let mut f = ptr::null_mut();
        assert_eq!(ssm_function_from_json(cstr(RATIONAL).as_ptr(), &mut f), SsmStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(ssm_function_eval(f, [0.1, 0.2].as_ptr(), 2, &mut re, &mut im), SsmStatus::Ok);
        assert!(re.is_finite() && im.is_finite());
        assert_eq!(ssm_function_eval(f, [0.1].as_ptr(), 1, &mut re, &mut im), SsmStatus::InvalidInput);

        for verify in [ssm_verify_krein, ssm_verify_koplienko] {
            let mut r = ptr::null_mut();
            assert_eq!(verify(inst, f, 16, 1e-8, &mut r), SsmStatus::Ok, "{}", last_error());
            let mut s = SsmReportSummary::default();
            assert_eq!(ssm_report_summary(r, &mut s), SsmStatus::Ok);
            assert!(s.passed && s.rel_residual <= 1e-8 && s.failed_bound_checks == 0, "{s:?}");
            let mut json = ptr::null_mut();
            assert_eq!(ssm_report_to_json(r, &mut json), SsmStatus::Ok);
            assert!(take_string(json).contains("\"rel_residual\""));
            ssm_report_free(r);
        }

        let mut csv = ptr::null_mut();
        assert_eq!(ssm_krein_measure_csv(inst, 16, 1, &mut csv), SsmStatus::Ok);
        let csv = take_string(csv);
        assert!(csv.starts_with("lambda_1,lambda_2,re_weight,im_weight\n") && csv.lines().count() > 1);
        assert_eq!(ssm_krein_measure_csv(inst, 16, 2, &mut ptr::null_mut()), SsmStatus::InvalidInput);

        ssm_function_free(f);
        ssm_instance_free(inst);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(ssm_instance_generate(cstr("{not json").as_ptr(), &mut inst), SsmStatus::Parse);
        assert!(inst.is_null() && !last_error().is_empty());

        let pauli = r#"{"base": [
            {"dim": 2, "re": [[0.0, 1.0], [1.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]},
            {"dim": 2, "re": [[1.0, 0.0], [0.0, -1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}],
          "direction": [
            {"dim": 2, "re": [[0.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]},
            {"dim": 2, "re": [[0.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}]}"#;
        assert_eq!(ssm_instance_from_json(cstr(pauli).as_ptr(), &mut inst), SsmStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(ssm_function_from_json(cstr(RATIONAL).as_ptr(), &mut f), SsmStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(ssm_verify_krein(inst, f, 16, 1e-8, &mut r), SsmStatus::Precondition);
        assert!(r.is_null() && last_error().contains("not commuting"), "{}", last_error());
        ssm_function_free(f);
        ssm_instance_free(inst);

        assert_eq!(ssm_verify_krein(ptr::null(), ptr::null(), 16, 1e-8, &mut r), SsmStatus::NullPointer);
        assert_eq!(ssm_instance_dim(ptr::null()), 0);
        ssm_instance_free(ptr::null_mut());
        ssm_string_free(ptr::null_mut());

        let bad = cstr(r#"{"class": "rational", "arity": 1, "terms": [{"pole": [1.0, 0.0], "powers": [1], "coeff": [1.0, 0.0]}]}"#);
        let mut f = ptr::null_mut();
        assert_ne!(ssm_function_from_json(bad.as_ptr(), &mut f), SsmStatus::Ok);
        assert!(f.is_null());
    }
}

#[test]
fn dissipative_instances_use_lower_rationals() {
    unsafe {
        let mut inst = ptr::null_mut();
        let spec = cstr(r#"{"seed": 3, "dim": 8, "arity": 2, "family": "hardy_dissipative", "scale": 0.1, "scalar_direction": true}"#);
        assert_eq!(ssm_instance_generate(spec.as_ptr(), &mut inst), SsmStatus::Ok, "{}", last_error());
        assert!(!ssm_instance_is_self_adjoint(inst));

        let mut upper = ptr::null_mut();
        assert_eq!(ssm_function_from_json(cstr(RATIONAL).as_ptr(), &mut upper), SsmStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(ssm_verify_krein(inst, upper, 16, 1e-8, &mut r), SsmStatus::Unsupported);

        let lower = cstr(r#"{"class": "rational", "arity": 2, "terms": [
            {"pole": [0.2, -1.0], "powers": [1, 1], "coeff": [1.0, 0.0]}]}"#);
        let mut f = ptr::null_mut();
        assert_eq!(ssm_function_from_json(lower.as_ptr(), &mut f), SsmStatus::Ok);
        assert_eq!(ssm_verify_krein(inst, f, 16, 1e-8, &mut r), SsmStatus::Ok, "{}", last_error());
        let mut s = SsmReportSummary::default();
        ssm_report_summary(r, &mut s);
        assert!(s.passed, "{s:?}");
        ssm_report_free(r);
        ssm_function_free(f);
        ssm_function_free(upper);
        ssm_instance_free(inst);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ssmlab.h")).unwrap();
    for name in [
        "ssm_last_error", "ssm_version", "ssm_string_free", "ssm_instance_generate", "ssm_instance_from_json",
        "ssm_instance_free", "ssm_instance_dim", "ssm_instance_arity", "ssm_instance_is_self_adjoint",
        "ssm_function_from_json", "ssm_function_free", "ssm_function_eval", "ssm_verify_krein",
        "ssm_verify_koplienko", "ssm_krein_measure_csv", "ssm_report_free", "ssm_report_summary",
        "ssm_report_to_json", "typedef struct SsmInstance SsmInstance", "SSM_STATUS_PRECONDITION = 5",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    assert_eq!(unsafe { CStr::from_ptr(ssm_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
