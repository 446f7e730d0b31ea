use std::ffi::{CStr, CString};
use std::ptr;
use twogen_ffi::*;

fn last_error() -> String {
    let p = twogen_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn field_handle_round_trip() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(twogen_field_new(7, 7, &mut f), TwogenStatus::Ok);
        assert_eq!(twogen_field_degree(f), 3);
        let one = [1i64, 0, 0];
        let mut v = 0.0;
        for place in 0..3 {
            assert_eq!(twogen_field_embed(f, one.as_ptr(), 3, place, &mut v), TwogenStatus::Ok);
            assert_eq!(v, 1.0);
        }
        assert_eq!(twogen_field_embed(f, one.as_ptr(), 2, 0, &mut v), TwogenStatus::OutOfRange);
        assert_eq!(twogen_field_embed(f, one.as_ptr(), 3, 3, &mut v), TwogenStatus::OutOfRange);
        twogen_field_free(f);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(twogen_field_new(7, 7, ptr::null_mut()), TwogenStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(twogen_field_new(0, 7, &mut f), TwogenStatus::FieldError);
        assert!(f.is_null());

        let cfg = twogen_config_new();
        let key = CString::new("slack").unwrap();
        let bad = CString::new("-1").unwrap();
        assert_eq!(twogen_config_set(cfg, key.as_ptr(), bad.as_ptr()), TwogenStatus::InvalidArgument);
        let good = CString::new("1e-10").unwrap();
        assert_eq!(twogen_config_set(cfg, key.as_ptr(), good.as_ptr()), TwogenStatus::Ok);
        assert!(twogen_last_error().is_null());
        twogen_config_free(cfg);
    }
}

#[test]
fn triple_outcome_handle() {
    unsafe {
        let mut o = ptr::null_mut();
        assert_eq!(twogen_run_triple(ptr::null(), 6, 6, 2, &mut o), TwogenStatus::Ok);
        let stage = CString::new("c0").unwrap();
        let mut n = 0usize;
        assert_eq!(twogen_outcome_stage_count(o, stage.as_ptr(), &mut n), TwogenStatus::Ok);
        assert!(n > 0);
        let survivors = twogen_outcome_survivor_count(o);
        assert!(survivors > 0);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(twogen_outcome_survivor_gamma(o, 0, &mut re, &mut im), TwogenStatus::Ok);
        assert!(im > 0.0);
        assert_eq!(twogen_outcome_survivor_gamma(o, survivors, &mut re, &mut im), TwogenStatus::OutOfRange);

        let json = twogen_outcome_to_json(o);
        let doc: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(doc["survivors"].as_array().unwrap().len(), survivors);
        twogen_string_free(json);
        twogen_outcome_free(o);
    }
}

#[test]
fn free_test_verdicts() {
    let (mut verdict, mut level) = (TwogenVerdict::Inconclusive, 0u8);
    unsafe {
        assert_eq!(twogen_free_test(10, 10, -4.918226, 5.698268, 3, &mut verdict, &mut level), TwogenStatus::Ok);
        assert_eq!(verdict, TwogenVerdict::ProvedFree);
        assert!(level >= 1);
        assert_eq!(twogen_free_test(10, 10, f64::NAN, 0.0, 3, &mut verdict, &mut level), TwogenStatus::InvalidArgument);
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/twogen.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["twogen_run_triple", "twogen_last_error", "TWOGEN_STATUS_PANIC"] {
        assert!(text.contains(name), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, "#include \"twogen.h\"\nint main(void) { return twogen_last_error() != 0; }\n").unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-I", include]).arg(&src).status() {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("no C compiler; header syntax not checked"),
    }
}
