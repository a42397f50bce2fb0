use std::ffi::{c_char, CStr, CString};
use std::ptr;

use amenlab_ffi::*;

fn last_error() -> String {
    let p = amen_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    amen_string_free(s);
    out
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(amen_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn plane_handle() {
    unsafe {
        let mut plane = ptr::null_mut();
        assert_eq!(amen_plane_new(3, &mut plane), AmenStatus::Ok);
        assert!(amen_last_error_message().is_null());
        let mut n = 0usize;
        assert_eq!(amen_plane_len(plane, &mut n), AmenStatus::Ok);
        assert_eq!(n, 13);
        let mut xyz = [0u64; 3];
        let mut signs = 0;
        for i in 0..n {
            let mut s = false;
            assert_eq!(
                amen_plane_point(plane, i, xyz.as_mut_ptr(), &mut s),
                AmenStatus::Ok
            );
            assert!(xyz.iter().any(|&c| c != 0) && xyz.iter().all(|&c| c < 3));
            signs += s as usize;
        }
        assert_eq!(signs, 6);
        assert_eq!(
            amen_plane_point(plane, 13, xyz.as_mut_ptr(), ptr::null_mut()),
            AmenStatus::InvalidArgument
        );
        amen_plane_free(plane);
        amen_plane_free(ptr::null_mut());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut plane = ptr::null_mut();
        assert_eq!(amen_plane_new(4, &mut plane), AmenStatus::NotPrime);
        assert!(plane.is_null());
        assert!(last_error().contains("not a prime"));
        assert_eq!(amen_plane_new(2, ptr::null_mut()), AmenStatus::NullPointer);
        let mut n = 0usize;
        assert_eq!(amen_plane_len(ptr::null(), &mut n), AmenStatus::NullPointer);

        let bad = CString::new("{ nope").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(
            amen_tensor_from_json(bad.as_ptr(), &mut t),
            AmenStatus::Parse
        );

        let name = CString::new("spectral").unwrap();
        let req = CString::new(
            r#"{"graph": "cayley3", "config": {"caps": {"max_graph_vertices": 100}}}"#,
        )
        .unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(
            amen_run_experiment(name.as_ptr(), req.as_ptr(), &mut r),
            AmenStatus::TooLarge
        );

        let name = CString::new("nonsense").unwrap();
        assert_eq!(
            amen_run_experiment(name.as_ptr(), ptr::null(), &mut r),
            AmenStatus::InvalidArgument
        );
        assert!(last_error().contains("nonsense"));
    }
}

#[test]
fn matrix_norms_and_mazur() {
    unsafe {
        // diag(0.64, 0.36) rotated: trace norm 1, Mazur image diag(0.8, 0.6)
        let re = [0.0, 0.64, 0.36, 0.0];
        let mut m = ptr::null_mut();
        assert_eq!(
            amen_matrix_new(2, 2, re.as_ptr(), ptr::null(), &mut m),
            AmenStatus::Ok
        );
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(amen_matrix_shape(m, &mut rows, &mut cols), AmenStatus::Ok);
        assert_eq!((rows, cols), (2, 2));
        let mut v = 0.0;
        assert_eq!(amen_matrix_schatten(m, 1, &mut v), AmenStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(amen_matrix_opnorm(m, f64::INFINITY, &mut v), AmenStatus::Ok);
        assert!((v - 0.64).abs() < 1e-12);
        assert_eq!(
            amen_matrix_schatten(m, 3, &mut v),
            AmenStatus::InvalidArgument
        );
        assert_eq!(
            amen_matrix_opnorm(m, 0.5, &mut v),
            AmenStatus::InvalidArgument
        );

        let mut phi = ptr::null_mut();
        assert_eq!(amen_matrix_mazur(m, &mut phi), AmenStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(amen_matrix_get(phi, 0, 1, &mut a, &mut b), AmenStatus::Ok);
        assert!((a - 0.8).abs() < 1e-12 && b.abs() < 1e-12);
        assert_eq!(amen_matrix_get(phi, 1, 0, &mut a, &mut b), AmenStatus::Ok);
        assert!((a - 0.6).abs() < 1e-12);
        assert_eq!(
            amen_matrix_get(phi, 2, 0, &mut a, &mut b),
            AmenStatus::InvalidArgument
        );

        let mut back = ptr::null_mut();
        assert_eq!(amen_matrix_mazur_inverse(phi, &mut back), AmenStatus::Ok);
        assert_eq!(amen_matrix_get(back, 0, 1, &mut a, &mut b), AmenStatus::Ok);
        assert!((a - 0.64).abs() < 1e-12);

        let nan = [f64::NAN];
        let mut bad = ptr::null_mut();
        assert_eq!(
            amen_matrix_new(1, 1, nan.as_ptr(), ptr::null(), &mut bad),
            AmenStatus::Numerical
        );

        amen_matrix_free(back);
        amen_matrix_free(phi);
        amen_matrix_free(m);
    }
}

#[test]
fn tensor_pipeline_round_trip() {
    unsafe {
        let name = CString::new("exact-diagonal").unwrap();
        let cfg = CString::new(r#"{"primes": [2], "samples": 300}"#).unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(
            amen_tensor_builtin(name.as_ptr(), cfg.as_ptr(), &mut t),
            AmenStatus::Ok
        );
        let mut rank = 0usize;
        assert_eq!(amen_tensor_rank(t, &mut rank), AmenStatus::Ok);
        assert_eq!(rank, 49);
        let mut defect = 1.0;
        assert_eq!(amen_tensor_prod_defect(t, &mut defect), AmenStatus::Ok);
        assert!(defect < 1e-12);

        let mut json = ptr::null_mut();
        assert_eq!(amen_tensor_to_json(t, &mut json), AmenStatus::Ok);
        let json = CString::new(take(json)).unwrap();
        let mut t2 = ptr::null_mut();
        assert_eq!(
            amen_tensor_from_json(json.as_ptr(), &mut t2),
            AmenStatus::Ok
        );

        let mut report = ptr::null_mut();
        assert_eq!(
            amen_tensor_run_pipeline(t2, cfg.as_ptr(), &mut report),
            AmenStatus::Ok
        );
        let mut passed = false;
        assert_eq!(amen_report_passed(report, &mut passed), AmenStatus::Ok);
        assert!(passed);
        let mut s = ptr::null_mut();
        assert_eq!(amen_report_json(report, &mut s), AmenStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["result"]["primes"][0]["record"]["rank_lower_bound"], 7.0);
        assert_eq!(amen_report_csv(report, &mut s), AmenStatus::Ok);
        assert!(take(s).contains("l,r,eps,delta0,delta1,lambda,mu,bound"));

        let sweep = CString::new("sweep").unwrap();
        let mut t3 = ptr::null_mut();
        assert_eq!(
            amen_tensor_builtin(sweep.as_ptr(), ptr::null(), &mut t3),
            AmenStatus::Precondition
        );

        amen_report_free(report);
        amen_tensor_free(t2);
        amen_tensor_free(t);
    }
}

#[test]
fn experiments_match_library() {
    unsafe {
        let name = CString::new("plane").unwrap();
        let req = CString::new(r#"{"l": 2, "config": {"seed": 9}}"#).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(
            amen_run_experiment(name.as_ptr(), req.as_ptr(), &mut r),
            AmenStatus::Ok
        );
        let mut s = ptr::null_mut();
        assert_eq!(amen_report_json(r, &mut s), AmenStatus::Ok);
        let cfg = amenlab::report::RunConfig {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(
            take(s),
            amenlab::experiments::plane(&cfg, 2).unwrap().to_json()
        );
        amen_report_free(r);

        let name = CString::new("coarea").unwrap();
        let req =
            CString::new(r#"{"graphs": ["k4", "petersen"], "config": {"trials": 50}}"#).unwrap();
        assert_eq!(
            amen_run_experiment(name.as_ptr(), req.as_ptr(), &mut r),
            AmenStatus::Ok
        );
        let mut passed = false;
        assert_eq!(amen_report_passed(r, &mut passed), AmenStatus::Ok);
        assert!(passed);
        amen_report_free(r);

        let req = CString::new(r#"{"graphs": "k4"}"#).unwrap();
        assert_eq!(
            amen_run_experiment(name.as_ptr(), req.as_ptr(), &mut r),
            AmenStatus::InvalidArgument
        );
        let req = CString::new(r#"[1, 2]"#).unwrap();
        assert_eq!(
            amen_run_experiment(name.as_ptr(), req.as_ptr(), &mut r),
            AmenStatus::InvalidArgument
        );
    }
}
