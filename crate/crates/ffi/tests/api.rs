use std::ffi::{CStr, CString};
use std::f64::consts::PI;
use std::ptr;

use ballseries_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bs_last_error_message()) }.to_string_lossy().into_owned()
}

fn point(re: &[f64], im: &[f64]) -> *mut BsPoint {
    let mut p = ptr::null_mut();
    let s = unsafe { bs_point_new(re.as_ptr(), im.as_ptr(), re.len(), &mut p) };
    assert_eq!(s, BsStatus::Ok, "{}", last_error());
    p
}

#[test]
fn point_round_trip_and_pairing() {
    let z = point(&[0.3], &[0.4]);
    let w = point(&[0.0], &[0.1]);
    unsafe {
        assert_eq!(bs_point_dim(z), 1);
        let (mut re, mut im) = ([0.0], [0.0]);
        assert_eq!(bs_point_coords(z, re.as_mut_ptr(), im.as_mut_ptr(), 1), BsStatus::Ok);
        assert_eq!((re[0], im[0]), (0.3, 0.4));
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(bs_pairing(z, w, &mut a, &mut b), BsStatus::Ok);
        assert!((a + 0.96).abs() < 1e-15 && (b + 0.03).abs() < 1e-15);
        assert_eq!(last_error(), "");
        bs_point_free(z);
        bs_point_free(w);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut p = ptr::null_mut();
    let s = unsafe { bs_point_new([0.8].as_ptr(), [0.7].as_ptr(), 1, &mut p) };
    assert_eq!(s, BsStatus::OutsideBall);
    assert!(p.is_null());
    assert!(last_error().contains("unit ball"), "{}", last_error());

    let s = unsafe { bs_point_new(ptr::null(), [0.0].as_ptr(), 1, &mut p) };
    assert_eq!(s, BsStatus::NullPointer);

    let z1 = point(&[0.1], &[0.0]);
    let z2 = point(&[0.1, 0.0], &[0.0, 0.0]);
    let mut d = 0.0;
    assert_eq!(unsafe { bs_distance(z1, z2, &mut d) }, BsStatus::DimensionMismatch);
    assert_eq!(unsafe { bs_distance(z1, ptr::null(), &mut d) }, BsStatus::NullPointer);
    unsafe {
        bs_point_free(z1);
        bs_point_free(z2);
        bs_point_free(ptr::null_mut());
        assert_eq!(bs_point_dim(ptr::null()), 0);
    }

    let mut g = ptr::null_mut();
    let bad = [2.0, 0.0, 0.0, 1.0];
    let s = unsafe { bs_automorphism_from_matrix(bad.as_ptr(), [0.0; 4].as_ptr(), 1, &mut g) };
    assert_eq!(s, BsStatus::NotInGroup);
}

#[test]
fn automorphisms_compose_and_act() {
    let z = point(&[0.2], &[-0.3]);
    let o = point(&[0.0], &[0.0]);
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(bs_automorphism_translation(0.5, 0.1, &mut t), BsStatus::Ok);
        let mut ti = ptr::null_mut();
        assert_eq!(bs_automorphism_inverse(t, &mut ti), BsStatus::Ok);
        let mut id = ptr::null_mut();
        assert_eq!(bs_automorphism_compose(t, ti, &mut id), BsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(bs_automorphism_apply(id, z, &mut back), BsStatus::Ok);
        let (mut re, mut im) = ([0.0], [0.0]);
        bs_point_coords(back, re.as_mut_ptr(), im.as_mut_ptr(), 1);
        assert!((re[0] - 0.2).abs() < 1e-14 && (im[0] + 0.3).abs() < 1e-14);

        let mut a = ptr::null_mut();
        assert_eq!(bs_automorphism_apply(t, o, &mut a), BsStatus::Ok);
        bs_point_coords(a, re.as_mut_ptr(), im.as_mut_ptr(), 1);
        assert!((re[0] - 0.5).abs() < 1e-14 && (im[0] - 0.1).abs() < 1e-14);

        // distance is invariant
        let (mut d0, mut d1) = (0.0, 0.0);
        let mut tz = ptr::null_mut();
        bs_automorphism_apply(t, z, &mut tz);
        bs_distance(z, o, &mut d0);
        bs_distance(tz, a, &mut d1);
        assert!((d0 - d1).abs() < 1e-12);

        let mut r = ptr::null_mut();
        assert_eq!(bs_automorphism_rotation(0.7, &mut r), BsStatus::Ok);
        let (mut jr, mut ji) = (0.0, 0.0);
        assert_eq!(bs_automorphism_jacobian(r, z, &mut jr, &mut ji), BsStatus::Ok);
        assert!((jr - 0.7f64.cos()).abs() < 1e-14 && (ji - 0.7f64.sin()).abs() < 1e-14);

        let mut e = ptr::null_mut();
        assert_eq!(bs_automorphism_elliptic(0.3, 0.2, PI, &mut e), BsStatus::Ok);

        for h in [t, ti, id, r, e] {
            bs_automorphism_free(h);
        }
        for p in [back, a, tz, z, o] {
            bs_point_free(p);
        }
    }
}

#[test]
fn kernel_and_constants() {
    let o = point(&[0.0, 0.0], &[0.0, 0.0]);
    unsafe {
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(bs_kernel_power(o, o, 2, &mut re, &mut im), BsStatus::Ok);
        assert!((re - (2.0 / (PI * PI)).powi(2)).abs() < 1e-15 && im == 0.0);
        let (mut v, mut l) = (0.0, 0.0);
        assert_eq!(bs_c_ball(2, 2, &mut v, &mut l), BsStatus::Ok);
        assert!((v - 10.0).abs() < 1e-12 && (l - 10f64.ln()).abs() < 1e-14);
        assert_eq!(bs_c_ball(0, 2, &mut v, &mut l), BsStatus::InvalidArgument);
        assert_eq!(bs_c_ball(1, 3, ptr::null_mut(), &mut l), BsStatus::Ok);
        bs_point_free(o);
        assert!(!CStr::from_ptr(bs_version()).to_bytes().is_empty());
    }
}

#[test]
fn example_pairing() {
    let name = CString::new("segment").unwrap();
    let (mut v, mut e) = (0.0, 0.0);
    let s = unsafe { bs_example_i1(name.as_ptr(), 1, 0.5, f64::NAN, 64, 1e-6, &mut v, &mut e) };
    assert_eq!(s, BsStatus::Ok, "{}", last_error());
    assert!((v - 24.5725).abs() < 1e-3, "{v}");
    assert!(e < 1e-6);
    let bad = CString::new("torus").unwrap();
    let s = unsafe { bs_example_i1(bad.as_ptr(), 1, 0.5, f64::NAN, 64, 1e-6, &mut v, &mut e) };
    assert_ne!(s, BsStatus::Ok);
}

#[test]
fn cyclic_series_cancels() {
    let g = CString::new("cyclic3").unwrap();
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(bs_truncation_new(g.as_ptr(), 5, 1000, &mut t), BsStatus::Ok);
        assert_eq!(bs_truncation_len(t), 3);
        let o = point(&[0.0], &[0.0]);
        let (mut re, mut im) = (1.0, 1.0);
        assert_eq!(bs_theta_scalar(t, o, o, 2, &mut re, &mut im), BsStatus::Ok);
        assert!(re.abs() < 1e-15 && im.abs() < 1e-15);
        assert_eq!(bs_theta_scalar(t, o, o, 1, &mut re, &mut im), BsStatus::Precondition);
        bs_point_free(o);
        bs_truncation_free(t);
        let missing = CString::new("/nonexistent/group.json").unwrap();
        assert_eq!(bs_truncation_new(missing.as_ptr(), 2, 10, &mut t), BsStatus::Config);
        assert_eq!(bs_truncation_new(g.as_ptr(), 5, 2, &mut t), BsStatus::TruncationOverflow);
    }
}
