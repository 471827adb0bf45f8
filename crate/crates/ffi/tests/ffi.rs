use std::ffi::CStr;
use std::ptr;

use switchstab::families::{growth_factor, stable_parameter, unstable_parameter};
use switchstab_ffi::*;

fn last_error() -> String {
    let p = ss_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn family(t: f64) -> *mut SsClass {
    let mut class = ptr::null_mut();
    assert_eq!(unsafe { ss_class_family(t, &mut class) }, SsStatus::Ok);
    class
}

#[test]
fn scalar_class_bounds_with_buffers() {
    let coords = [0.5, 0.0, 0.0, 0.5];
    let mut class = ptr::null_mut();
    assert_eq!(
        unsafe { ss_class_new(1, 2, coords.as_ptr(), 4, &mut class) },
        SsStatus::Ok
    );
    let (mut m, mut n) = (0, 0);
    assert_eq!(
        unsafe { ss_class_shape(class, &mut m, &mut n) },
        SsStatus::Ok
    );
    assert_eq!((m, n), (1, 2));

    let mut b = SsBounds {
        depth: 0,
        best_upper: 0.0,
        best_lower: 0.0,
        products: 0,
        verdict: SsVerdict::Inconclusive,
    };
    let mut upper = [0.0; 3];
    let mut lower = [0.0; 3];
    let st = unsafe {
        ss_stability_bounds(
            class,
            3,
            1e-9,
            1000,
            &mut b,
            upper.as_mut_ptr(),
            lower.as_mut_ptr(),
            3,
        )
    };
    assert_eq!(st, SsStatus::Ok);
    assert_eq!(b.verdict, SsVerdict::LikelyStable);
    assert_eq!(b.products, 3);
    for v in upper
        .iter()
        .chain(&lower)
        .chain([&b.best_upper, &b.best_lower])
    {
        assert!((v - 0.5).abs() < 1e-12);
    }

    let st = unsafe {
        ss_stability_bounds(
            class,
            3,
            1e-9,
            1000,
            &mut b,
            upper.as_mut_ptr(),
            ptr::null_mut(),
            2,
        )
    };
    assert_eq!(st, SsStatus::BufferTooSmall);
    unsafe { ss_class_free(class) };
}

#[test]
fn family_classes_classify() {
    let mut b = SsBounds {
        depth: 0,
        best_upper: 0.0,
        best_lower: 0.0,
        products: 0,
        verdict: SsVerdict::Inconclusive,
    };
    let unstable = family(unstable_parameter(6));
    assert_eq!(
        unsafe {
            ss_stability_bounds(
                unstable,
                8,
                1e-9,
                1_000_000,
                &mut b,
                ptr::null_mut(),
                ptr::null_mut(),
                0,
            )
        },
        SsStatus::Ok
    );
    assert_eq!(b.verdict, SsVerdict::ProvenUnstable);
    unsafe { ss_class_free(unstable) };

    let stable = family(stable_parameter(4));
    assert_eq!(
        unsafe {
            ss_stability_bounds(
                stable,
                10,
                1e-9,
                1_000_000,
                &mut b,
                ptr::null_mut(),
                ptr::null_mut(),
                0,
            )
        },
        SsStatus::Ok
    );
    assert!(b.best_upper < 1.0);
    unsafe { ss_class_free(stable) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut class = ptr::null_mut();
    let coords = [1.0, 2.0, 3.0];
    assert_eq!(
        unsafe { ss_class_new(1, 2, coords.as_ptr(), 3, &mut class) },
        SsStatus::DimensionMismatch
    );
    assert!(class.is_null());
    let bad = [f64::NAN, 0.0, 0.0, 1.0];
    assert_eq!(
        unsafe { ss_class_new(1, 2, bad.as_ptr(), 4, &mut class) },
        SsStatus::NonFinite
    );
    assert_eq!(
        unsafe { ss_class_new(1, 2, ptr::null(), 4, &mut class) },
        SsStatus::NullPointer
    );
    assert_eq!(
        unsafe { ss_class_family(1.0, &mut class) },
        SsStatus::Domain
    );

    let big = family(0.3);
    let mut b = SsBounds {
        depth: 0,
        best_upper: 0.0,
        best_lower: 0.0,
        products: 0,
        verdict: SsVerdict::Inconclusive,
    };
    let st = unsafe {
        ss_stability_bounds(
            big,
            20,
            1e-9,
            1000,
            &mut b,
            ptr::null_mut(),
            ptr::null_mut(),
            0,
        )
    };
    assert_eq!(st, SsStatus::BudgetExceeded);
    assert!(last_error().contains("budget"));
    assert_eq!(
        unsafe {
            ss_stability_bounds(
                ptr::null(),
                2,
                1e-9,
                10,
                &mut b,
                ptr::null_mut(),
                ptr::null_mut(),
                0,
            )
        },
        SsStatus::NullPointer
    );
    unsafe {
        ss_class_free(big);
        ss_class_free(ptr::null_mut());
        ss_norm_free(ptr::null_mut());
    }
}

#[test]
fn growth_and_regularity() {
    let mut g = 0.0;
    assert_eq!(unsafe { ss_growth_factor(6, &mut g) }, SsStatus::Ok);
    assert_eq!(g, growth_factor(6));
    assert!(g > 1.0);

    let word = [1usize, 2, 2, 1, 3, 2, 1, 3];
    let mut r = 0;
    assert_eq!(
        unsafe { ss_regularity_index(3, word.as_ptr(), word.len(), &mut r) },
        SsStatus::Ok
    );
    assert_eq!(r, 2);
    assert_eq!(
        unsafe { ss_regularity_index(2, word.as_ptr(), word.len(), &mut r) },
        SsStatus::IndexOutOfRange
    );
    assert_eq!(
        unsafe { ss_regularity_index(2, ptr::null(), 0, &mut r) },
        SsStatus::Ok
    );
    assert_eq!(r, 0);
}

#[test]
fn criteria_through_c_abi() {
    let mut v = SsCriterionVerdict::NotStable;
    let mut c = SsR2Case::None;
    assert_eq!(
        unsafe { ss_r2_criterion(-1.0, 0.0, 3.9, -1.0, 0.0, &mut v, &mut c) },
        SsStatus::Ok
    );
    assert_eq!((v, c), (SsCriterionVerdict::Stable, SsR2Case::D));
    assert_eq!(
        unsafe { ss_r2_criterion(-1.0, 4.0, 4.0, -1.0, 0.0, &mut v, &mut c) },
        SsStatus::Ok
    );
    assert_eq!((v, c), (SsCriterionVerdict::NotStable, SsR2Case::None));
    assert_eq!(
        unsafe { ss_r2_criterion(0.0, 0.5, 0.5, 0.0, 0.0, &mut v, &mut c) },
        SsStatus::Ok
    );
    assert_eq!((v, c), (SsCriterionVerdict::Stable, SsR2Case::E));

    let mut root = 0.0;
    let coeffs = [0.6; 4];
    assert_eq!(
        unsafe { ss_rplus_criterion(coeffs.as_ptr(), 2, 0.0, &mut v, &mut root) },
        SsStatus::Ok
    );
    assert_eq!(v, SsCriterionVerdict::NotStable);
    assert!((root - 1.2).abs() < 1e-10);
    let zero = [0.5, 0.0, 0.5, 0.5];
    assert_eq!(
        unsafe { ss_rplus_criterion(zero.as_ptr(), 2, 0.0, &mut v, &mut root) },
        SsStatus::InvalidInput
    );
}

#[test]
fn norm_handle_lifecycle() {
    let class = family(stable_parameter(3));
    let mut norm = ptr::null_mut();
    let mu = 1.0 - stable_parameter(3).powi(4);
    assert_eq!(
        unsafe { ss_norm_build(class, mu, 6, &mut norm) },
        SsStatus::Ok
    );
    let mut q = 0.0;
    assert_eq!(unsafe { ss_norm_rate(norm, &mut q) }, SsStatus::Ok);
    assert_eq!(q, mu);
    let x = [1.0, 0.0];
    let mut value = 0.0;
    assert_eq!(
        unsafe { ss_norm_evaluate(norm, x.as_ptr(), 2, &mut value) },
        SsStatus::Ok
    );
    assert!(value >= 1.0);
    assert_eq!(
        unsafe { ss_norm_evaluate(norm, x.as_ptr(), 1, &mut value) },
        SsStatus::DimensionMismatch
    );
    unsafe { ss_norm_free(norm) };

    let mut auto = ptr::null_mut();
    assert_eq!(
        unsafe { ss_norm_build(class, 0.0, 6, &mut auto) },
        SsStatus::Ok
    );
    assert_eq!(unsafe { ss_norm_rate(auto, &mut q) }, SsStatus::Ok);
    assert!(q < 1.0);
    unsafe {
        ss_norm_free(auto);
        ss_class_free(class);
    }
}
