mod common;

use dsr_core::dct::{build_kernel, dct2d_naive, dct2d_rowcol, max_coefficient, DctCoefficients};
use proptest::prelude::*;

fn tile() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..255.0, 256)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rowcol_matches_independent_reference() {
    let k = build_kernel(16).unwrap();
    let mut r = common::rng(11);
    for _ in 0..20 {
        let x = common::random_tile(&mut r);
        let (c, _) = dct2d_rowcol(&x, &k).unwrap();
        let reference = common::reference_dct(&x);
        assert!(max_abs_diff(c.as_slice(), &reference) <= 1e-9);
    }
}

#[test]
fn naive_matches_independent_reference() {
    let mut r = common::rng(12);
    let x = common::random_tile(&mut r);
    let c = dct2d_naive(&x, 16).unwrap();
    assert!(max_abs_diff(c.as_slice(), &common::reference_dct(&x)) <= 1e-9);
}

#[test]
fn op_count_is_two_n_cubed() {
    let k = build_kernel(16).unwrap();
    let (_, ops) = dct2d_rowcol(&[0.0; 256], &k).unwrap();
    assert_eq!(ops.multiply_accumulates, 8192);
    assert_eq!(ops.lanes, 4);
    assert_eq!(ops.rows_per_lane, 4);
    assert_eq!(ops.lane_steps(), 8);
}

#[test]
fn checkerboard_energy_sits_at_highest_frequency() {
    let k = build_kernel(16).unwrap();
    let (c, _) = dct2d_rowcol(&common::checkerboard_luma(), &k).unwrap();
    let top = c.get(15, 15).abs();
    for p in 0..16 {
        for q in 0..16 {
            if (p, q) != (0, 0) && (p, q) != (15, 15) {
                assert!(c.get(p, q).abs() < top);
            }
        }
    }
    assert_eq!(max_coefficient(&c, 2).unwrap(), top);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rowcol_equals_naive(x in tile()) {
        let k = build_kernel(16).unwrap();
        let (a, _) = dct2d_rowcol(&x, &k).unwrap();
        let b = dct2d_naive(&x, 16).unwrap();
        prop_assert!(max_abs_diff(a.as_slice(), b.as_slice()) <= 1e-9);
    }

    #[test]
    fn parseval(x in tile()) {
        let k = build_kernel(16).unwrap();
        let (c, _) = dct2d_rowcol(&x, &k).unwrap();
        let e: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((c.energy() - e).abs() <= 1e-6 * e.max(1.0));
    }

    #[test]
    fn linear(x in tile(), y in tile(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        let k = build_kernel(16).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (cx, _) = dct2d_rowcol(&x, &k).unwrap();
        let (cy, _) = dct2d_rowcol(&y, &k).unwrap();
        let (cm, _) = dct2d_rowcol(&mix, &k).unwrap();
        for i in 0..256 {
            let want = a * cx.as_slice()[i] + b * cy.as_slice()[i];
            prop_assert!((cm.as_slice()[i] - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn max_c_is_non_increasing_in_d(x in tile()) {
        let k = build_kernel(16).unwrap();
        let (c, _) = dct2d_rowcol(&x, &k).unwrap();
        let mut prev = f64::INFINITY;
        for d in 0..=31 {
            let m = max_coefficient(&c, d).unwrap();
            prop_assert!(m <= prev);
            prop_assert!(m >= 0.0);
            prev = m;
        }
        prop_assert_eq!(max_coefficient(&c, 31).unwrap(), 0.0);
        prop_assert!(max_coefficient(&c, 32).is_err());
    }

    #[test]
    fn max_c_scales_with_input(x in tile(), s in 0.0f64..8.0, d in 0usize..8) {
        let k = build_kernel(16).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let (c, _) = dct2d_rowcol(&x, &k).unwrap();
        let (cs, _) = dct2d_rowcol(&scaled, &k).unwrap();
        let m = max_coefficient(&c, d).unwrap();
        let ms = max_coefficient(&cs, d).unwrap();
        prop_assert!((ms - s * m).abs() <= 1e-8 * (1.0 + s * m));
    }

    #[test]
    fn max_c_matches_brute_force(c in prop::collection::vec(-100.0f64..100.0, 256), d in 0usize..=31) {
        let coeffs = DctCoefficients::from_vec(16, c.clone()).unwrap();
        let mut want = 0.0f64;
        for (i, v) in c.iter().enumerate() {
            if i / 16 + i % 16 >= d {
                want = want.max(v.abs());
            }
        }
        prop_assert_eq!(max_coefficient(&coeffs, d).unwrap(), want);
    }
}
