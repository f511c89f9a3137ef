mod common;

use dsr_core::metrics::{aggregate, mse, psnr, FrameReport, RateHistogram};
use dsr_core::{Color, Frame};
use proptest::prelude::*;

fn oracle_mse(a: &Frame, b: &Frame) -> f64 {
    let mut s = 0.0;
    for (p, q) in a.pixels().iter().zip(b.pixels()) {
        for (u, v) in [(p.r, q.r), (p.g, q.g), (p.b, q.b)] {
            s += (u as f64 - v as f64).powi(2);
        }
    }
    s / (3.0 * a.pixels().len() as f64)
}

fn report(i: usize, err: f64, inv: u64, base: u64) -> FrameReport {
    FrameReport {
        frame_index: i,
        mse: err,
        psnr_db: psnr(err).unwrap(),
        shader_invocations: inv,
        baseline_invocations: base,
        depth_ops: inv,
        color_ops: inv,
        rate_histogram: RateHistogram::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mse_matches_oracle_and_is_symmetric(seed in any::<u64>(), w in 1usize..30, h in 1usize..30) {
        let mut r = common::rng(seed);
        let a = common::random_frame(&mut r, w, h);
        let b = common::random_frame(&mut r, w, h);
        let m = mse(&a, &b).unwrap();
        prop_assert!((m - oracle_mse(&a, &b)).abs() <= 1e-9 * m.max(1.0));
        prop_assert_eq!(m, mse(&b, &a).unwrap());
        prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn psnr_strictly_decreasing(a in 1e-6f64..65025.0, b in 1e-6f64..65025.0) {
        prop_assume!(a < b);
        prop_assert!(psnr(a).unwrap() > psnr(b).unwrap());
    }

    #[test]
    fn aggregate_resums(
        rows in prop::collection::vec((0.0f64..100.0, 0u64..1000, 1u64..1000), 1..20)
    ) {
        let reports: Vec<FrameReport> = rows
            .iter()
            .enumerate()
            .map(|(i, &(e, inv, base))| report(i, e, inv, base))
            .collect();
        let s = aggregate(reports.clone()).unwrap().summary;
        let inv: u64 = rows.iter().map(|r| r.1).sum();
        let base: u64 = rows.iter().map(|r| r.2).sum();
        prop_assert_eq!(s.shader_invocations, inv);
        prop_assert_eq!(s.baseline_invocations, base);
        prop_assert!((s.invocation_ratio - inv as f64 / base as f64).abs() < 1e-12);
        prop_assert!((s.savings + s.invocation_ratio - 1.0).abs() < 1e-12);
        let finite: Vec<f64> = reports.iter().map(|r| r.psnr_db).filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            prop_assert!(s.mean_psnr_db.is_infinite());
        } else {
            let mean = finite.iter().sum::<f64>() / finite.len() as f64;
            prop_assert!((s.mean_psnr_db - mean).abs() < 1e-9);
        }
    }
}

#[test]
fn psnr_values() {
    assert!(psnr(0.0).unwrap().is_infinite());
    assert!((psnr(65025.0).unwrap()).abs() < 1e-12);
    assert!((psnr(1.0).unwrap() - 48.130_803_608_679_1).abs() < 1e-9);
    assert!(psnr(-1.0).is_err());
    assert!(psnr(f64::NAN).is_err());
}

#[test]
fn one_channel_off_by_one() {
    let a = Frame::filled(4, 4, Color::rgb(10, 10, 10)).unwrap();
    let b = Frame::filled(4, 4, Color::rgb(11, 10, 10)).unwrap();
    assert!((mse(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let c = Frame::filled(4, 5, Color::BLACK).unwrap();
    assert!(mse(&a, &c).is_err());
}

#[test]
fn infinite_psnr_serializes_as_string() {
    let r = aggregate(vec![report(0, 0.0, 16, 256)]).unwrap();
    let json = r.to_json(&());
    assert!(json.contains("\"mean_psnr_db\": \"inf\""));
    assert!(json.ends_with('\n'));
}

#[test]
fn empty_aggregate_rejected() {
    assert!(aggregate(Vec::new()).is_err());
}
