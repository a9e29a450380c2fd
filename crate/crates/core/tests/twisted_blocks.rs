mod common;

use common::*;
use landsberg_core::curvature::Oracle;
use landsberg_core::metric::{FinslerFunction, MetricError};
use landsberg_core::sample::product_samples;
use landsberg_core::tensor::max_abs_diff;
use landsberg_core::twisted::*;

fn verify(spec: &TwistedProductSpec, count: usize, seed: u64) -> Verification {
    verify_blocks(spec, &product_samples(2, 2, count, seed), &VerifyOptions::default()).unwrap()
}

fn status(v: &Verification, q: Quantity) -> Status {
    v.verdict(q).unwrap().status
}

fn report(v: &Verification, q: Quantity, c: Option<Convention>) -> &BlockReport {
    v.verdict(q).unwrap().reports.iter().find(|r| r.convention == c).unwrap()
}

#[test]
fn squared_norm_of_the_product() {
    let spec = product(euclidean(), euclidean(), "exp(0.1*x1)");
    assert_eq!(spec.f_squared_real(&[0.0, 0.3, -0.2, 0.1], &[1.0, 0.0, 2.0, 0.0]).unwrap(), 5.0);
    let direct = product(randers(), riemannian(), "1");
    let (x, y) = ([0.2, -0.4, 0.5, 0.1], [0.7, -0.3, 1.2, 0.4]);
    let f1 = randers().f_squared_real(&x[..2], &y[..2]).unwrap();
    let f2 = riemannian().f_squared_real(&x[2..], &y[2..]).unwrap();
    assert!(rel(direct.f_squared_real(&x, &y).unwrap(), f1 + f2) <= 1e-15);
    let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
    let a = direct.norm(&x, &y).unwrap();
    assert!(rel(direct.norm(&x, &y2).unwrap(), 2.0 * a) <= 1e-15);
}

#[test]
fn non_positive_twist_is_rejected() {
    let spec = product(euclidean(), euclidean(), "x1 - 5");
    assert!(matches!(spec.twist_value(&[0.0; 4]), Err(MetricError::NonPositiveTwist { .. })));
    let p = point(&[0.0; 4], &[1.0, 0.0, 1.0, 0.0]);
    assert!(spec.block_inputs(&p).is_err());
}

#[test]
fn block_indices_round_trip() {
    for g in 0..5 {
        let b = BlockIndex::split(g, 2);
        assert_eq!(b.second, g >= 2);
        assert_eq!(b.global(2), g);
    }
}

#[test]
fn fundamental_tensor_of_constant_twist() {
    let spec = product(euclidean(), euclidean(), "2");
    let p = point(&[0.1, 0.2, 0.3, 0.4], &[1.0, 0.5, -0.7, 0.2]);
    let (g, g_inv) = block_fundamental(&spec.block_inputs(&p).unwrap());
    let (og, _) = Oracle::new(4).fundamental_tensor(&spec, &p).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            let diag = if a == b { if a < 2 { 1.0 } else { 4.0 } } else { 0.0 };
            assert_eq!(g.get(&[a, b]), diag);
            assert_eq!(g_inv.get(&[a, b]), if diag == 0.0 { 0.0 } else { 1.0 / diag });
            assert!((og.get(&[a, b]) - diag).abs() <= 1e-12);
        }
    }
}

#[test]
fn fundamental_tensor_blocks_match_oracle() {
    for spec in [
        product(randers(), euclidean(), BOTH_BLOCKS),
        product(euclidean(), randers(), BOTH_BLOCKS),
        product(randers(), randers(), BOTH_BLOCKS),
    ] {
        for p in product_samples(2, 2, 20, 31) {
            let (g, _) = block_fundamental(&spec.block_inputs(&p).unwrap());
            let b = Oracle::new(4).evaluate(&spec, &p).unwrap();
            b.g.for_each(|i, v| {
                if (i[0] < 2) != (i[1] < 2) {
                    assert!(v.abs() <= 1e-10);
                } else {
                    assert!(rel(g.get(i), v) <= 1e-9);
                }
            });
        }
    }
}

#[test]
fn cartan_blocks_scale_with_constant_twist() {
    let spec = product(euclidean(), randers(), "3");
    let p = &product_samples(2, 2, 1, 4)[0];
    let inp = spec.block_inputs(p).unwrap();
    let c = cartan_blocks(&inp);
    let oracle = Oracle::new(4).evaluate(&spec, p).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let c2 = inp.second.cartan.get(&[i, j, k]);
                assert!((c.get(&[i + 2, j + 2, k + 2]) - 9.0 * c2).abs() <= 1e-15);
                assert!((oracle.cartan.get(&[i + 2, j + 2, k + 2]) - 9.0 * c2).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn mixed_cartan_and_landsberg_blocks_vanish_in_oracle() {
    let spec = product(randers(), randers(), BOTH_BLOCKS);
    for p in product_samples(2, 2, 20, 5) {
        let b = Oracle::new(4).evaluate(&spec, &p).unwrap();
        b.cartan.for_each(|i, v| {
            let unprimed = i.iter().filter(|&&a| a < 2).count();
            if unprimed == 1 || unprimed == 2 {
                assert!(v.abs() <= 1e-10, "C{i:?} = {v}");
            }
        });
        b.landsberg.for_each(|i, v| {
            if i.iter().filter(|&&a| a < 2).count() == 1 {
                assert!(v.abs() <= 1e-10, "L{i:?} = {v}");
            }
        });
    }
}

#[test]
fn mean_cartan_is_independent_of_the_twist() {
    let p = &product_samples(2, 2, 1, 6)[0];
    let i_of = |twist: &str| {
        let spec = product(euclidean(), randers(), twist);
        let b = Oracle::new(4).evaluate(&spec, p).unwrap();
        let inp = spec.block_inputs(p).unwrap();
        assert!(max_abs_diff(&mean_cartan_blocks(&inp), &b.mean_cartan) <= 1e-9);
        assert!(max_abs_diff(&b.mean_cartan[2..], &inp.second.mean_cartan) <= 1e-9);
        b.mean_cartan
    };
    let base = i_of(BOTH_BLOCKS);
    assert!(max_abs_diff(&base, &i_of("2.5*exp(0.1*(x1 + x3))")) <= 1e-10);
    assert!(max_abs_diff(&base, &i_of("1")) <= 1e-10);
    let half: Vec<f64> = base.iter().map(|v| 0.5 * v).collect();
    let spec = product(euclidean(), randers(), BOTH_BLOCKS);
    let doubled = Oracle::new(4).evaluate(&spec, &p.with_scaled_fiber(2.0)).unwrap();
    assert!(max_abs_diff(&doubled.mean_cartan, &half) <= 1e-10);
}

#[test]
fn trivial_product_confirms_everything() {
    let v = verify(&product(euclidean(), euclidean(), "1"), 20, 7);
    assert_eq!(v.valid_samples, 20);
    for q in Quantity::ALL {
        assert!(matches!(status(&v, q), Status::Confirmed(_)), "{}", q.name());
    }
}

#[test]
fn cartan_propositions_hold_on_randers_products() {
    for spec in [product(euclidean(), randers(), BOTH_BLOCKS), product(randers(), randers(), BOTH_BLOCKS)] {
        let v = verify(&spec, 30, 8);
        for q in [Quantity::Cartan, Quantity::MeanCartan] {
            assert_eq!(status(&v, q), Status::Confirmed(None));
            assert!(report(&v, q, None).max_abs_residual <= 1e-9);
        }
    }
}

#[test]
fn riemannian_factors_confirm_every_block_formula() {
    let v = verify(&product(riemannian(), riemannian(), BOTH_BLOCKS), 20, 9);
    for q in Quantity::ALL {
        assert!(matches!(status(&v, q), Status::Confirmed(_)));
    }
    for c in Convention::BOTH {
        assert!(report(&v, Quantity::Landsberg, Some(c)).oracle_max_abs <= 1e-9);
        assert!(report(&v, Quantity::MeanLandsberg, Some(c)).trace_consistency.unwrap() <= 1e-8);
    }
}

#[test]
fn berwald_formula_matches_under_factor_lowering() {
    let v = verify(&product(euclidean(), randers(), BOTH_BLOCKS), 20, 10);
    assert_eq!(status(&v, Quantity::Berwald), Status::Confirmed(Some(Convention::B)));
    assert!(report(&v, Quantity::Berwald, Some(Convention::A)).relative_residual > 1e-3);
}

#[test]
fn constant_twist_matches_under_factor_lowering() {
    let spec = product(randers(), randers(), "1.7");
    let v = verify(&spec, 20, 11);
    assert_eq!(status(&v, Quantity::Berwald), Status::Confirmed(None));
    for q in [Quantity::Landsberg, Quantity::MeanLandsberg] {
        assert_eq!(status(&v, q), Status::Confirmed(Some(Convention::B)), "{}", q.name());
    }
    assert!(report(&v, Quantity::MeanLandsberg, Some(Convention::B)).trace_consistency.unwrap() <= 1e-8);
    // the full-metric Landsberg tensor is f² times the second-block closed form
    let p = &product_samples(2, 2, 1, 12)[0];
    let inp = spec.block_inputs(p).unwrap();
    let closed = landsberg_blocks(&inp, Convention::B);
    let oracle = Oracle::new(4).evaluate(&spec, p).unwrap();
    for i in 2..4 {
        for j in 2..4 {
            for k in 2..4 {
                let c = closed.get(&[i, j, k]);
                assert!((c - inp.second.landsberg.get(&[i - 2, j - 2, k - 2])).abs() <= 1e-12);
                assert!((oracle.landsberg.get(&[i, j, k]) - 1.7 * 1.7 * c).abs() <= 1e-9);
            }
        }
    }
    let j = mean_landsberg_blocks(&inp, Convention::B);
    for a in 0..2 {
        assert!((j[a + 2] - inp.second.mean_landsberg[a] / (1.7 * 1.7)).abs() <= 1e-12);
    }
}

#[test]
fn warped_twist_reduces_and_matches() {
    let spec = product(euclidean(), randers(), FIRST_BLOCK);
    for p in product_samples(2, 2, 5, 13) {
        let inp = spec.block_inputs(&p).unwrap();
        assert!(inp.df[2..].iter().all(|&d| d == 0.0));
        assert!(inp.df[0] > 0.0);
    }
    let v = verify(&spec, 30, 14);
    for q in [Quantity::Landsberg, Quantity::MeanLandsberg] {
        assert_eq!(status(&v, q), Status::Confirmed(Some(Convention::B)), "{}", q.name());
        assert!(report(&v, q, Some(Convention::B)).oracle_max_abs > 1e-4);
    }
    assert!(report(&v, Quantity::MeanLandsberg, Some(Convention::B)).trace_consistency.unwrap() <= 1e-8);
}

#[test]
fn landsberg_formulas_disagree_when_the_twist_varies_along_the_second_factor() {
    let v = verify(&product(euclidean(), randers(), BOTH_BLOCKS), 50, 15);
    for q in [Quantity::Landsberg, Quantity::MeanLandsberg] {
        assert_eq!(status(&v, q), Status::Refuted, "{}", q.name());
        for c in Convention::BOTH {
            let r = report(&v, q, Some(c));
            let scale = r.oracle_max_abs.max(1e-3);
            let bad: Vec<&str> = r
                .blocks
                .iter()
                .filter(|b| b.max_abs / scale > 1e-6)
                .map(|b| b.block.as_str())
                .collect();
            let expected = if q == Quantity::Landsberg { "i'j'k'" } else { "i'" };
            assert_eq!(bad, vec![expected], "{} {}", q.name(), c.name());
        }
    }
    let trace = report(&v, Quantity::MeanLandsberg, Some(Convention::B)).trace_consistency.unwrap();
    assert!(trace > 1e-3);
}

#[test]
fn corrupted_formula_is_refuted() {
    let spec = product(euclidean(), randers(), BOTH_BLOCKS);
    let opts = VerifyOptions {
        corrupt: Some(Quantity::Cartan),
        ..VerifyOptions::default()
    };
    let v = verify_blocks(&spec, &product_samples(2, 2, 10, 16), &opts).unwrap();
    assert_eq!(status(&v, Quantity::Cartan), Status::Refuted);
    assert!(v.any_refuted());
}

#[test]
fn unusable_samples_are_skipped_or_fatal() {
    let spec = product(euclidean(), euclidean(), "1");
    let mut pts = product_samples(2, 2, 3, 17);
    pts[1].y[2] = 0.0;
    pts[1].y[3] = 0.0;
    let v = verify_blocks(&spec, &pts, &VerifyOptions::default()).unwrap();
    assert_eq!(v.valid_samples, 2);
    assert_eq!(v.skipped.len(), 1);
    assert_eq!(v.skipped[0].0, 1);
    let r = verify_blocks(&spec, &pts[1..2], &VerifyOptions::default());
    assert!(matches!(r, Err(VerifyError::NoValidSamples { skipped: 1 })));
}
