use std::sync::Arc;

use landsberg_core::jet::{DegreeCaps, Jet, JetSpace};
use proptest::prelude::*;

fn space() -> Arc<JetSpace> {
    JetSpace::new(1, 2, DegreeCaps::new(1, 5))
}

/// A polynomial in the three seeded variables. Integer coefficients and
/// base values keep every Taylor coefficient an exactly representable integer.
#[derive(Debug, Clone)]
struct Poly {
    at: [i8; 3],
    terms: Vec<(i8, Vec<usize>)>,
}

fn poly() -> impl Strategy<Value = Poly> {
    (
        prop::array::uniform3(-2i8..=2),
        prop::collection::vec((-3i8..=3, prop::collection::vec(0usize..3, 0..=3)), 1..6),
    )
        .prop_map(|(at, terms)| Poly { at, terms })
}

fn build(sp: &Arc<JetSpace>, p: &Poly) -> Jet {
    let vars: Vec<Jet> = (0..3).map(|i| sp.lift_variable(i, p.at[i] as f64).unwrap()).collect();
    let mut acc = sp.constant(0.0);
    for (c, factors) in &p.terms {
        let mut t = sp.constant(*c as f64);
        for &v in factors {
            t = t.mul(&vars[v]);
        }
        acc = acc.add(&t);
    }
    acc
}

/// A jet with non-polynomial content, evaluated at real base values.
fn smooth(sp: &Arc<JetSpace>, a: f64, b: f64, c: f64) -> Jet {
    let x = sp.lift_variable(0, a).unwrap();
    let y1 = sp.lift_variable(1, b).unwrap();
    let y2 = sp.lift_variable(2, c).unwrap();
    x.mul(&y1).sin().unwrap().add(&y2.scale(0.5).exp().unwrap()).add(&y1.mul(&y2))
}

fn coeffs(j: &Jet) -> Vec<f64> {
    j.taylor_coefficients().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn leibniz_rule(p in poly(), q in poly()) {
        let sp = space();
        let (a, b) = (build(&sp, &p), build(&sp, &q));
        let ab = a.mul(&b);
        for k in 0..3 {
            let lhs = ab.partial_vars(&[k]).unwrap();
            let rhs = a.partial_vars(&[k]).unwrap() * b.value() + a.value() * b.partial_vars(&[k]).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn leibniz_rule_smooth(a in -1.0f64..1.0, b in 0.5f64..2.0, c in 0.5f64..2.0, d in 0.5f64..2.0) {
        let sp = space();
        let (u, v) = (smooth(&sp, a, b, c), smooth(&sp, b - 1.0, d, a + 1.5));
        let uv = u.mul(&v);
        for k in 0..3 {
            let lhs = uv.partial_vars(&[k]).unwrap();
            let rhs = u.partial_vars(&[k]).unwrap() * v.value() + u.value() * v.partial_vars(&[k]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn ring_laws_hold_exactly(p in poly(), q in poly(), r in poly()) {
        let sp = space();
        let (a, b, c) = (build(&sp, &p), build(&sp, &q), build(&sp, &r));
        prop_assert_eq!(coeffs(&a.add(&b)), coeffs(&b.add(&a)));
        prop_assert_eq!(coeffs(&a.mul(&b)), coeffs(&b.mul(&a)));
        prop_assert_eq!(coeffs(&a.add(&b).add(&c)), coeffs(&a.add(&b.add(&c))));
        prop_assert_eq!(coeffs(&a.mul(&b).mul(&c)), coeffs(&a.mul(&b.mul(&c))));
        prop_assert_eq!(coeffs(&a.mul(&b.add(&c))), coeffs(&a.mul(&b).add(&a.mul(&c))));
    }

    #[test]
    fn sqrt_squares_back(p in poly(), shift in 1.0f64..20.0) {
        let sp = space();
        let a = build(&sp, &p);
        let a = a.add_constant(shift + a.value().abs());
        let r = a.sqrt().unwrap();
        let back = r.mul(&r);
        let scale = coeffs(&a).iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, y) in coeffs(&back).iter().zip(coeffs(&a)) {
            prop_assert!((x - y).abs() <= 1e-12 * scale, "{} vs {}", x, y);
        }
    }

    #[test]
    fn quotient_inverts_product(p in poly(), q in poly(), shift in 1.0f64..5.0) {
        let sp = space();
        let a = build(&sp, &p);
        let b = build(&sp, &q);
        let b = b.add_constant(shift + b.value().abs());
        let back = a.mul(&b).div(&b).unwrap();
        let scale = coeffs(&a).iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, y) in coeffs(&back).iter().zip(coeffs(&a)) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
    }
}
