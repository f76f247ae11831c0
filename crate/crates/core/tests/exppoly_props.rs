use proptest::prelude::*;
use soliton_forge::exppoly::{eval_ratio, ExpPoly, ExpTerm};

/// Integer coefficients and rates keep every algebraic operation exact, so
/// canonical forms can be compared with `==`.
fn poly() -> impl Strategy<Value = ExpPoly> {
    prop::collection::vec((-5i32..=5, -4i32..=4), 0..6).prop_map(|v| {
        ExpPoly::from_terms(
            v.into_iter()
                .map(|(c, r)| ExpTerm::new(c as f64, r as f64))
                .collect(),
        )
    })
}

fn is_canonical(p: &ExpPoly) -> bool {
    p.terms().windows(2).all(|w| w[0].rate < w[1].rate)
        && p.terms().iter().all(|t| t.coeff != 0.0)
}

proptest! {
    #[test]
    fn addition_commutes(a in poly(), b in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
    }

    #[test]
    fn multiplication_commutes(a in poly(), b in poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn multiplication_associates(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn distributive_law(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn product_rule(a in poly(), b in poly()) {
        let lhs = a.mul(&b).differentiate();
        let rhs = a.differentiate().mul(&b).add(&a.mul(&b.differentiate()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_form_is_idempotent(a in poly(), b in poly()) {
        let s = a.mul(&b).sub(&b);
        prop_assert!(is_canonical(&s));
        prop_assert_eq!(ExpPoly::from_terms(s.terms().to_vec()), s.clone());
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn evaluation_is_additive_and_multiplicative(a in poly(), b in poly(), x in -1.5f64..1.5) {
        let scale = 1.0 + a.eval(x).abs() + b.eval(x).abs();
        prop_assert!((a.add(&b).eval(x) - a.eval(x) - b.eval(x)).abs() < 1e-12 * scale);
        let prod = a.eval(x) * b.eval(x);
        prop_assert!((a.mul(&b).eval(x) - prod).abs() < 1e-11 * scale * scale);
    }

    #[test]
    fn ratio_matches_plain_quotient(a in poly(), x in -1.0f64..1.0) {
        let den = ExpPoly::from_terms(vec![ExpTerm::new(1.0, 0.0), ExpTerm::new(2.0, 3.0)]);
        let direct = a.eval(x) / den.eval(x);
        let r = eval_ratio(&a, &den, x).unwrap();
        prop_assert!((r - direct).abs() < 1e-12 * (1.0 + direct.abs()));
    }
}

#[test]
fn zero_and_constants() {
    assert!(ExpPoly::zero().is_zero());
    assert_eq!(ExpPoly::constant(0.0), ExpPoly::zero());
    let p = ExpPoly::from_terms(vec![ExpTerm::new(2.0, 1.0), ExpTerm::new(-2.0, 1.0)]);
    assert!(p.is_zero());
    assert_eq!(ExpPoly::monomial(3.0, 2.0).differentiate(), ExpPoly::monomial(6.0, 2.0));
}
