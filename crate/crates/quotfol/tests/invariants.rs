//! Randomized algebraic invariants of the polynomial core, on arbitrary
//! sparse inputs rather than the seeded generators of the `properties`
//! subcommand.

use proptest::prelude::*;

use quotfol::poly::{varset, Poly};
use quotfol::scalar::{rat, FieldSpec, Scalar};

type Term = ((u32, u32, u32), i64);

fn poly_from(terms: &[Term]) -> Poly {
    let vars = varset(&["x", "y", "z"]);
    let field = FieldSpec::rational();
    let mut p = Poly::zero(&vars, &field);
    for &((i, j, k), c) in terms {
        let t = Poly::constant(Scalar::from_rat(rat(c, 1), &field), &vars)
            .mul(&Poly::var(0, &vars, &field).pow(i))
            .unwrap()
            .mul(&Poly::var(1, &vars, &field).pow(j))
            .unwrap()
            .mul(&Poly::var(2, &vars, &field).pow(k))
            .unwrap();
        p = p.add(&t).unwrap();
    }
    p
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..4, 0u32..4, 0u32..4), -9i64..10), 0..6)
        .prop_map(|ts| poly_from(&ts))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_division_round_trip(a in arb_poly(), b in arb_poly()) {
        prop_assume!(!b.is_zero());
        let q = a.mul(&b).unwrap().exact_div(&b).unwrap();
        prop_assert_eq!(q, a);
    }

    #[test]
    fn gcd_divides_both_operands(a in arb_poly(), b in arb_poly(), m in arb_poly()) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        // a common factor m forces a nontrivial gcd
        let am = a.mul(&m).unwrap();
        let bm = b.mul(&m).unwrap();
        prop_assume!(!am.is_zero());
        let g = am.gcd(&bm).unwrap();
        prop_assert!(am.exact_div(&g).is_ok());
        prop_assert!(bm.exact_div(&g).is_ok());
        if !m.is_zero() {
            prop_assert!(g.exact_div(&m).is_ok());
        }
    }
}
