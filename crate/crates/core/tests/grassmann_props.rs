mod common;

use num_rational::BigRational;
use proptest::prelude::*;
use superspin::{AlgebraConfig, MultiIndex, Scalar, Supernumber};

use common::{naive_mul, to_naive};

type Q = BigRational;

const L: usize = 5;

fn rational_config() -> AlgebraConfig {
    AlgebraConfig::for_scalar::<Q>(L).unwrap()
}

/// Up to eight terms with coefficients `k/d`; `parity` restricts the index
/// length to even (0), odd (1), or anything (2).
fn supernumber(parity: u8, soul_only: bool) -> impl Strategy<Value = Supernumber<Q>> {
    prop::collection::vec((0u32..(1 << L), -6i64..=6, 1i64..=4), 0..8).prop_map(move |terms| {
        let c = rational_config();
        let terms = terms.into_iter().filter_map(|(bits, k, d)| {
            let mi = MultiIndex::from_bits(bits);
            let keep = match parity {
                0 => mi.is_even(),
                1 => !mi.is_even(),
                _ => true,
            };
            (keep && !(soul_only && mi.is_empty())).then(|| (mi, Q::from_ratio(k, d)))
        });
        Supernumber::from_terms(c, terms).unwrap()
    })
}

fn float_supernumber() -> impl Strategy<Value = Supernumber<f64>> {
    prop::collection::vec((0u32..(1 << L), -4.0f64..4.0), 0..10).prop_map(|terms| {
        let c = AlgebraConfig::for_scalar::<f64>(L).unwrap();
        Supernumber::from_terms(c, terms.into_iter().map(|(b, x)| (MultiIndex::from_bits(b), x))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_matches_reference(a in supernumber(2, false), b in supernumber(2, false)) {
        prop_assert_eq!(to_naive(&(&a * &b)), naive_mul(&to_naive(&a), &to_naive(&b)));
    }

    #[test]
    fn ring_axioms_exact(a in supernumber(2, false), b in supernumber(2, false), c in supernumber(2, false)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
    }

    #[test]
    fn ring_axioms_float(a in float_supernumber(), b in float_supernumber(), c in float_supernumber()) {
        let scale = a.norm() * b.norm() * c.norm();
        let assoc = (&(&(&a * &b) * &c) - &(&a * &(&b * &c))).norm();
        prop_assert!(assoc <= 1e-12 * scale.max(1.0), "associativity residual {assoc}");
        let dist = (&(&a * &(&b + &c)) - &(&(&a * &b) + &(&a * &c))).norm();
        prop_assert!(dist <= 1e-12 * (a.norm() * (b.norm() + c.norm())).max(1.0));
    }

    #[test]
    fn graded_commutativity(x in supernumber(1, false), y in supernumber(1, false), e in supernumber(0, false), z in supernumber(2, false)) {
        prop_assert_eq!(&x * &y, -(&y * &x));
        prop_assert_eq!(&e * &z, &z * &e);
    }

    #[test]
    fn submultiplicative(a in supernumber(2, false), b in supernumber(2, false)) {
        prop_assert!((&a * &b).norm() <= a.norm() * b.norm());
    }

    #[test]
    fn body_is_multiplicative(a in supernumber(2, false), b in supernumber(2, false), s in supernumber(2, true)) {
        prop_assert_eq!((&a * &b).body(), a.body() * b.body());
        prop_assert!(!(&s * &b).has_body());
    }

    #[test]
    fn soul_is_nilpotent(s in supernumber(2, true)) {
        prop_assert!(s.pow(L as u32 + 1).is_zero());
    }

    #[test]
    fn invert_round_trip(k in prop_oneof![-8i64..=-1, 1i64..=8], d in 1i64..=10, s in supernumber(0, true)) {
        let c = rational_config();
        let z = &Supernumber::scalar(c, Q::from_ratio(k, d)) + &s;
        let inv = z.invert().unwrap();
        prop_assert_eq!(&z * &inv, Supernumber::one(c));
    }

    #[test]
    fn binomial_series(s in supernumber(0, true)) {
        let c = rational_config();
        let w = s.binomial_inverse_sqrt(true).unwrap();
        prop_assert_eq!(&(&w * &w) * &(&Supernumber::one(c) + &s), Supernumber::one(c));
    }
}

#[test]
fn zero_body_is_not_invertible() {
    let c = rational_config();
    let z = Supernumber::<Q>::generator(c, 1) * Supernumber::generator(c, 2);
    assert!(matches!(z.invert(), Err(superspin::Error::BodyNotInvertible { .. })));
}
