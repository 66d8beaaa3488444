use std::collections::BTreeMap;

use hecke_core::laurent::{divisors, euler_phi, q_int, LaurentFunction, QRational, Q};
use hecke_core::{cyclotomic_product, qint};
use num_rational::Rational64;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// `[n]_q` evaluated straight from `(v^n - v^-n) / (v - v^-1)`.
fn qint_value(n: i64, v: &Q) -> Q {
    let vn = pow(v, n);
    let num = &vn - Q::one() / &vn;
    let den = v - Q::one() / v;
    num / den
}

fn pow(v: &Q, e: i64) -> Q {
    let mut acc = Q::one();
    for _ in 0..e.abs() {
        acc *= v;
    }
    if e < 0 {
        Q::one() / acc
    } else {
        acc
    }
}

fn sample_points() -> Vec<Q> {
    vec![q(2, 1), q(3, 1), q(1, 2), q(5, 3), q(-7, 2)]
}

#[test]
fn q_integers_match_their_definition() {
    for n in 1..=12 {
        let f = qint(n).unwrap();
        for v in sample_points() {
            assert_eq!(f.eval_at(&v).unwrap(), qint_value(n, &v), "[{n}] at {v}");
        }
        assert_eq!(f.eval_at(&Q::one()).unwrap(), q_int(n));
        assert_eq!(f.bar_symmetry(), Some(1));
    }
    assert!(qint(0).is_err());
}

#[test]
fn q_integer_factors_into_cyclotomics() {
    for n in 2..=30u64 {
        let c = qint(n as i64).unwrap().to_cyclo().unwrap();
        // [n] = v^{1-n} (v^{2n} - 1) / (v^2 - 1) in the variable v.
        let want: BTreeMap<u64, i64> = divisors(2 * n).into_iter().filter(|&d| d > 2).map(|d| (d, 1)).collect();
        assert_eq!(c.phi, want, "[{n}]");
        assert_eq!(c.vpow, -(n as i64 - 1));
        assert_eq!(c.scalar, Q::one());
        let deg: u64 = want.keys().map(|&d| euler_phi(d)).sum();
        assert_eq!(deg, 2 * n - 2);
    }
}

#[test]
fn euler_phi_small_values() {
    let want = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
    for (i, w) in want.iter().enumerate() {
        assert_eq!(euler_phi(i as u64 + 1), *w);
    }
}

#[test]
fn cyclotomic_product_matches_direct_evaluation() {
    // (1 - v^6)(1 + v^2) / ((1 - v)(1 - e(1/3) v^2)(1 - e(2/3) v^2)):
    // the last two factors combine to 1 + v^2 + v^4.
    let f = cyclotomic_product(&[
        (Rational64::zero(), 6, 1),
        (Rational64::new(1, 2), 2, 1),
        (Rational64::zero(), 1, -1),
        (Rational64::new(1, 3), 2, -1),
        (Rational64::new(2, 3), 2, -1),
    ])
    .unwrap()
    .to_laurent();
    for v in sample_points() {
        let direct = (Q::one() - pow(&v, 6)) * (Q::one() + pow(&v, 2))
            / ((Q::one() - &v) * (Q::one() + pow(&v, 2) + pow(&v, 4)));
        assert_eq!(f.eval_at(&v).unwrap(), direct);
    }
    // An incomplete Galois orbit is not a product of cyclotomic polynomials.
    assert!(cyclotomic_product(&[(Rational64::new(1, 3), 1, 1)]).is_err());
    assert!(cyclotomic_product(&[(Rational64::zero(), 0, 1)]).is_err());
}

#[test]
fn non_q_rational_is_rejected() {
    // v^2 + 2 + v^-2 = [2]^2, while v^2 + 3 + v^-2 has no cyclotomic factors.
    let f = LaurentFunction::from_terms(&[(2, Q::one()), (0, q(2, 1)), (-2, Q::one())]);
    assert_eq!(f.qrational_split().unwrap(), QRational::qint_power(2, 2));
    let g = LaurentFunction::from_terms(&[(2, Q::one()), (0, q(3, 1)), (-2, Q::one())]);
    assert!(g.qrational_split().is_err());
    let h = LaurentFunction::from_terms(&[(1, Q::one()), (0, Q::one())]);
    assert!(h.qrational_split().is_err());
}

#[test]
fn display_parse_examples() {
    let x: QRational = "1/3 * [3]^-1 [4]^2".parse().unwrap();
    assert_eq!(x.scalar, q(1, 3));
    assert_eq!(x.to_string(), "1/3 * [3]^-1 [4]^2");
    assert!("1/3 * [3".parse::<QRational>().is_err());
    assert!("x".parse::<QRational>().is_err());
}

fn arb_qrational() -> impl Strategy<Value = QRational> {
    (
        (1i64..20, 1i64..20, any::<bool>()),
        prop::collection::btree_map(2u64..13, -3i64..4, 0..5),
    )
        .prop_map(|((n, d, neg), f)| {
            let mut x = QRational::from_scalar(if neg { -q(n, d) } else { q(n, d) });
            for (k, e) in f {
                x = x.mul(&QRational::qint_power(k, e));
            }
            x
        })
}

proptest! {
    #[test]
    fn qrational_laurent_round_trip(x in arb_qrational()) {
        let f = x.to_laurent();
        prop_assert_eq!(f.bar_symmetry(), Some(1));
        prop_assert_eq!(f.qrational_split().unwrap(), x.clone());
        prop_assert_eq!(f.eval_at(&Q::one()).unwrap(), x.value_at_one());
        prop_assert!(!x.value_at_one().is_zero());
    }

    #[test]
    fn qrational_display_round_trip(x in arb_qrational()) {
        let y: QRational = x.to_string().parse().unwrap();
        prop_assert_eq!(y, x);
    }

    #[test]
    fn qrational_group_laws(x in arb_qrational(), y in arb_qrational()) {
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&x.inv()), QRational::one());
        prop_assert_eq!(x.mul(&y).div(&y), x.clone());
        prop_assert_eq!(x.to_cyclo().mul(&y.to_cyclo()).to_qrational().unwrap(), x.mul(&y));
    }

    #[test]
    fn evaluation_matches_definition(x in arb_qrational(), i in 0usize..5) {
        let v = &sample_points()[i];
        let mut want = x.scalar.clone();
        for (&n, &e) in &x.factors {
            want *= pow(&qint_value(n as i64, v), e);
        }
        prop_assert_eq!(x.to_laurent().eval_at(v).unwrap(), want);
    }

    #[test]
    fn laurent_ring_laws(a in prop::collection::vec(-4i64..5, 1..5), b in prop::collection::vec(-4i64..5, 1..5), s in -3i64..4) {
        let mk = |c: &[i64], shift: i64| LaurentFunction::from_terms(
            &c.iter().enumerate().map(|(i, &x)| (i as i64 + shift, q(x, 1))).collect::<Vec<_>>());
        let f = mk(&a, s);
        let g = mk(&b, -s);
        prop_assert_eq!(f.mul(&g), g.mul(&f));
        prop_assert_eq!(f.add(&g).sub(&g), f.clone());
        prop_assert_eq!(f.bar_involution().bar_involution(), f.clone());
        for v in sample_points() {
            let lhs = f.mul(&g).eval_at(&v).unwrap();
            prop_assert_eq!(lhs, f.eval_at(&v).unwrap() * g.eval_at(&v).unwrap());
        }
        if !g.is_zero() {
            prop_assert_eq!(f.mul(&g).checked_div(&g).unwrap(), f.clone());
        }
    }
}
