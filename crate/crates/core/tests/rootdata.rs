use hecke_core::rootdata::parse_param;
use hecke_core::{build_root_system, AlgebraLabel, CartanType, ParamHeckeAlgebra};
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn systems() -> Vec<(CartanType, usize, usize, u64)> {
    // (type, rank, #positive roots, |W|)
    vec![
        (CartanType::A, 1, 1, 2),
        (CartanType::A, 3, 6, 24),
        (CartanType::A, 5, 15, 720),
        (CartanType::B, 1, 1, 2),
        (CartanType::B, 2, 4, 8),
        (CartanType::B, 4, 16, 384),
        (CartanType::C, 3, 9, 48),
        (CartanType::D, 4, 12, 192),
        (CartanType::G2, 2, 6, 12),
        (CartanType::F4, 4, 24, 1152),
    ]
}

#[test]
fn root_counts_and_weyl_orders() {
    for (t, n, pos, w) in systems() {
        let rs = build_root_system(t, n).unwrap();
        assert_eq!(rs.positive.len(), pos, "{t}{n}");
        assert_eq!(rs.weyl_order, w, "{t}{n}");
        assert_eq!(rs.simple.len(), n);
        assert_eq!(rs.all_roots().len(), 2 * pos);
    }
    assert!(build_root_system(CartanType::G2, 3).is_err());
    assert!(build_root_system(CartanType::D, 1).is_err());
}

#[test]
fn roots_are_closed_under_simple_reflections() {
    for (t, n, _, _) in systems() {
        let rs = build_root_system(t, n).unwrap();
        let all = rs.all_roots();
        for i in 0..n {
            for a in &all {
                let b = rs.reflect(i, a);
                assert!(all.contains(&b), "{t}{n}: s_{i}({a:?}) = {b:?}");
                assert_eq!(rs.reflect(i, &b), *a);
                assert_eq!(rs.inner(&b, &b), rs.inner(a, a));
            }
        }
    }
}

#[test]
fn positive_roots_are_nonnegative_in_simple_roots() {
    for (t, n, _, _) in systems() {
        let rs = build_root_system(t, n).unwrap();
        for a in &rs.positive {
            let c = rs.simple_coefficients(a).unwrap();
            assert!(c.iter().all(|x| x.is_integer() && *x >= r(0, 1)), "{t}{n}: {a:?}");
            assert_eq!(rs.pairing(a, a), 2);
        }
    }
}

#[test]
fn long_and_short_roots() {
    let g2 = build_root_system(CartanType::G2, 2).unwrap();
    let long = g2.positive.iter().filter(|a| g2.is_long(a)).count();
    assert_eq!(long, 3);
    let b3 = build_root_system(CartanType::B, 3).unwrap();
    assert_eq!(b3.positive.iter().filter(|a| !b3.is_long(a)).count(), 3);
    let f4 = build_root_system(CartanType::F4, 4).unwrap();
    assert_eq!(f4.positive.iter().filter(|a| f4.is_long(a)).count(), 12);
}

#[test]
fn algebra_literals() {
    let h: ParamHeckeAlgebra = "C2(0.5,0.5)[q]".parse().unwrap();
    assert_eq!(h.label, AlgebraLabel::C { r: 2, m_minus: r(1, 2), m_plus: r(1, 2) });
    assert_eq!(h.base, 1);
    let h: ParamHeckeAlgebra = "C_3(1/4, 3/4)[q^2]".parse().unwrap();
    assert_eq!(h.name(), "C3(1/4,3/4)[q^2]");
    let h: ParamHeckeAlgebra = "G2(3,1)[q]".parse().unwrap();
    assert_eq!(h.label, AlgebraLabel::G2 { m_long: r(3, 1), m_short: r(1, 1) });
    let h: ParamHeckeAlgebra = "A3[q^3]".parse().unwrap();
    assert_eq!((h.rank(), h.base), (3, 3));
    for bad in ["", "C2", "C2(1)[q]", "X2(1,1)[q]", "C2(1,1)[p]", "C2(1,1)[q^0]", "G3(1,1)[q]"] {
        assert!(bad.parse::<ParamHeckeAlgebra>().is_err(), "{bad:?}");
    }
    assert_eq!(parse_param("0.75").unwrap(), r(3, 4));
    assert_eq!(parse_param("-5/2").unwrap(), r(-5, 2));
    assert_eq!(parse_param("0.3").unwrap(), r(3, 10));
    assert!(parse_param("abc").is_err());
}

#[test]
fn parameters_are_weyl_invariant() {
    for lit in ["C1(1,2)[q]", "C3(1/2,3/2)[q]", "C2(3/4,5/4)[q^2]", "A4[q]", "G2(3,1)[q]", "F4(2,1)[q]"] {
        let h: ParamHeckeAlgebra = lit.parse().unwrap();
        assert!(h.parameters_weyl_invariant(), "{lit}");
    }
}

#[test]
fn affine_diagrams() {
    for (lit, marks) in [
        ("C3(1,1)[q]", vec![1, 1, 2, 2]),
        ("A3[q]", vec![1, 1, 1, 1]),
        ("G2(1,1)[q]", vec![1, 2, 3]),
        ("F4(1,1)[q]", vec![1, 2, 2, 3, 4]),
    ] {
        let h: ParamHeckeAlgebra = lit.parse().unwrap();
        let d = h.spectral_diagram();
        assert_eq!(d.nodes.len(), h.rank() + 1, "{lit}");
        assert!(d.weighted_gradient_sum().iter().all(|&x| x == 0), "{lit}");
        let mut m = d.marks();
        m.sort();
        let mut want = marks.clone();
        want.sort();
        assert_eq!(m, want, "{lit}");
        assert!(d.automorphisms.iter().any(|p| p.iter().enumerate().all(|(i, &j)| i == j)));
    }
}

proptest! {
    #[test]
    fn reflections_preserve_the_form(i in 0usize..4, j in 0usize..4, x in prop::collection::vec(-3i64..4, 4), y in prop::collection::vec(-3i64..4, 4)) {
        for (t, n) in [(CartanType::B, 4), (CartanType::F4, 4), (CartanType::D, 4), (CartanType::A, 3)] {
            let rs = build_root_system(t, n).unwrap();
            let d = rs.dim();
            let (x, y) = (&x[..d], &y[..d]);
            let (i, j) = (i % n, j % n);
            prop_assert_eq!(rs.inner(&rs.reflect(i, x), &rs.reflect(i, y)), rs.inner(x, y));
            prop_assert_eq!(rs.reflect(i, &rs.reflect(i, x)), x.to_vec());
            // Reflection in a root equals the simple reflection for simple roots.
            let a = rs.simple[j].clone();
            prop_assert_eq!(rs.reflect_in(&a, x), rs.reflect(j, x));
        }
    }
}
