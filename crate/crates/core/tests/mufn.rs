use hecke_core::laurent::Q;
use hecke_core::mufn::{
    canonical_point, generic_point, generic_residual_points, pole_order, residual_points, residue_degree,
    residue_qrational, weyl_equivalent, weyl_orbit,
};
use hecke_core::stm::base_for;
use hecke_core::tableaux::partitions;
use hecke_core::unipotent::classify_parameters;
use hecke_core::{ParamHeckeAlgebra, QRational};
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn alg(s: &str) -> ParamHeckeAlgebra {
    s.parse().unwrap()
}

/// Pairs of partitions of total size `r`.
fn bipartitions(r: u32) -> usize {
    (0..=r).map(|k| partitions(k).len() * partitions(r - k).len()).sum()
}

/// `[k]_{q^b}` in the variable `v`: `[kb] / [b]`.
fn qint_in_base(k: u64, b: u64) -> QRational {
    QRational::qint_power(k * b, 1).div(&QRational::qint_power(b, 1))
}

const ALGEBRAS: &[&str] = &[
    "A1[q]",
    "A2[q]",
    "A3[q^2]",
    "C1(1,2)[q]",
    "C2(0,0)[q]",
    "C2(1,1)[q]",
    "C2(1/2,1/2)[q]",
    "C2(1/2,3/2)[q]",
    "C3(1,2)[q]",
    "C3(1/4,3/4)[q^2]",
    "C3(0,1/2)[q^2]",
    "G2(1,1)[q]",
    "G2(3,1)[q]",
    "G2(1,3)[q]",
];

#[test]
fn residues_are_bar_symmetric_finite_and_nonzero() {
    for lit in ALGEBRAS {
        let h = alg(lit).specialized();
        let pts = residual_points(&h).unwrap();
        assert!(!pts.is_empty(), "{lit}");
        for p in &pts {
            assert_eq!(pole_order(&h, p).unwrap(), h.rank() as i64, "{lit} {p}");
            let f = residue_degree(&h, p).unwrap();
            assert_eq!(f.bar_symmetry(), Some(1), "{lit} {p}");
            let at_one = f.eval_at(&Q::one()).unwrap();
            assert!(!at_one.is_zero(), "{lit} {p}");
            let x = residue_qrational(&h, p).unwrap();
            assert_eq!(x.value_at_one(), at_one, "{lit} {p}");
            assert_eq!(x.to_laurent(), f);
        }
    }
}

#[test]
fn steinberg_residue_of_type_a() {
    for (n, b) in [(1u64, 1u32), (2, 1), (3, 1), (3, 2), (4, 2)] {
        let h = alg(&format!("A{n}[q^{b}]")).specialized();
        let pts = residual_points(&h).unwrap();
        assert_eq!(pts.len(), 1, "A{n}");
        let res = residue_qrational(&h, &pts[0]).unwrap();
        assert_eq!(res.q_factor(), qint_in_base(n + 1, b as u64).inv(), "A{n}[q^{b}]");
        assert_eq!(res.scalar.abs(), Q::one());
    }
}

#[test]
fn generic_points_of_type_c_are_bipartitions() {
    for (lit, r) in [("C1(1,2)[q]", 1), ("C2(1/2,3/2)[q]", 2), ("C3(1,2)[q]", 3), ("C3(1/4,3/4)[q^2]", 3), ("C4(1,3)[q]", 4)] {
        let h = alg(lit);
        let pts = generic_residual_points(&h).unwrap();
        assert_eq!(pts.len(), bipartitions(r), "{lit}");
        assert!(pts.iter().all(|p| p.generic), "{lit}");
        // Each one comes from a pair of partitions.
        for k in 0..=r {
            for pm in partitions(k) {
                for pp in partitions(r - k) {
                    let g = generic_point(&h, &pm, &pp).unwrap();
                    assert!(pts.iter().any(|p| weyl_equivalent(&h, p, &g)), "{lit}: {pm} {pp}");
                }
            }
        }
    }
}

#[test]
fn residual_point_counts() {
    for (lit, n) in [("C2(1/2,1/2)[q]", 3), ("C2(1,1)[q]", 3), ("C2(0,0)[q]", 2), ("G2(1,1)[q]", 4), ("G2(3,1)[q]", 4)] {
        assert_eq!(residual_points(&alg(lit)).unwrap().len(), n, "{lit}");
    }
    let h = alg("C2(1/2,1/2)[q]");
    let pts = residual_points(&h).unwrap();
    assert_eq!(pts.iter().filter(|p| p.is_positive_real()).count(), 1);
}

#[test]
fn orbits_divide_the_weyl_group() {
    for lit in ["C2(1/2,3/2)[q]", "C3(1,2)[q]", "G2(3,1)[q]", "A3[q]"] {
        let h = alg(lit).specialized();
        for p in residual_points(&h).unwrap() {
            let orbit = weyl_orbit(&h, &p);
            assert_eq!(h.roots.weyl_order % orbit.len() as u64, 0, "{lit} {p}");
            let c = canonical_point(&h, &p);
            for q in &orbit {
                assert_eq!(canonical_point(&h, q), c);
                // The residue is a Weyl invariant.
                assert_eq!(residue_qrational(&h, q).unwrap(), residue_qrational(&h, &p).unwrap());
            }
        }
    }
}

#[test]
fn rank_zero_and_bad_points() {
    let h = alg("C0(1,2)[q]");
    let pts = residual_points(&h).unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(residue_qrational(&h, &pts[0]).unwrap(), QRational::one());
    let c2 = alg("C2(1,1)[q]");
    assert!(residue_qrational(&c2, &pts[0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Residues of C1 to C3 over parameters in `Z/2` are bar-symmetric with a
    /// finite nonzero value at `v = 1`, and q-rational over the base of their class.
    #[test]
    fn c_type_residues_are_regular(r in 1usize..4, a in 0i64..6, b in 0i64..6, native in any::<bool>()) {
        let (mm, mp) = (Rational64::new(a, 2), Rational64::new(b, 2));
        let class = classify_parameters(mm, mp).unwrap().class;
        let base = if native { base_for(class) } else { 1 };
        let h = ParamHeckeAlgebra::c_type(r, mm, mp, base).unwrap().specialized();
        for p in residual_points(&h).unwrap() {
            let f = residue_degree(&h, &p).unwrap();
            prop_assert_eq!(f.bar_symmetry(), Some(1));
            prop_assert!(!f.eval_at(&Q::one()).unwrap().is_zero());
            if native {
                prop_assert_eq!(residue_qrational(&h, &p).unwrap().to_laurent(), f);
            }
        }
    }
}
