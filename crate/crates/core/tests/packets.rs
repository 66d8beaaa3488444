use hecke_core::mufn::generic_point;
use hecke_core::packets::{
    a_lambda, assemble_packets, c_lambda_f, closed_form_sweep, extra_closed, extra_image, fdeg_closed,
    fdeg_oracle_rational, hii_check, m_count, m_count_closed, predict, ClosedVariant, TwoGroupType,
};
use hecke_core::tableaux::{enumerate_distinguished, partitions, Flavor, Partition};
use hecke_core::unipotent::Family;
use hecke_core::{ParamHeckeAlgebra, QRational};
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn p(parts: &[u32]) -> Partition {
    Partition::new(parts.to_vec())
}

#[test]
fn pgl_packets() {
    for n in 1..=6u32 {
        let packets = assemble_packets(Family::Pgl, n).unwrap();
        assert_eq!(packets.len(), n as usize + 1, "PGL n = {n}");
        let want_q = QRational::qint_power(n as u64 + 1, -1);
        for pk in &packets {
            assert_eq!(pk.members.len(), n as usize + 1);
            for m in &pk.members {
                assert_eq!(m.fdeg_rational, r(1, n as i64 + 1));
                assert_eq!(m.fdeg_q, want_q);
            }
            assert!(hii_check(pk).unwrap().pass());
        }
    }
}

#[test]
fn hii_holds_for_small_groups() {
    for (family, ns) in [
        (Family::Pcsp, 2..=4),
        (Family::SoOdd, 1..=4),
        (Family::PcoPlus, 4..=4),
        (Family::PcoStar, 4..=4),
        (Family::PuEven, 1..=3),
        (Family::PuOdd, 1..=3),
        (Family::G2Split, 0..=0),
        (Family::ThreeD4, 0..=0),
    ] {
        for n in ns {
            let packets = assemble_packets(family, n).unwrap();
            assert!(!packets.is_empty(), "{family} {n}");
            for pk in &packets {
                let rep = hii_check(pk).unwrap();
                assert!(rep.pass(), "{family} {n} {}: {rep:?}", pk.key);
                assert!(rep.q_uniform);
            }
        }
    }
}

#[test]
fn perturbed_degrees_fail() {
    for family in [Family::Pcsp, Family::SoOdd, Family::Pgl] {
        let packets = assemble_packets(family, 3).unwrap();
        let mut pk = packets.into_iter().next().unwrap();
        pk.members[0].fdeg_rational *= r(2, 1);
        let rep = hii_check(&pk).unwrap();
        assert!(!rep.pass(), "{family}");
        assert!(!rep.members[0].pass);
        // Dropping a member breaks the count.
        let mut pk = assemble_packets(family, 3).unwrap().into_iter().next().unwrap();
        pk.members.pop();
        if predict(&pk).unwrap().counts {
            assert!(!hii_check(&pk).unwrap().pass(), "{family}");
        }
    }
}

#[test]
fn exceptional_packets() {
    let sorted = |v: Vec<Rational64>| {
        let mut v = v;
        v.sort();
        v
    };
    let d4 = assemble_packets(Family::ThreeD4, 0).unwrap();
    let by_tag = |tag: &str| {
        let pk = d4.iter().find(|pk| pk.key.tag.as_deref() == Some(tag)).unwrap();
        sorted(pk.members.iter().map(|m| m.fdeg_rational).collect())
    };
    assert_eq!(by_tag("lambda_sub"), vec![r(1, 2), r(1, 2), r(1, 1)]);
    assert_eq!(by_tag("theta_s1"), vec![r(1, 2), r(1, 2)]);
    assert_eq!(by_tag("theta_s2"), vec![r(1, 1)]);
    let g2 = assemble_packets(Family::G2Split, 0).unwrap();
    let sub = g2.iter().find(|pk| pk.key.tag.as_deref() == Some("subregular")).unwrap();
    let mut got: Vec<Rational64> = sub.members.iter().map(|m| m.fdeg_rational).collect();
    got.sort();
    assert_eq!(got, vec![r(1, 6), r(1, 6), r(1, 3)]);
}

#[test]
fn closed_forms_agree_with_residues() {
    let cases = closed_form_sweep(9, r(3, 1)).unwrap();
    assert!(cases.len() > 100, "{}", cases.len());
    for c in &cases {
        assert!(c.agrees(), "{c:?}");
    }
}

#[test]
fn closed_form_examples() {
    // 2^{m_+ - #(u_- cup u_+)} and 2^{m_+ - 1/2 - #(u_- cup u_+)}.
    assert_eq!(fdeg_closed(&Partition::empty(), &p(&[1, 3]), r(0, 1), r(2, 1), ClosedVariant::IIIIV).unwrap(), r(1, 1));
    assert_eq!(fdeg_closed(&p(&[1]), &p(&[1, 3, 5]), r(1, 1), r(3, 1), ClosedVariant::IIIIV).unwrap(), r(1, 1));
    assert_eq!(fdeg_closed(&p(&[2]), &p(&[2, 4]), r(1, 2), r(5, 2), ClosedVariant::II).unwrap(), r(1, 1));
    assert!(fdeg_closed(&p(&[3, 3]), &p(&[1]), r(1, 1), r(1, 1), ClosedVariant::IIIIV).is_err());
    assert!(fdeg_closed(&p(&[1]), &p(&[1]), r(1, 4), r(3, 4), ClosedVariant::Extra).is_err());
}

/// `M` counted from the multiplicity tables against `m_+ - #(u_- cup u_+)`.
#[test]
fn m_counts() {
    let mut checked = 0;
    for mp in 0..=3i64 {
        for mm in 0..=mp {
            for a in 0..=12 {
                for b in 0..=12 {
                    for um in enumerate_distinguished(a, Flavor::Odd, 0) {
                        if hecke_core::tableaux::rank_of(&um, r(mm, 1)).is_none() {
                            continue;
                        }
                        for up in enumerate_distinguished(b, Flavor::Odd, 0) {
                            if hecke_core::tableaux::rank_of(&up, r(mp, 1)).is_none() {
                                continue;
                            }
                            let direct = m_count(&um, &up, r(mm, 1), r(mp, 1)).unwrap();
                            assert_eq!(direct, m_count_closed(&um, &up, r(mp, 1)), "{um} {up} ({mm}, {mp})");
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 50, "{checked}");
}

/// The closed form for parameters in `1/4 + Z/2` against the residue of the
/// base `q^2` algebra, `r <= 2`, `kappa <= 2`.
#[test]
fn extraspecial_closed_form() {
    let grid: Vec<Rational64> = [1, 3, 5, 7, 9].iter().map(|&k| r(k, 4)).collect();
    let mut checked = 0;
    for rank in 0..=2u32 {
        for &mm in &grid {
            for &mp in &grid {
                let h = ParamHeckeAlgebra::c_type(rank as usize, mm, mp, 2).unwrap();
                for k in 0..=rank {
                    for pm in partitions(k) {
                        for pp in partitions(rank - k) {
                            let point = generic_point(&h, &pm, &pp).unwrap();
                            let oracle = fdeg_oracle_rational(&h, &point).unwrap();
                            let closed = extra_closed(mm, mp, &pm, &pp).unwrap();
                            assert_eq!(closed, oracle, "({mm}, {mp}) {pm} {pp}");
                            let img = extra_image(mm, mp, &pm, &pp).unwrap();
                            assert_eq!(img.image.coords.len(), img.target.rank());
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(checked, 25 * (1 + 2 + 5));
}

#[test]
fn component_groups() {
    assert_eq!(c_lambda_f(&p(&[1, 3]), &p(&[1, 5])), 2);
    assert_eq!(c_lambda_f(&p(&[1, 3]), &p(&[1, 3])), 4);
    let so = a_lambda(&p(&[2]), &p(&[2, 4]), Family::SoOdd).unwrap();
    assert_eq!((so.a, so.b), (0, 3));
    for family in [Family::Pcsp, Family::SoOdd, Family::PcoPlus] {
        for pk in assemble_packets(family, 4).unwrap() {
            let g = a_lambda(&pk.key.u_minus, &pk.key.u_plus, family).unwrap();
            assert!(g.b >= 1, "{family} {}", pk.key);
            assert!(g.order().is_power_of_two());
        }
    }
}

proptest! {
    /// Irreducibles of `2^{(2a)+b}`: dimensions squared sum to the order.
    #[test]
    fn two_group_characters(a in 0u32..4, b in 1u32..5) {
        let g = TwoGroupType { a, b };
        let total: u64 = g.irreps().iter().map(|(d, k)| d * d * k).sum();
        prop_assert_eq!(total, g.order());
    }
}
