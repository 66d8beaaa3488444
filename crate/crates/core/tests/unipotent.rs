use hecke_core::laurent::{q_int, Q};
use hecke_core::mufn::{residue_qrational, ResidualPoint};
use hecke_core::stm::{extraspecial_stm, to_minimal_stm};
use hecke_core::unipotent::{
    classify_parameters, cuspidal_d, cuspidal_d_bounded, d_product_qfactor, enumerate_cuspidal_types,
    exceptional_cuspidals, group_order_volume, minimal_tau, normalization, unipotent_degree, DFlavor, Family,
    InnerForm, ParamClass, QuotientType, TypeLabel,
};
use hecke_core::{AlgebraLabel, HeckeError, LaurentFunction, QRational};
use num_rational::Rational64;
use num_traits::{One, Signed};

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn pow(x: &Q, e: i64) -> Q {
    let mut acc = Q::one();
    for _ in 0..e.abs() {
        acc *= x;
    }
    if e < 0 {
        Q::one() / acc
    } else {
        acc
    }
}

fn quarter_grid() -> Vec<Rational64> {
    [1, 3, 5, 7, 9].iter().map(|&k| r(k, 4)).collect()
}

#[test]
fn parameter_classes() {
    use ParamClass::*;
    for (mm, mp, class) in [
        (r(0, 1), r(1, 2), I),
        (r(0, 1), r(1, 1), III),
        (r(1, 2), r(1, 2), II),
        (r(1, 2), r(3, 2), II),
        (r(1, 1), r(3, 1), IV),
        (r(0, 1), r(0, 1), IV),
        (r(1, 4), r(3, 4), V),
        (r(3, 4), r(5, 4), VI),
        (r(-3, 4), r(5, 4), VI),
    ] {
        assert_eq!(classify_parameters(mm, mp).unwrap().class, class, "({mm}, {mp})");
    }
    let c = classify_parameters(r(1, 1), r(3, 1)).unwrap();
    assert_eq!((c.a, c.b), (1, 2));
    assert!(matches!(classify_parameters(r(1, 3), r(1, 1)), Err(HeckeError::Domain(_))));
    assert!(classify_parameters(r(1, 4), r(1, 2)).is_err());
}

#[test]
fn normalization_examples() {
    assert_eq!(normalization(r(0, 1), r(1, 1)).unwrap(), QRational::one());
    assert_eq!(normalization(r(1, 2), r(1, 2)).unwrap(), QRational::one());
    let want = cuspidal_d(DFlavor::D, 1).unwrap().mul(&cuspidal_d(DFlavor::D, 2).unwrap());
    assert_eq!(normalization(r(1, 1), r(3, 1)).unwrap(), want);
    for f in [DFlavor::B, DFlavor::D, DFlavor::TwoA] {
        assert_eq!(cuspidal_d(f, 0).unwrap(), QRational::one());
        assert!(matches!(cuspidal_d_bounded(f, 4, 3), Err(HeckeError::Capability(_))));
        for s in 1..=4 {
            let d = cuspidal_d(f, s).unwrap();
            assert_eq!(d.scalar, Q::one());
            assert_eq!(d.to_laurent().bar_symmetry(), Some(1));
        }
    }
    assert_eq!(minimal_tau(r(1, 1), r(1, 1)), QRational::qint_power(2, -1));
    assert_eq!(minimal_tau(r(1, 2), r(1, 1)), QRational::qint_power(2, -1));
    assert_eq!(minimal_tau(r(0, 1), r(1, 1)), QRational::one());
}

/// The closed product for parameters in `1/4 + Z/2` against the normalization
/// built from cuspidal blocks and against the residue at the image of the
/// rank zero extraspecial morphism.
#[test]
fn extraspecial_product_matches_normalization() {
    for mm in quarter_grid() {
        for mp in quarter_grid() {
            let closed = d_product_qfactor(mm, mp).unwrap();
            assert_eq!(normalization(mm, mp).unwrap(), closed, "({mm}, {mp})");
            let phi = extraspecial_stm(0, mm, mp).unwrap();
            let p = phi.map_point(&ResidualPoint::empty()).unwrap();
            let res = residue_qrational(&phi.target.specialized(), &p).unwrap();
            assert_eq!(res.q_factor(), closed, "({mm}, {mp})");
        }
    }
}

/// For rank zero sources the normalization is the q-factor of the residue at
/// the image point in the minimal object.
#[test]
fn normalization_matches_image_residues() {
    for a in 0..=8 {
        for b in 0..=8 {
            let (mm, mp) = (r(a, 2), r(b, 2));
            let phi = to_minimal_stm(0, mm, mp).unwrap();
            let AlgebraLabel::C { m_minus: tm, m_plus: tp, .. } = phi.target.label else { panic!() };
            let p = phi.map_point(&ResidualPoint::empty()).unwrap();
            let target = phi.target.specialized().with_tau(minimal_tau(tm, tp));
            let res = residue_qrational(&target, &p).unwrap();
            assert_eq!(res.q_factor(), normalization(mm, mp).unwrap(), "({mm}, {mp})");
        }
    }
}

/// `v^{-dim} |G(F_q)|` from `q^N prod (q^d - e)` at `v = 2, 3`.
#[test]
fn group_volumes() {
    let cases: Vec<(QuotientType, i64, Vec<(i64, i64)>)> = vec![
        (QuotientType::A(2), 3, vec![(2, 1), (3, 1)]),
        (QuotientType::TwoA(2), 3, vec![(2, 1), (3, -1)]),
        (QuotientType::B(2), 4, vec![(2, 1), (4, 1)]),
        (QuotientType::C(3), 9, vec![(2, 1), (4, 1), (6, 1)]),
        (QuotientType::D(4), 12, vec![(2, 1), (4, 1), (6, 1), (4, 1)]),
        (QuotientType::TwoD(4), 12, vec![(2, 1), (4, 1), (6, 1), (4, -1)]),
        (QuotientType::G2, 6, vec![(2, 1), (6, 1)]),
        (QuotientType::F4, 24, vec![(2, 1), (6, 1), (8, 1), (12, 1)]),
    ];
    for v in [q(2), q(3)] {
        let qq = &v * &v;
        for (t, big_n, ds) in &cases {
            let rank = ds.len() as i64;
            let mut order = pow(&qq, *big_n);
            for &(d, e) in ds {
                order *= pow(&qq, d) - q(e);
            }
            let want = order * pow(&v, -(2 * big_n + rank));
            assert_eq!(group_order_volume(*t).unwrap().eval_at(&v).unwrap(), want, "{t:?}");
        }
        // 3D4: q^12 (q^8 + q^4 + 1)(q^6 - 1)(q^2 - 1), dimension 28.
        let order = pow(&qq, 12) * (pow(&qq, 8) + pow(&qq, 4) + q(1)) * (pow(&qq, 6) - q(1)) * (pow(&qq, 2) - q(1));
        let want = order * pow(&v, -28);
        assert_eq!(group_order_volume(QuotientType::ThreeD4).unwrap().eval_at(&v).unwrap(), want);
    }
    let torus = group_order_volume(QuotientType::SplitTorus(1)).unwrap();
    assert_eq!(torus, LaurentFunction::from_terms(&[(1, q(1)), (-1, q(-1))]));
    let aniso = group_order_volume(QuotientType::NormOneTorus(3)).unwrap();
    assert_eq!(aniso.qrational_split().unwrap(), QRational::qint_power(3, 1));
    let div = group_order_volume(QuotientType::DivisionAlgebraUnits(3)).unwrap();
    assert_eq!(div.qrational_split().unwrap(), QRational::from_scalar(q(3)).mul(&QRational::qint_power(3, 1)));
}

#[test]
fn cuspidal_unipotent_degrees() {
    // G2[1] = q Phi_1^2 Phi_6 / 6 and 3D4[1] = q^3 Phi_1^2 Phi_12 / 2 at q = 4.
    let v = q(2);
    let g2 = &exceptional_cuspidals(Family::G2Split)[0];
    assert_eq!(g2.0, "G2[1]");
    let deg = unipotent_degree(g2.1, g2.2, &g2.3).eval_at(&v).unwrap();
    assert_eq!(deg, Q::new(4.into(), 6.into()) * q(9) * q(13));
    let d4 = &exceptional_cuspidals(Family::ThreeD4)[0];
    let deg = unipotent_degree(d4.1, d4.2, &d4.3).eval_at(&v).unwrap();
    assert_eq!(deg, Q::new(64.into(), 2.into()) * q(9) * q(256 - 16 + 1));
    assert_eq!(exceptional_cuspidals(Family::ThreeD4).len(), 2);
    assert!(exceptional_cuspidals(Family::Pcsp).is_empty());
}

#[test]
fn pcsp_examples() {
    let split = enumerate_cuspidal_types(Family::Pcsp, 2, InnerForm::E).unwrap();
    assert_eq!(split.len(), 2);
    let t0 = split.iter().find(|t| t.label == TypeLabel::Pair { a: 0, b: 0 }).unwrap();
    assert_eq!(t0.algebra, AlgebraLabel::C { r: 2, m_minus: r(0, 1), m_plus: r(1, 1) });
    assert_eq!(t0.tau_q, r(1, 1));
    let t1 = split.iter().find(|t| t.label == TypeLabel::Pair { a: 0, b: 1 }).unwrap();
    assert_eq!(t1.rank(), 0);
    assert_eq!(t1.params(), Some((r(1, 1), r(2, 1))));
    assert_eq!(t1.tau_q, r(1, 2));
    let eta = enumerate_cuspidal_types(Family::Pcsp, 2, InnerForm::Eta).unwrap();
    assert_eq!(eta.len(), 1);
    assert_eq!(eta[0].algebra, AlgebraLabel::C { r: 1, m_minus: r(1, 4), m_plus: r(3, 4) });
    assert_eq!(eta[0].base, 2);
    assert_eq!(eta[0].tau_q, r(1, 2));
}

#[test]
fn pgl_division_algebra_type() {
    // An inner form of PGL_5 given by a division algebra of degree 5.
    let ts = enumerate_cuspidal_types(Family::Pgl, 4, InnerForm::Cyclic(1)).unwrap();
    assert_eq!(ts.len(), 1);
    assert_eq!(ts[0].rank(), 0);
    assert_eq!(ts[0].tau, QRational::from_scalar(Q::new(1.into(), 5.into())).mul(&QRational::qint_power(5, -1)));
    let split = enumerate_cuspidal_types(Family::Pgl, 4, InnerForm::E).unwrap();
    assert_eq!(split[0].algebra, AlgebraLabel::A { n: 4 });
}

#[test]
fn type_tables_are_consistent() {
    let two = |e: Rational64| {
        assert!(e.is_integer());
        let k = e.to_integer();
        if k >= 0 {
            r(1 << k, 1)
        } else {
            r(1, 1 << -k)
        }
    };
    for family in [Family::Pcsp, Family::SoOdd, Family::PcoPlus, Family::PcoStar, Family::PuEven, Family::PuOdd] {
        for n in family.min_rank()..=6 {
            for form in family.inner_forms(n) {
                for t in enumerate_cuspidal_types(family, n, form).unwrap() {
                    let (mm, mp) = t.params().unwrap();
                    let class = classify_parameters(mm, mp).unwrap().class;
                    let allowed: &[ParamClass] = match family {
                        Family::PuEven | Family::PuOdd => &[ParamClass::I],
                        Family::SoOdd => &[ParamClass::II],
                        Family::Pcsp => &[ParamClass::III, ParamClass::V],
                        _ => &[ParamClass::IV, ParamClass::VI],
                    };
                    assert!(allowed.contains(&class), "{family} {n} {form}: ({mm}, {mp}) is {class}");
                    assert_eq!(t.hecke().unwrap().rank(), t.rank());
                    match (family, form, &t.label) {
                        (Family::Pcsp, InnerForm::E, TypeLabel::Pair { a, b }) => {
                            let e = -r((a + b) as i64, 1) - if a == b && t.rank() == 0 { r(1, 1) } else { r(0, 1) };
                            assert_eq!(t.tau_q, two(e), "{family} {n} {}", t.label);
                        }
                        (Family::SoOdd, _, _) => {
                            assert_eq!(t.tau_q, two(r(1, 2) - mp.abs()), "{family} {n} {form} {}", t.label);
                        }
                        _ => {}
                    }
                    assert!(t.tau_q > r(0, 1));
                    assert_eq!(t.tau.to_laurent().bar_symmetry(), Some(1));
                }
            }
        }
    }
    assert!(matches!(enumerate_cuspidal_types(Family::Pcsp, 1, InnerForm::E), Err(HeckeError::Capability(_))));
    assert!(enumerate_cuspidal_types(Family::Pcsp, 3, InnerForm::Rho).is_err());
}

#[test]
fn family_and_form_names() {
    for f in Family::ALL {
        assert_eq!(f.name().parse::<Family>().unwrap(), f);
        for form in f.inner_forms(f.min_rank().max(4)) {
            assert_eq!(form.to_string().parse::<InnerForm>().unwrap(), form);
        }
    }
    assert!("pgx".parse::<Family>().is_err());
    assert!("zeta".parse::<InnerForm>().is_err());
    assert_eq!(q_int(1), Q::one());
}
