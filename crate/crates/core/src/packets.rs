//! Formal degrees of unipotent discrete series, component groups and the
//! assembly of packets across inner forms.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HeckeError, Result};
use crate::laurent::{q_to_r64, CycloProduct, QRational};
use crate::mufn::{generic_point, residue_cyclo, ResidualPoint};
use crate::rootdata::{Affine, AlgebraLabel, ParamHeckeAlgebra};
use crate::stm::{extraspecial_raw, kappa_eps};
use crate::tableaux::{h_multiplicity, jumps, m_tableau_contents, partitions, unipotent_from_jumps, unipotent_of, Partition};
use crate::unipotent::{classify_parameters, fmt_rat, enumerate_cuspidal_types, Family, InnerForm, ParamClass, TypeLabel, UnipotentType};

// ---------------------------------------------------------------------------
// Component groups

/// A 2-group of type `2^{(2a)+b}`: order `2^{2a+b}`, centre of order `2^b`.
/// For `a > 0` it has `2^{2a+b-1}` characters trivial on the commutator and
/// `2^{b-1}` irreducibles of dimension `2^a`; for `a = 0` it is abelian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoGroupType {
    pub a: u32,
    pub b: u32,
}

impl TwoGroupType {
    pub fn order(&self) -> u64 {
        1 << (2 * self.a + self.b)
    }

    pub fn num_onedim(&self) -> u64 {
        if self.a == 0 {
            1 << self.b
        } else {
            1 << (2 * self.a + self.b - 1)
        }
    }

    /// Irreducibles of dimension `2^a`, for `a > 0`.
    pub fn num_higher(&self) -> u64 {
        if self.a == 0 {
            0
        } else {
            1 << (self.b - 1)
        }
    }

    pub fn higher_dim(&self) -> u64 {
        1 << self.a
    }

    /// `(dimension, count)` over all irreducibles.
    pub fn irreps(&self) -> Vec<(u64, u64)> {
        let mut out = vec![(1, self.num_onedim())];
        if self.a > 0 {
            out.push((self.higher_dim(), self.num_higher()));
        }
        out
    }
}

impl fmt::Display for TwoGroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^{{({})+{}}}", 2 * self.a, self.b)
    }
}

/// The component group `A_lambda` for the pair `(u_-, u_+)`.
///
/// For the symplectic and orthogonal similitude families it is a 2-group of
/// type `2^{(2a)+b}` read off from the lengths `l_-`, `l_+`; for `SO_{2n+1}` it
/// is elementary abelian of rank `l_- + l_+`.
pub fn a_lambda(u_minus: &Partition, u_plus: &Partition, family: Family) -> Result<TwoGroupType> {
    let (lm, lp) = (u_minus.len() as u32, u_plus.len() as u32);
    check_family_shape(u_minus, u_plus, family)?;
    let t = match family {
        Family::SoOdd => TwoGroupType { a: 0, b: lm + lp },
        Family::Pcsp | Family::PcoPlus | Family::PcoStar => {
            if lm == 0 || lp == 0 {
                let l = lm + lp;
                if l == 0 {
                    return Err(HeckeError::Domain("empty unipotent pair".into()));
                }
                if l % 2 == 1 {
                    TwoGroupType { a: (l - 1) / 2, b: 1 }
                } else {
                    TwoGroupType { a: (l - 2) / 2, b: 2 }
                }
            } else {
                let l = lm + lp;
                match (lm % 2, lp % 2) {
                    (0, 0) => TwoGroupType { a: (l - 4) / 2, b: 3 },
                    (1, 1) => TwoGroupType { a: (l - 2) / 2, b: 1 },
                    _ => TwoGroupType { a: (l - 3) / 2, b: 2 },
                }
            }
        }
        _ => return Err(HeckeError::Capability(format!("A_lambda as a 2-group is not modeled for {family}"))),
    };
    Ok(t)
}

fn check_family_shape(u_minus: &Partition, u_plus: &Partition, family: Family) -> Result<()> {
    let all_odd = |u: &Partition| u.parts().iter().all(|p| p % 2 == 1);
    let all_even = |u: &Partition| u.parts().iter().all(|p| p % 2 == 0);
    let distinct = |u: &Partition| u.distinct_count() == u.len();
    if !distinct(u_minus) || !distinct(u_plus) {
        return Err(HeckeError::Domain(format!("({u_minus}, {u_plus}) has repeated parts")));
    }
    let ok = match family {
        Family::Pcsp => all_odd(u_minus) && all_odd(u_plus) && u_minus.len() % 2 == 0 && u_plus.len() % 2 == 1,
        Family::PcoPlus | Family::PcoStar => all_odd(u_minus) && all_odd(u_plus),
        Family::SoOdd => all_even(u_minus) && all_even(u_plus),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(HeckeError::Domain(format!("({u_minus}, {u_plus}) violates the {family} constraints")))
    }
}

/// `|C_lambda^F| = 2^{#(u_- cap u_+)}`.
pub fn c_lambda_f(u_minus: &Partition, u_plus: &Partition) -> u64 {
    1 << u_minus.common_parts(u_plus)
}

// ---------------------------------------------------------------------------
// Formal degrees

/// The formal degree of the discrete series at `point` of the algebra with
/// `tau(1) = 1`: the regularized residue split into its absolute rational
/// constant and q-rational factor.
pub fn fdeg_oracle(h: &ParamHeckeAlgebra, point: &ResidualPoint) -> Result<QRational> {
    let h = h.clone().with_tau(QRational::one());
    Ok(residue_cyclo(&h, point)?.to_qrational()?.abs())
}

/// Rational part of [`fdeg_oracle`].
pub fn fdeg_oracle_rational(h: &ParamHeckeAlgebra, point: &ResidualPoint) -> Result<Rational64> {
    let q = fdeg_oracle(h, point)?;
    q_to_r64(&q.scalar).ok_or_else(|| HeckeError::Domain(format!("constant {} out of range", q.scalar)))
}

/// Which closed form to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedVariant {
    /// Integral parameters.
    IIIIV,
    /// Half-integral parameters, both nonzero.
    II,
    /// Parameters in `1/4 + Z/2`, data from the extraspecial image.
    Extra,
}

fn pow2(e: i64) -> Rational64 {
    if e >= 0 {
        Rational64::from_integer(1 << e)
    } else {
        Rational64::new(1, 1 << (-e))
    }
}

fn union_count(u_minus: &Partition, u_plus: &Partition) -> i64 {
    u_minus.union(u_plus).distinct_count() as i64
}

/// Closed form for the rational part of the formal degree of a discrete series
/// of `C(m_-, m_+)` with `tau(1) = 1`, for the classes with integral or
/// half-integral parameters.
pub fn fdeg_closed(u_minus: &Partition, u_plus: &Partition, m_minus: Rational64, m_plus: Rational64, variant: ClosedVariant) -> Result<Rational64> {
    // The formula is symmetric once the larger parameter is called m_+.
    let (u_minus, u_plus) = if m_minus.abs() <= m_plus.abs() { (u_minus, u_plus) } else { (u_plus, u_minus) };
    let (mm, mp) = ordered(m_minus, m_plus);
    let size_ok = |u: &Partition, m: Rational64| crate::tableaux::rank_of(u, m).is_some();
    if !size_ok(u_minus, mm) || !size_ok(u_plus, mp) {
        return Err(HeckeError::Domain(format!("({u_minus}, {u_plus}) not distinguished for ({mm}, {mp})")));
    }
    let u = union_count(u_minus, u_plus);
    match variant {
        ClosedVariant::IIIIV => {
            if !mm.is_integer() || !mp.is_integer() {
                return Err(HeckeError::Domain(format!("({mm}, {mp}) is not integral")));
            }
            Ok(pow2(mp.to_integer() - u))
        }
        ClosedVariant::II => {
            let e = mp - Rational64::new(1, 2);
            if !e.is_integer() || !(mm - Rational64::new(1, 2)).is_integer() || mm.is_zero() {
                return Err(HeckeError::Domain(format!("({mm}, {mp}) is not in (1/2 + Z)^2")));
            }
            Ok(pow2(e.to_integer() - u))
        }
        ClosedVariant::Extra => Err(HeckeError::Domain("use extra_closed for parameters in 1/4 + Z/2".into())),
    }
}

fn ordered(a: Rational64, b: Rational64) -> (Rational64, Rational64) {
    let (a, b) = (a.abs(), b.abs());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The integer `M` counted directly from the multiplicity tables:
/// `sum_x dH_-(x) dH_+(x) - H_-(m_+) - H_+(m_-)` for integral `0 <= m_- <= m_+`.
pub fn m_count(u_minus: &Partition, u_plus: &Partition, m_minus: Rational64, m_plus: Rational64) -> Result<i64> {
    let tm = h_multiplicity(u_minus, m_minus)?;
    let tp = h_multiplicity(u_plus, m_plus)?;
    let dh = |t: &crate::tableaux::MultiplicityTable, x: i64| {
        t.big_h(Rational64::from_integer(x)) - t.big_h(Rational64::from_integer(x + 1))
    };
    let top = u_minus.parts().iter().chain(u_plus.parts()).copied().max().unwrap_or(0) as i64 + m_plus.to_integer() + 2;
    let sum: i64 = (0..=top).map(|x| dh(&tm, x) * dh(&tp, x)).sum();
    Ok(sum - tm.big_h(m_plus) - tp.big_h(m_minus))
}

/// `M = m_+ - #(u_- cup u_+)`.
pub fn m_count_closed(u_minus: &Partition, u_plus: &Partition, m_plus: Rational64) -> i64 {
    m_plus.to_integer() - union_count(u_minus, u_plus)
}

/// The pair `(u_-, u_+)` attached to a point of `C_L(delta_-, delta_+)[q]`
/// whose coordinates are `-q^{x}` (minus side) and `q^{x}` (plus side).
pub fn unipotent_pair_of_point(p: &ResidualPoint, delta_minus: Rational64, delta_plus: Rational64) -> Result<(Partition, Partition)> {
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for c in &p.coords {
        let x = (c.exp.c / Rational64::from_integer(2)).abs();
        if c.angle == Rational64::new(1, 2) {
            minus.push(x);
        } else if c.angle.is_zero() {
            plus.push(x);
        } else {
            return Err(HeckeError::Domain(format!("coordinate {c:?} is not real")));
        }
    }
    Ok((
        unipotent_from_jumps(&jumps(&minus, delta_minus)?),
        unipotent_from_jumps(&jumps(&plus, delta_plus)?),
    ))
}

/// Data of a discrete series of `C_r(m_-, m_+)[q^2]`, `m_pm` in `1/4 + Z/2`,
/// read off from the extraspecial image of its central character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraImage {
    pub u_minus: Partition,
    pub u_plus: Partition,
    pub image: ResidualPoint,
    pub target: ParamHeckeAlgebra,
}

pub fn extra_image(m_minus: Rational64, m_plus: Rational64, pi_minus: &Partition, pi_plus: &Partition) -> Result<ExtraImage> {
    let r = (pi_minus.size() + pi_plus.size()) as usize;
    let phi = extraspecial_raw(r, m_minus, m_plus)?;
    let p = generic_point(&phi.source, pi_minus, pi_plus)?;
    let image = phi.map_point(&p)?;
    let AlgebraLabel::C { m_minus: dm, m_plus: dp, .. } = phi.target.label else {
        unreachable!("extraspecial targets are of type C")
    };
    let (u_minus, u_plus) = unipotent_pair_of_point(&image.specialize(), dm, dp)?;
    Ok(ExtraImage { u_minus, u_plus, image, target: phi.target })
}

/// Closed form for the rational part of the formal degree of the discrete
/// series `(pi_-, pi_+)` of `C_r(m_-, m_+)[q^2]` with `tau(1) = 1`, `m_pm` in
/// `1/4 + Z/2`.
pub fn extra_closed(m_minus: Rational64, m_plus: Rational64, pi_minus: &Partition, pi_plus: &Partition) -> Result<Rational64> {
    let (km, em) = kappa_eps(m_minus)?;
    let (kp, ep) = kappa_eps(m_plus)?;
    let img = extra_image(m_minus, m_plus, pi_minus, pi_plus)?;
    let quarter = Rational64::new(1, 4);
    let h = |pi: &Partition, m: Rational64| m_tableau_contents(pi, m).iter().filter(|&&c| c == quarter).count() as i64;
    let mut e = img.u_minus.common_parts(&img.u_plus) as i64 - h(pi_minus, m_minus) - h(pi_plus, m_plus);
    // The correction belongs to the smaller parameter.
    if em == ep {
        e -= km.min(kp);
    }
    Ok(pow2(e))
}

// ---------------------------------------------------------------------------
// Packets

/// How a member arises from its type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parameterization {
    /// Generic residual point of the pair of partitions; `copy` distinguishes
    /// the lifts to the group.
    Symbols { pi_minus: Partition, pi_plus: Partition, copy: u32 },
    /// Discrete series of a class V or VI algebra, via the extraspecial morphism.
    Extraspecial { pi_minus: Partition, pi_plus: Partition, copy: u32 },
    /// A cuspidal unipotent representation.
    Cuspidal { copy: u32 },
    /// The Steinberg-type point of a type A algebra, twisted by `zeta`.
    Steinberg { zeta: u32 },
    /// A named discrete series of an exceptional algebra.
    Named(String),
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameterization::Symbols { pi_minus, pi_plus, copy } => write!(f, "symbols{pi_minus}{pi_plus}#{copy}"),
            Parameterization::Extraspecial { pi_minus, pi_plus, copy } => write!(f, "extra{pi_minus}{pi_plus}#{copy}"),
            Parameterization::Cuspidal { copy } => write!(f, "cuspidal#{copy}"),
            Parameterization::Steinberg { zeta } => write!(f, "steinberg(zeta={zeta})"),
            Parameterization::Named(s) => f.write_str(s),
        }
    }
}

/// Packet key: the pair `(u_-, u_+)`, plus a tag where that pair alone does
/// not separate packets (central twists in type A, exceptional orbits).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PacketKey {
    pub u_minus: Partition,
    pub u_plus: Partition,
    pub tag: Option<String>,
}

impl fmt::Display for PacketKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u_minus, self.u_plus)?;
        if let Some(t) = &self.tag {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub inner_form: InnerForm,
    pub label: TypeLabel,
    pub parameterization: Parameterization,
    /// Absolute value of the rational constant of the formal degree.
    pub fdeg_rational: Rational64,
    /// q-rational factor of the formal degree.
    pub fdeg_q: QRational,
    /// The full formal degree as a function of `v`, balanced.
    pub fdeg: CycloProduct,
    /// Central character of `A_lambda` forced by the inner form.
    pub central: InnerForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub family: Family,
    pub n: u32,
    /// Representative of the orbit of keys under twisting by `^LZ`.
    pub key: PacketKey,
    /// Number of Langlands parameters in that orbit; the members of all of
    /// them are gathered here.
    pub lifts: u32,
    pub members: Vec<Member>,
}

impl Packet {
    /// The common q-factor, if all members agree.
    pub fn q_factor(&self) -> Option<QRational> {
        let first = self.members.first()?.fdeg_q.clone();
        self.members.iter().all(|m| m.fdeg_q == first).then_some(first)
    }
}

fn scale_cyclo(c: &CycloProduct, s: Rational64) -> CycloProduct {
    let mut out = c.clone();
    out.scalar *= crate::laurent::r64_to_q(s);
    out
}

fn member_from_residue(t: &UnipotentType, param: Parameterization, res: &CycloProduct, factor: Rational64) -> Result<Member> {
    let full = scale_cyclo(res, factor);
    let q = full.to_qrational()?;
    let rational = q_to_r64(&q.scalar.abs()).ok_or_else(|| HeckeError::Domain("constant out of range".into()))?;
    Ok(Member {
        inner_form: t.inner_form,
        label: t.label.clone(),
        parameterization: param,
        fdeg_rational: rational,
        fdeg_q: q.q_factor(),
        fdeg: full,
        central: t.inner_form,
    })
}

fn pairs_of_partitions(r: u32) -> Vec<(Partition, Partition)> {
    let mut out = Vec::new();
    for k in 0..=r {
        for pm in partitions(k) {
            for pp in partitions(r - k) {
                out.push((pm.clone(), pp));
            }
        }
    }
    out
}

/// Every discrete series of the type with its packet key, before the
/// multiplicity rules are applied: one record per generic residual point.
fn raw_discrete_series(t: &UnipotentType) -> Result<Vec<(PacketKey, Parameterization, CycloProduct)>> {
    let h = t.hecke()?;
    match t.algebra {
        AlgebraLabel::C { r, m_minus, m_plus } => {
            let class = classify_parameters(m_minus, m_plus)?.class;
            let extra = matches!(class, ParamClass::V | ParamClass::VI);
            pairs_of_partitions(r as u32)
                .into_par_iter()
                .map(|(pm, pp)| {
                    let keyed = if extra {
                        extra_image(m_minus, m_plus, &pm, &pp).map(|img| (img.u_minus, img.u_plus))
                    } else {
                        unipotent_of(&pm, m_minus).and_then(|um| Ok((um, unipotent_of(&pp, m_plus)?)))
                    };
                    // Tableaux with a multiplicity drop do not survive the
                    // specialization of the parameters.
                    let (um, up) = match keyed {
                        Err(HeckeError::NonGeneric(_)) => return Ok(None),
                        other => other?,
                    };
                    let point = generic_point(&h, &pm, &pp)?;
                    let res = residue_cyclo(&h, &point)?;
                    let param = if extra {
                        Parameterization::Extraspecial { pi_minus: pm, pi_plus: pp, copy: 0 }
                    } else {
                        Parameterization::Symbols { pi_minus: pm, pi_plus: pp, copy: 0 }
                    };
                    Ok(Some((PacketKey { u_minus: um, u_plus: up, tag: None }, param, res)))
                })
                .collect::<Result<Vec<_>>>()
                .map(|v| v.into_iter().flatten().collect())
        }
        _ => Err(HeckeError::Capability(format!("raw discrete series for {}", h.name()))),
    }
}

fn conjugate(p: &Partition) -> Partition {
    let parts = p.parts();
    let top = parts.iter().copied().max().unwrap_or(0);
    Partition::new((1..=top).map(|k| parts.iter().filter(|&&x| x >= k).count() as u32).collect())
}

/// Of `pi` and its conjugate, the one kept as representative.
fn is_canonical(p: &Partition) -> bool {
    p.parts() >= conjugate(p).parts()
}

/// Applies the branching rules across the index two inclusions of the family
/// and the `|Omega_1|` copies, producing the members contributed by one type.
///
/// With `m_- = 0` and `r > 0` the algebra of the type sits with index two in
/// the algebra of the block:
/// - `u_- != 0`: the discrete series for `pi_-` and its conjugate (symbols
///   with interchanged rows) restrict from one member, of the same degree;
/// - `u_- = 0`: one discrete series is the restriction of two members (with
///   distinct central characters), each of half the degree.
///
/// For `P(CO^0)` with `a = b = 0` the block algebra and `C_n(0,0)` share an
/// index two subalgebra: with `u_-, u_+` both nonempty four discrete series
/// make up one member of twice the degree; otherwise there is no collapse.
fn expand_type(t: &UnipotentType) -> Result<Vec<(PacketKey, Member)>> {
    let raw = raw_discrete_series(t)?;
    let (r, mm, mp, extra) = match t.algebra {
        AlgebraLabel::C { r, m_minus, m_plus } => {
            let class = classify_parameters(m_minus, m_plus)?.class;
            (r, m_minus, m_plus, matches!(class, ParamClass::V | ParamClass::VI))
        }
        _ => unreachable!("classical types only"),
    };
    let branching = !extra && r > 0 && mm.is_zero() && matches!(t.family, Family::Pcsp | Family::PcoPlus);
    let both_zero = branching && mp.is_zero();
    let mut out = Vec::new();
    for (key, param, res) in raw {
        let (pm, pp) = match &param {
            Parameterization::Symbols { pi_minus, pi_plus, .. } | Parameterization::Extraspecial { pi_minus, pi_plus, .. } => {
                (pi_minus.clone(), pi_plus.clone())
            }
            _ => unreachable!(),
        };
        // (number of members, degree factor)
        let (lifts, factor) = if !branching {
            (1, Rational64::one())
        } else if both_zero {
            if !key.u_minus.is_empty() && !key.u_plus.is_empty() {
                if !is_canonical(&pm) || !is_canonical(&pp) {
                    continue;
                }
                (1, Rational64::from_integer(2))
            } else {
                (1, Rational64::one())
            }
        } else if !key.u_minus.is_empty() {
            if !is_canonical(&pm) {
                continue;
            }
            (1, Rational64::one())
        } else {
            (2, Rational64::new(1, 2))
        };
        for copy in 0..lifts * t.omega1 {
            let param = if extra {
                Parameterization::Extraspecial { pi_minus: pm.clone(), pi_plus: pp.clone(), copy }
            } else {
                Parameterization::Symbols { pi_minus: pm.clone(), pi_plus: pp.clone(), copy }
            };
            out.push((key.clone(), member_from_residue(t, param, &res, factor)?));
        }
    }
    Ok(out)
}

/// The `^LZ`-orbit representative of a key, with the number of distinct
/// Langlands parameters in the orbit that share the formal degrees.
pub fn class_key(family: Family, key: &PacketKey) -> (PacketKey, u32) {
    let (um, up) = (key.u_minus.clone(), key.u_plus.clone());
    let mk = |a: Partition, b: Partition| PacketKey { u_minus: a, u_plus: b, tag: key.tag.clone() };
    match family {
        Family::Pcsp => {
            let (a, b) = if um.size() % 2 == 1 { (up, um) } else { (um, up) };
            let lifts = if a.is_empty() { 2 } else { 1 };
            (mk(a, b), lifts)
        }
        Family::SoOdd | Family::PcoStar => {
            let lifts = if um == up { 1 } else { 2 };
            let (a, b) = if um <= up { (um, up) } else { (up, um) };
            (mk(a, b), lifts)
        }
        Family::PcoPlus => {
            let (a, b) = if um <= up { (um, up) } else { (up, um) };
            let lifts = if a == b {
                1
            } else if a.is_empty() {
                4
            } else {
                2
            };
            (mk(a, b), lifts)
        }
        _ => (mk(um, up), 1),
    }
}

fn sort_members(ms: &mut [Member]) {
    ms.sort_by(|x, y| {
        (x.inner_form, &x.label, &x.parameterization).cmp(&(y.inner_form, &y.label, &y.parameterization))
    });
}

fn classical_packets(family: Family, n: u32) -> Result<Vec<Packet>> {
    let mut types = Vec::new();
    for form in family.inner_forms(n) {
        types.extend(enumerate_cuspidal_types(family, n, form)?);
    }
    let per_type: Vec<Vec<(PacketKey, Member)>> = types.par_iter().map(expand_type).collect::<Result<_>>()?;
    let mut groups: BTreeMap<PacketKey, (u32, Vec<Member>)> = BTreeMap::new();
    for (key, m) in per_type.into_iter().flatten() {
        let (k, lifts) = class_key(family, &key);
        groups.entry(k).or_insert_with(|| (lifts, Vec::new())).1.push(m);
    }
    Ok(groups
        .into_iter()
        .map(|(key, (lifts, mut members))| {
            sort_members(&mut members);
            Packet { family, n, key, lifts, members }
        })
        .collect())
}

fn pgl_packets(n: u32) -> Result<Vec<Packet>> {
    let mut members: BTreeMap<u32, Vec<Member>> = BTreeMap::new();
    for form in Family::Pgl.inner_forms(n) {
        for t in enumerate_cuspidal_types(Family::Pgl, n, form)? {
            let AlgebraLabel::A { n: d } = t.algebra else { unreachable!("PGL types are of type A") };
            let h = t.hecke()?;
            let b2 = Rational64::from_integer(2 * t.base as i64);
            let e = Affine::constant(b2).add(&Affine::eps_plus().scale(b2));
            let point = ResidualPoint::new((0..h.roots.dim()).map(|_| crate::mufn::Coord::real(e.clone())).collect());
            let res = residue_cyclo(&h, &point)?;
            // The adjoint chart identifies the d + 1 central twists of the
            // Steinberg point; each carries 1/(d + 1) of the residue.
            let share = Rational64::new(1, d as i64 + 1);
            let order = t.omega1;
            for j in 0..=d as u32 {
                for c in 0..order {
                    let zeta = c + order * j;
                    let m = member_from_residue(&t, Parameterization::Steinberg { zeta }, &res, share)?;
                    members.entry(zeta).or_default().push(m);
                }
            }
        }
    }
    Ok(members
        .into_iter()
        .map(|(zeta, mut ms)| {
            sort_members(&mut ms);
            Packet {
                family: Family::Pgl,
                n,
                key: PacketKey { u_minus: Partition::empty(), u_plus: Partition::new(vec![n + 1]), tag: Some(format!("zeta={zeta}")) },
                lifts: 1,
                members: ms,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Exceptional groups

/// The generic families of discrete series of `G2(m_long, m_short)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum G2Family {
    Regular,
    SubA,
    SubB,
    OrderTwo,
    OrderThree,
}

/// Formal degree constants of the Iwahori-spherical discrete series of split
/// `G2` (equal parameters), known from the classification of its unipotent
/// representations: regular 1, subregular trivial 1/6 and reflection 1/3,
/// `A1 x A1~` point 1/2, `A2` point 1/3.
fn g2_equal_parameter_constant(f: G2Family) -> Rational64 {
    match f {
        G2Family::Regular => Rational64::one(),
        G2Family::SubA => Rational64::new(1, 6),
        G2Family::SubB => Rational64::new(1, 3),
        G2Family::OrderTwo => Rational64::new(1, 2),
        G2Family::OrderThree => Rational64::new(1, 3),
    }
}

fn at_params(p: &ResidualPoint, ml: Rational64, ms: Rational64) -> ResidualPoint {
    ResidualPoint::new(p.coords.iter().map(|c| crate::mufn::Coord::new(c.angle, c.exp.instantiate(ml, ms))).collect())
}

/// Generic residual points of `G2`, labelled. The two real subregular families
/// are told apart by the sign of their residue at equal parameters.
pub fn g2_generic_families() -> Result<Vec<(G2Family, ResidualPoint)>> {
    let one = Rational64::one();
    let h = ParamHeckeAlgebra::g2(one, one, 1)?;
    let mut out = Vec::new();
    for p in crate::mufn::generic_residual_points(&h.symbolic())? {
        let angles: Vec<Rational64> = p.coords.iter().map(|c| c.angle).collect();
        let f = if angles.iter().any(|a| *a.denom() == 3) {
            G2Family::OrderThree
        } else if angles.iter().all(|a| *a == Rational64::new(1, 2)) {
            G2Family::OrderTwo
        } else {
            let res = residue_cyclo(&h, &at_params(&p, one, one))?.to_qrational()?;
            let s = q_to_r64(&res.scalar).unwrap_or_default();
            if s.abs() == one {
                G2Family::Regular
            } else if s.is_negative() {
                G2Family::SubA
            } else {
                G2Family::SubB
            }
        };
        out.push((f, p));
    }
    out.sort_by_key(|x| x.0);
    let labels: Vec<G2Family> = out.iter().map(|x| x.0).collect();
    let want = [G2Family::Regular, G2Family::SubA, G2Family::SubB, G2Family::OrderTwo, G2Family::OrderThree];
    if labels != want {
        return Err(HeckeError::Domain(format!("unexpected generic families of G2: {labels:?}")));
    }
    Ok(out)
}

/// The ratio `d` between the formal degree and the residue of a generic
/// family; it is constant along the family and read off at equal parameters.
pub fn g2_family_constant(f: G2Family) -> Result<Rational64> {
    let one = Rational64::one();
    let h = ParamHeckeAlgebra::g2(one, one, 1)?;
    let (_, p) = g2_generic_families()?.into_iter().find(|x| x.0 == f).expect("all families present");
    let res = residue_cyclo(&h, &at_params(&p, one, one))?.to_qrational()?;
    let raw = q_to_r64(&res.scalar.abs()).ok_or_else(|| HeckeError::Domain("residue constant out of range".into()))?;
    Ok(g2_equal_parameter_constant(f) / raw)
}

/// Packet names of the exceptional families.
fn exceptional_packet_of(family: Family, f: G2Family) -> &'static str {
    match (family, f) {
        (_, G2Family::Regular) => "regular",
        (Family::G2Split, G2Family::SubA | G2Family::SubB) => "subregular",
        (Family::G2Split, G2Family::OrderTwo) => "A1xA1~",
        (Family::G2Split, G2Family::OrderThree) => "A2",
        (_, G2Family::SubA | G2Family::SubB) => "lambda_sub",
        (_, G2Family::OrderTwo) => "theta_s1",
        (_, G2Family::OrderThree) => "theta_s2",
    }
}

fn cuspidal_packet_of(name: &str) -> &'static str {
    match name {
        "G2[1]" => "subregular",
        "G2[-1]" => "A1xA1~",
        "G2[theta]" | "G2[theta^2]" => "A2",
        "3D4[1]" => "lambda_sub",
        _ => "theta_s1",
    }
}

fn exceptional_packets(family: Family) -> Result<Vec<Packet>> {
    let types = enumerate_cuspidal_types(family, 0, InnerForm::E)?;
    let mut groups: BTreeMap<&'static str, Vec<Member>> = BTreeMap::new();
    for t in &types {
        match &t.label {
            TypeLabel::Named("iwahori") => {
                let AlgebraLabel::G2 { m_long, m_short } = t.algebra else { unreachable!("G2 Iwahori algebra") };
                let h = t.hecke()?;
                for (f, p) in g2_generic_families()? {
                    let res = residue_cyclo(&h, &at_params(&p, m_long, m_short))?;
                    let d = g2_family_constant(f)?;
                    let m = member_from_residue(t, Parameterization::Named(format!("{f:?}")), &res, d)?;
                    groups.entry(exceptional_packet_of(family, f)).or_default().push(m);
                }
            }
            TypeLabel::Named(name) => {
                let res = t.tau.to_cyclo().mul(&crate::mufn::torus_factor(1).pow(0));
                let m = member_from_residue(t, Parameterization::Cuspidal { copy: 0 }, &res, Rational64::one())?;
                groups.entry(cuspidal_packet_of(name)).or_default().push(m);
            }
            _ => unreachable!("exceptional types are named"),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(name, mut ms)| {
            sort_members(&mut ms);
            Packet {
                family,
                n: 0,
                key: PacketKey { u_minus: Partition::empty(), u_plus: Partition::empty(), tag: Some(name.to_string()) },
                lifts: 1,
                members: ms,
            }
        })
        .collect())
}

/// All unipotent discrete series packets of the family at rank `n`, gathered
/// over the inner forms and sorted by key.
pub fn assemble_packets(family: Family, n: u32) -> Result<Vec<Packet>> {
    match family {
        Family::Pgl => pgl_packets(n),
        Family::G2Split | Family::ThreeD4 => exceptional_packets(family),
        _ => classical_packets(family, n),
    }
}

// ---------------------------------------------------------------------------
// HII check

/// Predicted constants `dim(rho) |C_lambda^F| / |A_lambda|`, per inner form,
/// as a multiset over the members the packet should have.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub group: String,
    pub per_form: BTreeMap<InnerForm, Vec<Rational64>>,
    /// Whether the member counts are part of the prediction.
    pub counts: bool,
}

fn repeat(x: Rational64, k: u64) -> Vec<Rational64> {
    vec![x; k as usize]
}

pub fn predict(p: &Packet) -> Result<Prediction> {
    let family = p.family;
    let n = p.n;
    let lifts = p.lifts as u64;
    let mut per_form = BTreeMap::new();
    let (group, counts) = match family {
        Family::Pgl => {
            let c = Rational64::new(1, n as i64 + 1);
            for f in family.inner_forms(n) {
                per_form.insert(f, vec![c]);
            }
            (format!("Z/{}", n + 1), true)
        }
        Family::PuEven | Family::PuOdd => {
            let c = Rational64::new(1, family.dual_center_order(n) as i64);
            for f in family.inner_forms(n) {
                let k = p.members.iter().filter(|m| m.inner_form == f).count() as u64;
                per_form.insert(f, repeat(c, k));
            }
            ("not modeled".to_string(), false)
        }
        Family::G2Split | Family::ThreeD4 => {
            let tag = p.key.tag.as_deref().unwrap_or("");
            let r = |a: i64, b: i64| Rational64::new(a, b);
            let (g, list) = match (family, tag) {
                (_, "regular") => ("1", vec![r(1, 1)]),
                (Family::G2Split, "subregular") => ("S3", vec![r(1, 6), r(1, 6), r(2, 6)]),
                (Family::G2Split, "A1xA1~") => ("Z/2", vec![r(1, 2), r(1, 2)]),
                (Family::G2Split, "A2") => ("Z/3", vec![r(1, 3), r(1, 3), r(1, 3)]),
                // |C_lambda^F| = 3 for the subregular parameter of 3D4.
                (_, "lambda_sub") => ("S3", vec![r(3, 6), r(3, 6), r(6, 6)]),
                (_, "theta_s1") => ("Z/2", vec![r(1, 2), r(1, 2)]),
                (_, "theta_s2") => ("1", vec![r(1, 1)]),
                _ => return Err(HeckeError::Domain(format!("unknown exceptional packet {tag}"))),
            };
            per_form.insert(InnerForm::E, list);
            (g.to_string(), true)
        }
        _ => {
            let a = a_lambda(&p.key.u_minus, &p.key.u_plus, family)?;
            let c = c_lambda_f(&p.key.u_minus, &p.key.u_plus);
            let order = a.order();
            let base = |dim: u64| Rational64::new((dim * c) as i64, order as i64);
            let trivial_count = if a.a == 0 { 1u64 << (a.b - 1) } else { 1u64 << (2 * a.a + a.b - 1) };
            let nontrivial = (a.higher_dim(), 1u64 << (a.b - 1));
            match family {
                Family::SoOdd => {
                    let k = 1u64 << (a.b - 1);
                    per_form.insert(InnerForm::E, repeat(base(1), lifts * k));
                    per_form.insert(InnerForm::Eta, repeat(base(1), lifts * k));
                }
                Family::Pcsp => {
                    per_form.insert(InnerForm::E, repeat(base(1), lifts * trivial_count));
                    per_form.insert(InnerForm::Eta, repeat(base(nontrivial.0), lifts * nontrivial.1));
                }
                Family::PcoPlus => {
                    for f in [InnerForm::E, InnerForm::Eta] {
                        per_form.insert(f, repeat(base(1), lifts * trivial_count / 2));
                    }
                    for f in [InnerForm::Rho, InnerForm::RhoEta] {
                        per_form.insert(f, repeat(base(nontrivial.0), lifts * nontrivial.1 / 2));
                    }
                }
                Family::PcoStar => {
                    per_form.insert(InnerForm::E, repeat(base(1), lifts * trivial_count));
                    per_form.insert(InnerForm::RhoBar, repeat(base(nontrivial.0), lifts * nontrivial.1));
                }
                _ => unreachable!(),
            }
            (a.to_string(), true)
        }
    };
    Ok(Prediction { group, per_form, counts })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiiMember {
    pub inner_form: InnerForm,
    pub label: TypeLabel,
    pub parameterization: Parameterization,
    pub fdeg_rational: Rational64,
    pub predicted: Option<Rational64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormCount {
    pub inner_form: InnerForm,
    pub expected: usize,
    pub found: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiiReport {
    pub family: Family,
    pub n: u32,
    pub key: PacketKey,
    pub group: String,
    pub members: Vec<HiiMember>,
    pub counts: Vec<FormCount>,
    /// All members share one q-factor.
    pub q_uniform: bool,
}

impl HiiReport {
    pub fn pass(&self) -> bool {
        self.q_uniform && self.members.iter().all(|m| m.pass) && self.counts.iter().all(|c| c.pass)
    }
}

/// Compares every member against the predicted constants of its inner form
/// (as multisets), the member counts against the irreducibles of `A_lambda`
/// with the matching central character, and checks the shared q-factor.
pub fn hii_check(p: &Packet) -> Result<HiiReport> {
    let pred = predict(p)?;
    let mut pool = pred.per_form.clone();
    let mut members = Vec::new();
    for m in &p.members {
        let slot = pool.get_mut(&m.central);
        let hit = slot.and_then(|v| v.iter().position(|x| *x == m.fdeg_rational).map(|i| v.remove(i)));
        let predicted = hit.or_else(|| pred.per_form.get(&m.central).and_then(|v| v.first().copied()));
        members.push(HiiMember {
            inner_form: m.inner_form,
            label: m.label.clone(),
            parameterization: m.parameterization.clone(),
            fdeg_rational: m.fdeg_rational,
            predicted,
            pass: hit.is_some(),
        });
    }
    let mut counts = Vec::new();
    if pred.counts {
        for (f, v) in &pred.per_form {
            let found = p.members.iter().filter(|m| m.central == *f).count();
            counts.push(FormCount { inner_form: *f, expected: v.len(), found, pass: found == v.len() });
        }
        for m in &p.members {
            if !pred.per_form.contains_key(&m.central) && !counts.iter().any(|c| c.inner_form == m.central) {
                let found = p.members.iter().filter(|x| x.central == m.central).count();
                counts.push(FormCount { inner_form: m.central, expected: 0, found, pass: false });
            }
        }
    }
    Ok(HiiReport {
        family: p.family,
        n: p.n,
        key: p.key.clone(),
        group: pred.group,
        members,
        counts,
        q_uniform: p.q_factor().is_some(),
    })
}

impl HiiReport {
    /// The packet as JSON, each member annotated with its HII verdict.
    pub fn packet_json(&self, p: &Packet) -> serde_json::Value {
        let members: Vec<_> = p
            .members
            .iter()
            .zip(&self.members)
            .map(|(m, h)| {
                serde_json::json!({
                    "inner_form": m.inner_form.to_string(),
                    "label": m.label.to_string(),
                    "parameterization": m.parameterization.to_string(),
                    "fdeg_rational": fmt_rat(m.fdeg_rational),
                    "fdeg_qfactor": m.fdeg_q.to_string(),
                    "hii": {
                        "predicted": h.predicted.map(fmt_rat),
                        "pass": h.pass,
                    },
                })
            })
            .collect();
        let counts: Vec<_> = self
            .counts
            .iter()
            .map(|c| serde_json::json!({"inner_form": c.inner_form.to_string(), "expected": c.expected, "found": c.found, "pass": c.pass}))
            .collect();
        serde_json::json!({
            "family": p.family.name(),
            "n": p.n,
            "u_minus": p.key.u_minus.parts(),
            "u_plus": p.key.u_plus.parts(),
            "tag": p.key.tag,
            "lifts": p.lifts,
            "a_lambda": self.group,
            "q_uniform": self.q_uniform,
            "counts": counts,
            "pass": self.pass(),
            "members": members,
        })
    }
}

// ---------------------------------------------------------------------------
// Closed form against oracle

/// One comparison of [`fdeg_closed`] with [`fdeg_oracle_rational`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepCase {
    pub m_minus: Rational64,
    pub m_plus: Rational64,
    pub u_minus: Partition,
    pub u_plus: Partition,
    pub pi_minus: Partition,
    pub pi_plus: Partition,
    pub closed: Rational64,
    pub oracle: Rational64,
}

impl SweepCase {
    pub fn agrees(&self) -> bool {
        self.closed == self.oracle
    }
}

/// Partitions distinguished for `m` of size at most `max_size`.
fn distinguished_up_to(m: Rational64, max_size: u32) -> Vec<Partition> {
    use crate::tableaux::{enumerate_distinguished, grid_of, rank_of, Flavor, Grid};
    let flavor = match grid_of(m) {
        Ok(Grid::Integral) => Flavor::Odd,
        _ => Flavor::Even,
    };
    (0..=max_size)
        .flat_map(|s| enumerate_distinguished(s, flavor, 0))
        .filter(|u| rank_of(u, m).is_some())
        .collect()
}

/// Parameter pairs `0 <= m_- <= m_+ <= max_m` in classes II, III and IV.
pub fn sweep_parameters(max_m: Rational64) -> Vec<(Rational64, Rational64)> {
    let half = Rational64::new(1, 2);
    let mut out = Vec::new();
    let mut mp = Rational64::zero();
    while mp <= max_m {
        let mut mm = Rational64::zero();
        while mm <= mp {
            if let Ok(c) = classify_parameters(mm, mp) {
                if matches!(c.class, ParamClass::II | ParamClass::III | ParamClass::IV) {
                    out.push((mm, mp));
                }
            }
            mm += half;
        }
        mp += half;
    }
    out
}

/// Compares closed form and oracle for every distinguished `(u_-, u_+)` with
/// `|u_-| + |u_+| <= max_size` and every parameter pair of
/// [`sweep_parameters`], at every generic point attached to the pair.
pub fn closed_form_sweep(max_size: u32, max_m: Rational64) -> Result<Vec<SweepCase>> {
    let mut jobs = Vec::new();
    for (mm, mp) in sweep_parameters(max_m) {
        let variant = if mm.is_integer() { ClosedVariant::IIIIV } else { ClosedVariant::II };
        for um in distinguished_up_to(mm, max_size) {
            for up in distinguished_up_to(mp, max_size - um.size()) {
                jobs.push((mm, mp, variant, um.clone(), up));
            }
        }
    }
    let cases: Vec<Vec<SweepCase>> = jobs
        .into_par_iter()
        .map(|(mm, mp, variant, um, up)| {
            let closed = fdeg_closed(&um, &up, mm, mp, variant)?;
            let pms = crate::tableaux::partitions_for(&um, mm)?;
            let pps = crate::tableaux::partitions_for(&up, mp)?;
            let mut out = Vec::new();
            for pm in &pms {
                for pp in &pps {
                    let r = (pm.size() + pp.size()) as usize;
                    let h = ParamHeckeAlgebra::c_type(r, mm, mp, 1)?;
                    let oracle = fdeg_oracle_rational(&h, &generic_point(&h, pm, pp)?)?;
                    out.push(SweepCase {
                        m_minus: mm,
                        m_plus: mp,
                        u_minus: um.clone(),
                        u_plus: up.clone(),
                        pi_minus: pm.clone(),
                        pi_plus: pp.clone(),
                        closed,
                        oracle,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(cases.into_iter().flatten().collect())
}
