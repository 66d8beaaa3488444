//! Spectral transfer morphisms between algebras of type `C`.
//!
//! A morphism is stored as an affine map of tori: target coordinate `j` is
//! `exp(2 pi i angle_j) v^{vexp_j} t^{M_j}` in the source coordinates `t`.
//! Verification pulls the target mu-function back along the image and compares
//! it factor by factor with the source mu-function.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HeckeError, Result};
use crate::laurent::{frac_part, q_to_r64, Q};
use crate::mufn::{constant_product, mu_factors, torus_factor, Coord, ResidualPoint};
use crate::rootdata::{Affine, AlgebraLabel, ParamHeckeAlgebra};
use crate::unipotent::{classify_parameters, normalization, ParamClass};

fn half() -> Rational64 {
    Rational64::new(1, 2)
}

fn rat(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

/// One target coordinate `exp(2 pi i angle) v^vexp t^t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImageCoord {
    pub angle: Rational64,
    pub vexp: Rational64,
    pub t: Vec<i64>,
}

impl ImageCoord {
    fn constant(angle: Rational64, vexp: i64, rank: usize) -> Self {
        ImageCoord { angle: frac_part(angle), vexp: rat(vexp), t: vec![0; rank] }
    }

    fn is_constant(&self) -> bool {
        self.t.iter().all(|&x| x == 0)
    }
}

impl fmt::Display for ImageCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.angle == half() {
            write!(f, "-")?;
        } else if !self.angle.is_zero() {
            write!(f, "e({})*", self.angle)?;
        }
        write!(f, "v^{}", self.vexp)?;
        for (i, &k) in self.t.iter().enumerate() {
            match k {
                0 => {}
                1 => write!(f, "*t{}", i + 1)?,
                _ => write!(f, "*t{}^{}", i + 1, k)?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StmKind {
    Identity,
    Translation(Side),
    Extraspecial,
    Swap,
    Composite(Vec<StmKind>),
}

/// A transfer morphism from `source` to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferMorphism {
    pub source: ParamHeckeAlgebra,
    pub target: ParamHeckeAlgebra,
    pub image: Vec<ImageCoord>,
    pub kind: StmKind,
}

impl TransferMorphism {
    pub fn identity(h: &ParamHeckeAlgebra) -> Self {
        let n = h.roots.dim();
        let image = (0..n)
            .map(|i| {
                let mut t = vec![0; n];
                t[i] = 1;
                ImageCoord { angle: Rational64::zero(), vexp: Rational64::zero(), t }
            })
            .collect();
        TransferMorphism { source: h.clone(), target: h.clone(), image, kind: StmKind::Identity }
    }

    /// The image of a point of the source torus.
    pub fn map_point(&self, r: &ResidualPoint) -> Result<ResidualPoint> {
        if r.coords.len() != self.source.roots.dim() {
            return Err(HeckeError::Domain(format!(
                "point has {} coordinates, source {} needs {}",
                r.coords.len(),
                self.source.name(),
                self.source.roots.dim()
            )));
        }
        let coords = self
            .image
            .iter()
            .map(|c| {
                let x = r.eval(&c.t);
                Coord::new(c.angle + x.angle, x.exp.add(&Affine::constant(c.vexp)))
            })
            .collect();
        Ok(ResidualPoint::new(coords))
    }

    /// `next` after `self`.
    pub fn then(&self, next: &TransferMorphism) -> Result<TransferMorphism> {
        if self.target.label != next.source.label || self.target.base != next.source.base {
            return Err(HeckeError::Domain(format!(
                "cannot compose: target {} is not source {}",
                self.target.name(),
                next.source.name()
            )));
        }
        let n = self.source.roots.dim();
        let image = next
            .image
            .iter()
            .map(|c| {
                let mut angle = c.angle;
                let mut vexp = c.vexp;
                let mut t = vec![0; n];
                for (k, &e) in c.t.iter().enumerate() {
                    if e != 0 {
                        let inner = &self.image[k];
                        angle += inner.angle * rat(e);
                        vexp += inner.vexp * rat(e);
                        for (x, y) in t.iter_mut().zip(&inner.t) {
                            *x += e * y;
                        }
                    }
                }
                ImageCoord { angle: frac_part(angle), vexp, t }
            })
            .collect();
        let mut kinds = Vec::new();
        for k in [&self.kind, &next.kind] {
            match k {
                StmKind::Identity => {}
                StmKind::Composite(ks) => kinds.extend(ks.iter().cloned()),
                other => kinds.push(other.clone()),
            }
        }
        let kind = match kinds.len() {
            0 => StmKind::Identity,
            1 => kinds.pop().expect("one kind"),
            _ => StmKind::Composite(kinds),
        };
        Ok(TransferMorphism { source: self.source.clone(), target: next.target.clone(), image, kind })
    }

    /// Replaces source and target normalizations by the class normalizations.
    pub fn normalized(mut self) -> Result<Self> {
        self.source = with_class_tau(&self.source)?;
        self.target = with_class_tau(&self.target)?;
        Ok(self)
    }

    /// Canonical form of the image up to signed permutations that fix the
    /// source coordinates: constant coordinates are inverted into the half with
    /// nonnegative exponent and everything is sorted.
    pub fn image_key(&self) -> Vec<ImageCoord> {
        let mut out: Vec<ImageCoord> = self
            .image
            .iter()
            .map(|c| {
                if c.is_constant() && (c.vexp < Rational64::zero() || (c.vexp.is_zero() && frac_part(-c.angle) < c.angle)) {
                    ImageCoord { angle: frac_part(-c.angle), vexp: -c.vexp, t: c.t.clone() }
                } else {
                    c.clone()
                }
            })
            .collect();
        out.sort();
        out
    }
}

fn c_params(h: &ParamHeckeAlgebra) -> Result<(usize, Rational64, Rational64)> {
    match h.label {
        AlgebraLabel::C { r, m_minus, m_plus } => Ok((r, m_minus, m_plus)),
        _ => Err(HeckeError::Domain(format!("{} is not of type C", h.name()))),
    }
}

fn with_class_tau(h: &ParamHeckeAlgebra) -> Result<ParamHeckeAlgebra> {
    let (_, mm, mp) = c_params(h)?;
    Ok(h.clone().with_tau(normalization(mm, mp)?))
}

/// Base `b` of `q^b` for the class: 2 for classes I, V and VI, else 1.
pub fn base_for(class: ParamClass) -> u32 {
    match class {
        ParamClass::I | ParamClass::V | ParamClass::VI => 2,
        _ => 1,
    }
}

/// Constants appended by one translation step at `|m|`, as v-exponents, with
/// the new value of `|m|`.
fn translation_block(m: Rational64, b: i64) -> Result<(Vec<i64>, Rational64)> {
    let m = m.abs();
    if m.is_integer() {
        let k = m.to_integer();
        if k <= 1 {
            return Err(HeckeError::MinimalObject(format!("integral parameter {m} cannot be translated")));
        }
        let mut out = vec![0];
        for j in 1..=k - 2 {
            out.push(2 * b * j);
            out.push(2 * b * j);
        }
        out.push(2 * b * (k - 1));
        Ok((out, m - rat(2)))
    } else if *m.denom() == 2 {
        if m <= half() {
            return Err(HeckeError::MinimalObject(format!("half-integral parameter {m} cannot be translated")));
        }
        let k = (m - half()).to_integer();
        Ok(((1..=k).map(|i| b * (2 * i - 1)).collect(), m - Rational64::one()))
    } else {
        Err(HeckeError::UseExtraspecial(format!("parameter {m} is not in Z/2")))
    }
}

fn signed(orig: Rational64, new_abs: Rational64) -> Rational64 {
    if orig < Rational64::zero() {
        -new_abs
    } else {
        new_abs
    }
}

fn translation_raw(r: usize, m_minus: Rational64, m_plus: Rational64, side: Side) -> Result<TransferMorphism> {
    let class = classify_parameters(m_minus, m_plus)?.class;
    if matches!(class, ParamClass::V | ParamClass::VI) {
        return Err(HeckeError::UseExtraspecial(format!("class {class:?} parameters ({m_minus}, {m_plus})")));
    }
    let base = base_for(class);
    let m = if side == Side::Plus { m_plus } else { m_minus };
    let (block, new_abs) = translation_block(m, base as i64)?;
    let (tm, tp) = match side {
        Side::Plus => (m_minus, signed(m_plus, new_abs)),
        Side::Minus => (signed(m_minus, new_abs), m_plus),
    };
    let k = block.len();
    let source = ParamHeckeAlgebra::c_type(r, m_minus, m_plus, base)?;
    let target = ParamHeckeAlgebra::c_type(r + k, tm, tp, base)?;
    let ident = TransferMorphism::identity(&source).image;
    let angle = if side == Side::Minus { half() } else { Rational64::zero() };
    let consts: Vec<ImageCoord> = block.iter().map(|&e| ImageCoord::constant(angle, e, r)).collect();
    let image = match side {
        Side::Plus => ident.into_iter().chain(consts).collect(),
        Side::Minus => consts.into_iter().chain(ident).collect(),
    };
    Ok(TransferMorphism { source, target, image, kind: StmKind::Translation(side) })
}

/// The translation morphism reducing `|m_+|` (or `|m_-|`) of
/// `C_r(m_-, m_+)`, with class normalizations on both sides.
pub fn translation_stm(r: usize, m_minus: Rational64, m_plus: Rational64, side: Side) -> Result<TransferMorphism> {
    translation_raw(r, m_minus, m_plus, side)?.normalized()
}

/// The swap `m_- <-> m_+`, negating all coordinates.
pub fn swap_stm(r: usize, m_minus: Rational64, m_plus: Rational64, base: u32) -> Result<TransferMorphism> {
    let source = ParamHeckeAlgebra::c_type(r, m_minus, m_plus, base)?;
    let target = ParamHeckeAlgebra::c_type(r, m_plus, m_minus, base)?;
    let image = TransferMorphism::identity(&source)
        .image
        .into_iter()
        .map(|c| ImageCoord { angle: half(), ..c })
        .collect();
    Ok(TransferMorphism { source, target, image, kind: StmKind::Swap })
}

/// Translation steps down to a minimal object, reducing `m_+` first. The
/// identity when the object is already minimal.
pub(crate) fn reduction_raw(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<TransferMorphism> {
    let class = classify_parameters(m_minus, m_plus)?.class;
    if matches!(class, ParamClass::V | ParamClass::VI) {
        return Err(HeckeError::UseExtraspecial(format!("class {class:?} parameters ({m_minus}, {m_plus})")));
    }
    let source = ParamHeckeAlgebra::c_type(r, m_minus, m_plus, base_for(class))?;
    let mut phi = TransferMorphism::identity(&source);
    loop {
        let (r, mm, mp) = c_params(&phi.target)?;
        let step = match translation_raw(r, mm, mp, Side::Plus) {
            Err(HeckeError::MinimalObject(_)) => match translation_raw(r, mm, mp, Side::Minus) {
                Err(HeckeError::MinimalObject(_)) => return Ok(phi),
                other => other?,
            },
            other => other?,
        };
        phi = phi.then(&step)?;
    }
}

/// Translation steps to a minimal object, normalized.
pub fn reduction_stm(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<TransferMorphism> {
    reduction_raw(r, m_minus, m_plus)?.normalized()
}

/// Result of [`translation_commutation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationCheck {
    pub source: String,
    pub target: String,
    /// Constant of the `m_+` step followed by the `m_-` step.
    pub plus_first: Rational64,
    /// Constant of the `m_-` step followed by the `m_+` step.
    pub minus_first: Rational64,
    /// The two images agree up to the Weyl group of the target.
    pub images_agree: bool,
}

impl CommutationCheck {
    pub fn holds(&self) -> bool {
        self.images_agree && self.plus_first == self.minus_first
    }
}

fn two_steps(r: usize, m_minus: Rational64, m_plus: Rational64, first: Side) -> Result<TransferMorphism> {
    let a = translation_raw(r, m_minus, m_plus, first)?;
    let (r1, mm, mp) = c_params(&a.target)?;
    let second = if first == Side::Plus { Side::Minus } else { Side::Plus };
    a.then(&translation_raw(r1, mm, mp, second)?)?.normalized()
}

/// Compares the two orders of reducing `m_+` and `m_-` by one step each.
/// `MinimalObject` if one of the two steps does not exist.
pub fn translation_commutation(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<CommutationCheck> {
    let pm = two_steps(r, m_minus, m_plus, Side::Plus)?;
    let mp = two_steps(r, m_minus, m_plus, Side::Minus)?;
    if pm.target.label != mp.target.label {
        return Err(HeckeError::Domain(format!("targets differ: {} and {}", pm.target.name(), mp.target.name())));
    }
    Ok(CommutationCheck {
        source: pm.source.name(),
        target: pm.target.name(),
        plus_first: verify_stm(&pm)?.constant,
        minus_first: verify_stm(&mp)?.constant,
        images_agree: pm.image_key() == mp.image_key(),
    })
}

/// `|m| = kappa + (2 eps - 1)/4` with `eps` in `{0, 1}`.
pub fn kappa_eps(m: Rational64) -> Result<(i64, i64)> {
    let m = m.abs();
    let four = m * rat(4);
    if !four.is_integer() || four.to_integer() % 2 == 0 {
        return Err(HeckeError::Domain(format!("{m} is not in 1/4 + Z/2")));
    }
    let f = four.to_integer();
    // f = 4 kappa + 2 eps - 1
    let eps = if (f + 1) % 4 == 0 { 0 } else { 1 };
    Ok(((f + 1 - 2 * eps) / 4, eps))
}

/// The positive image block `r_e(m)` of the extraspecial morphism, as exponents
/// of `q`.
pub fn extraspecial_block(m: Rational64) -> Result<Vec<i64>> {
    let m = m.abs();
    let (kappa, _) = kappa_eps(m)?;
    if m < Rational64::one() {
        return Ok(Vec::new());
    }
    let delta = kappa.mod_floor(&2);
    // sigma_e(m) = (q^delta, ..., q^{2m - 3/2})
    let top = (rat(2) * m - Rational64::new(3, 2)).to_integer();
    let mut out: Vec<i64> = (delta..=top).collect();
    out.extend(extraspecial_block(m - Rational64::one())?);
    Ok(out)
}

pub(crate) fn extraspecial_raw(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<TransferMorphism> {
    let class = classify_parameters(m_minus, m_plus)?.class;
    if !matches!(class, ParamClass::V | ParamClass::VI) {
        return Err(HeckeError::Domain(format!("extraspecial morphisms need class V or VI, got {class:?}")));
    }
    let (km, _) = kappa_eps(m_minus)?;
    let (kp, _) = kappa_eps(m_plus)?;
    let neg = extraspecial_block(m_minus)?;
    let pos = extraspecial_block(m_plus)?;
    let l = 2 * r + neg.len() + pos.len();
    let source = ParamHeckeAlgebra::c_type(r, m_minus, m_plus, 2)?;
    let target = ParamHeckeAlgebra::c_type(l, rat(km.mod_floor(&2)), rat(kp.mod_floor(&2)), 1)?;
    let mut image: Vec<ImageCoord> = neg.iter().map(|&e| ImageCoord::constant(half(), 2 * e, r)).collect();
    for i in 0..r {
        let mut t = vec![0; r];
        t[i] = 1;
        image.push(ImageCoord { angle: Rational64::zero(), vexp: rat(1), t: t.clone() });
        image.push(ImageCoord { angle: Rational64::zero(), vexp: rat(-1), t });
    }
    image.extend(pos.iter().map(|&e| ImageCoord::constant(Rational64::zero(), 2 * e, r)));
    Ok(TransferMorphism { source, target, image, kind: StmKind::Extraspecial })
}

/// The extraspecial morphism `C_r(m_-, m_+)[q^2] -> C_L(delta_-, delta_+)[q]`
/// for parameters in `1/4 + Z/2`, normalized.
pub fn extraspecial_stm(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<TransferMorphism> {
    extraspecial_raw(r, m_minus, m_plus)?.normalized()
}

/// The morphism from `C_r(m_-, m_+)` to its minimal object: translations, or
/// the extraspecial morphism followed by translations.
pub(crate) fn to_minimal_raw(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<TransferMorphism> {
    match reduction_raw(r, m_minus, m_plus) {
        Err(HeckeError::UseExtraspecial(_)) => {
            let e = extraspecial_raw(r, m_minus, m_plus)?;
            let (l, dm, dp) = c_params(&e.target)?;
            e.then(&reduction_raw(l, dm, dp)?)
        }
        other => other,
    }
}

pub fn to_minimal_stm(r: usize, m_minus: Rational64, m_plus: Rational64) -> Result<TransferMorphism> {
    to_minimal_raw(r, m_minus, m_plus)?.normalized()
}

// ---------------------------------------------------------------------------
// Verification

/// A factor `1 - exp(2 pi i angle) v^vexp chi` with `chi` primitive and
/// oriented (first nonzero entry positive), or a constant when `chi = 0`.
type FactorKey = (Vec<i64>, Rational64, Rational64);

/// Splits `1 - z chi^g` (with `chi` primitive) into `g` factors and orients
/// each one; constant factors are returned unchanged.
fn normalize_factor(angle: Rational64, vexp: Rational64, lambda: Vec<i64>) -> Vec<FactorKey> {
    let g = lambda.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        return vec![(lambda, vexp, frac_part(angle))];
    }
    let chi: Vec<i64> = lambda.iter().map(|x| x / g).collect();
    let flip = chi.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0);
    let gq = rat(g);
    (0..g)
        .map(|k| {
            let a = (angle + rat(k)) / gq;
            let e = vexp / gq;
            if flip {
                (chi.iter().map(|x| -x).collect(), -e, frac_part(-a))
            } else {
                (chi.clone(), e, frac_part(a))
            }
        })
        .collect()
}

/// Result of [`verify_stm`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StmCheck {
    pub source: String,
    pub target: String,
    /// Codimension of the image, equal to the pole order along it.
    pub codim: usize,
    /// Number of non-constant source factors matched.
    pub matched: usize,
    /// The rational constant `d` with `tau_T mu_T^(L) = d tau_S mu_S` on the image.
    pub constant: Rational64,
}

fn fmt_key(k: &FactorKey) -> String {
    format!("1 - e({})*v^{}*chi{:?}", k.2, k.1, k.0)
}

/// Checks that the pulled back target mu-function equals the source
/// mu-function up to a rational constant.
pub fn verify_stm(phi: &TransferMorphism) -> Result<StmCheck> {
    let s = phi.source.specialized();
    let t = phi.target.specialized();
    if phi.image.len() != t.roots.dim() {
        return Err(HeckeError::Domain("image dimension does not match the target".into()));
    }
    let mut net: BTreeMap<FactorKey, i64> = BTreeMap::new();
    let mut constants: Vec<(Coord, i64)> = Vec::new();
    let mut pole = 0i64;
    let tmu = mu_factors(&t);
    for (fs, sgn) in [(&tmu.numerator, 1i64), (&tmu.denominator, -1i64)] {
        for f in fs.iter() {
            let mut angle = if f.sign < 0 { half() } else { Rational64::zero() };
            let mut vexp = f.shift.c;
            let mut lambda = vec![0i64; s.roots.dim()];
            for (&a, c) in f.character.iter().zip(&phi.image) {
                if a != 0 {
                    angle += c.angle * rat(a);
                    vexp += c.vexp * rat(a);
                    for (x, y) in lambda.iter_mut().zip(&c.t) {
                        *x += a * y;
                    }
                }
            }
            if lambda.iter().all(|&x| x == 0) {
                if frac_part(angle).is_zero() && vexp.is_zero() {
                    pole -= sgn;
                } else {
                    constants.push((Coord::new(angle, Affine::constant(vexp)), sgn));
                }
            } else {
                for k in normalize_factor(angle, vexp, lambda) {
                    *net.entry(k).or_insert(0) += sgn;
                }
            }
        }
    }
    let codim = t.rank() - s.rank();
    if pole != codim as i64 {
        return Err(HeckeError::NotResidual(format!(
            "pole order {pole} along the image of {} in {}, codimension {codim}",
            s.name(),
            t.name()
        )));
    }
    let smu = mu_factors(&s);
    let mut matched = 0;
    for (fs, sgn) in [(&smu.numerator, 1i64), (&smu.denominator, -1i64)] {
        for f in fs.iter() {
            let angle = if f.sign < 0 { half() } else { Rational64::zero() };
            for k in normalize_factor(angle, f.shift.c, f.character.clone()) {
                *net.entry(k).or_insert(0) -= sgn;
                matched += 1;
            }
        }
    }
    let leftover: Vec<String> = net
        .iter()
        .filter(|(_, &c)| c != 0)
        .map(|(k, c)| format!("{} ^ {}", fmt_key(k), c))
        .collect();
    if !leftover.is_empty() {
        return Err(HeckeError::Cancellation(leftover));
    }
    let c = constant_product(&constants)?;
    let num = c.mul(&phi.target.tau().to_cyclo()).mul(&torus_factor(t.base).pow(-(t.rank() as i64)));
    let den = phi.source.tau().to_cyclo().mul(&torus_factor(s.base).pow(-(s.rank() as i64)));
    let d = num.div(&den).balanced()?.to_qrational()?;
    if !d.factors.is_empty() {
        return Err(HeckeError::Cancellation(vec![format!("normalizations leave the q-factor {}", d.q_factor())]));
    }
    let constant = q_to_r64(&d.scalar.abs())
        .ok_or_else(|| HeckeError::Capability(format!("constant {} exceeds 64-bit range", d.scalar)))?;
    Ok(StmCheck { source: s.name(), target: t.name(), codim, matched, constant })
}

/// `|d|` of [`verify_stm`] as an arbitrary precision rational.
pub fn verify_constant(phi: &TransferMorphism) -> Result<Q> {
    Ok(crate::laurent::r64_to_q(verify_stm(phi)?.constant))
}

// ---------------------------------------------------------------------------
// Diagrams

/// One node of the affine diagram of the target, with the pulled back weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferNode {
    pub index: usize,
    pub mark: i64,
    /// Pulled back character in source coordinates.
    pub lambda: Vec<i64>,
    pub angle: Rational64,
    /// Exponent of `v` in the pulled back weight.
    pub c: Rational64,
    /// Matched source node and the ratio `f` with `lambda = f * gradient`.
    pub source_node: Option<usize>,
    pub f: Option<Rational64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferDiagram {
    pub nodes: Vec<TransferNode>,
    /// Nodes with constant weight, excluding `k0`.
    pub j: Vec<usize>,
    /// The remaining nodes.
    pub k: Vec<usize>,
    pub k0: usize,
    /// Orders of the cyclic factors of `K_L^n`.
    pub kln: Vec<i64>,
}

/// Gradients of the affine simple roots of the `C_n` chart: `-2e_1`,
/// `e_i - e_{i+1}`, `2e_n`, with marks `1, 2, ..., 2, 1`.
fn c_gradients(n: usize) -> Vec<(Vec<i64>, i64)> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut g = vec![0; n];
    g[0] = -2;
    out.push((g, 1));
    for i in 0..n - 1 {
        let mut g = vec![0; n];
        g[i] = 1;
        g[i + 1] = -1;
        out.push((g, 2));
    }
    let mut g = vec![0; n];
    g[n - 1] = 2;
    out.push((g, 1));
    out
}

/// Ratio `f > 0` with `lambda = f * g`, if any.
fn positive_ratio(lambda: &[i64], g: &[i64]) -> Option<Rational64> {
    let mut f: Option<Rational64> = None;
    for (&x, &y) in lambda.iter().zip(g) {
        if y == 0 {
            if x != 0 {
                return None;
            }
        } else {
            let r = Rational64::new(x, y);
            if f.is_some_and(|f0| f0 != r) {
                return None;
            }
            f = Some(r);
        }
    }
    f.filter(|r| r.is_positive())
}

/// Puts the image in the chamber used for the diagram: negative constant
/// coordinates first with nonpositive exponents descending, then the
/// non-constant coordinates, then positive constants with nonnegative
/// exponents descending.
fn dominant_image(image: &[ImageCoord]) -> Vec<ImageCoord> {
    let mut neg = Vec::new();
    let mut mid = Vec::new();
    let mut pos = Vec::new();
    for c in image {
        if !c.is_constant() {
            mid.push(c.clone());
        } else if c.angle == half() {
            neg.push(ImageCoord { vexp: -c.vexp.abs(), ..c.clone() });
        } else {
            pos.push(ImageCoord { vexp: c.vexp.abs(), ..c.clone() });
        }
    }
    neg.sort_by(|a, b| b.vexp.cmp(&a.vexp));
    pos.sort_by(|a, b| b.vexp.cmp(&a.vexp));
    neg.into_iter().chain(mid).chain(pos).collect()
}

/// The transfer diagram of a morphism between algebras of type `C`.
pub fn stm_diagram(phi: &TransferMorphism) -> Result<TransferDiagram> {
    c_params(&phi.source)?;
    c_params(&phi.target)?;
    let image = dominant_image(&phi.image);
    let l = image.len();
    let rs = phi.source.roots.dim();
    let source_nodes = c_gradients(rs);
    let mut nodes = Vec::with_capacity(l + 1);
    for (index, (g, mark)) in c_gradients(l).into_iter().enumerate() {
        let mut angle = Rational64::zero();
        let mut c = Rational64::zero();
        let mut lambda = vec![0i64; rs];
        for (&a, x) in g.iter().zip(&image) {
            if a != 0 {
                angle += x.angle * rat(a);
                c += x.vexp * rat(a);
                for (y, z) in lambda.iter_mut().zip(&x.t) {
                    *y += a * z;
                }
            }
        }
        let matched = source_nodes
            .iter()
            .enumerate()
            .find_map(|(i, (sg, _))| positive_ratio(&lambda, sg).map(|f| (i, f)));
        nodes.push(TransferNode {
            index,
            mark,
            lambda,
            angle: frac_part(angle),
            c,
            source_node: matched.map(|m| m.0),
            f: matched.map(|m| m.1),
        });
    }
    // prod w_k^{n_k} = 1
    let mut total_angle = Rational64::zero();
    let mut total_c = Rational64::zero();
    for n in &nodes {
        total_angle += n.angle * rat(n.mark);
        total_c += n.c * rat(n.mark);
        if n.lambda.iter().any(|&x| x != 0) && n.f.is_none() {
            return Err(HeckeError::Domain(format!("node {} has a weight matching no source node", n.index)));
        }
    }
    if !frac_part(total_angle).is_zero() || !total_c.is_zero() {
        return Err(HeckeError::Domain("weights violate the mark relation".into()));
    }
    let nonconst: Vec<usize> = nodes.iter().filter(|n| n.lambda.iter().any(|&x| x != 0)).map(|n| n.index).collect();
    let k0 = if rs == 0 {
        image.iter().filter(|c| c.angle == half()).count()
    } else {
        nodes
            .iter()
            .find(|n| n.source_node == Some(0))
            .map(|n| n.index)
            .ok_or_else(|| HeckeError::Domain("no node matches the extending source node".into()))?
    };
    let k: Vec<usize> = if rs == 0 { vec![k0] } else { nonconst };
    let j: Vec<usize> = (0..=l).filter(|i| !k.contains(i)).collect();
    let kln: Vec<i64> = nodes
        .iter()
        .filter(|n| k.contains(&n.index) && n.index != k0)
        .filter_map(|n| n.f)
        .map(|f| f.recip())
        .filter(|z| z.is_integer() && z.to_integer() > 1)
        .map(|z| z.to_integer())
        .collect();
    Ok(TransferDiagram { nodes, j, k, k0, kln })
}
