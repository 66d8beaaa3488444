//! Parameter classes of `C_r(m_-, m_+)`, the cuspidal building blocks `d` and
//! the normalizations of unipotent affine Hecke algebras.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_rational::Rational64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{HeckeError, Result};
use crate::laurent::{q_int, LaurentFunction, QRational};
use crate::mufn::{residue_qrational, ResidualPoint};
use crate::rootdata::{AlgebraLabel, ParamHeckeAlgebra};
use crate::stm::{kappa_eps, to_minimal_raw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParamClass {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl fmt::Display for ParamClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The class of `(m_-, m_+)` and the pair `{a, b}` read off from
/// `{|m_+ - m_-|, m_+ + m_-}` (absolute values of the parameters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassData {
    pub class: ParamClass,
    pub a: u32,
    pub b: u32,
}

fn is_half_int(x: Rational64) -> bool {
    *x.denom() == 2
}

fn in_quarter_grid(x: Rational64) -> bool {
    *x.denom() == 4
}

fn to_u32(x: Rational64) -> u32 {
    debug_assert!(x.is_integer() && !x.is_negative());
    x.to_integer() as u32
}

fn sorted(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Classifies `(m_-, m_+)`. Both parameters must lie in `Z/2` or both in
/// `1/4 + Z/2`.
pub fn classify_parameters(m_minus: Rational64, m_plus: Rational64) -> Result<ClassData> {
    let (mm, mp) = (m_minus.abs(), m_plus.abs());
    let x = (mp - mm).abs();
    let y = mp + mm;
    let half = Rational64::new(1, 2);
    let two = Rational64::from_integer(2);
    let quarter_m = in_quarter_grid(mm);
    let quarter_p = in_quarter_grid(mp);
    let coarse = |z: Rational64| z.is_integer() || is_half_int(z);
    if coarse(mm) && coarse(mp) {
        let (class, a, b) = match (is_half_int(mm), is_half_int(mp)) {
            (true, false) | (false, true) => {
                let (a, b) = sorted(to_u32(x - half), to_u32(y - half));
                (ParamClass::I, a, b)
            }
            (true, true) => {
                // {2a, 1 + 2b}
                let (even, odd) = if x.to_integer() % 2 == 0 { (x, y) } else { (y, x) };
                (ParamClass::II, to_u32(even / two), to_u32((odd - 1) / two))
            }
            (false, false) => {
                if x.to_integer() % 2 == 1 {
                    let (a, b) = sorted(to_u32((x - 1) / two), to_u32((y - 1) / two));
                    (ParamClass::III, a, b)
                } else {
                    let (a, b) = sorted(to_u32(x / two), to_u32(y / two));
                    (ParamClass::IV, a, b)
                }
            }
        };
        return Ok(ClassData { class, a, b });
    }
    if quarter_m && quarter_p {
        let (km, _) = kappa_eps(mm)?;
        let (kp, _) = kappa_eps(mp)?;
        let class = if (km - kp) % 2 != 0 { ParamClass::V } else { ParamClass::VI };
        // One of x, y is a half-integer (1/2 + a), the other an integer.
        let (h, n) = if is_half_int(x) { (x, y) } else { (y, x) };
        let a = to_u32(h - half);
        let b = match class {
            ParamClass::V => {
                if n.to_integer() % 2 != 1 {
                    return Err(HeckeError::Domain(format!("({m_minus}, {m_plus}) has inconsistent class V data")));
                }
                to_u32((n - 1) / two)
            }
            _ => {
                if n.to_integer() % 2 != 0 {
                    return Err(HeckeError::Domain(format!("({m_minus}, {m_plus}) has inconsistent class VI data")));
                }
                to_u32(n / two)
            }
        };
        return Ok(ClassData { class, a, b });
    }
    Err(HeckeError::Domain(format!(
        "parameters ({m_minus}, {m_plus}) are not both in Z/2 or both in 1/4 + Z/2"
    )))
}

/// The families of cuspidal building blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DFlavor {
    B,
    D,
    TwoA,
}

/// Default bound on `s` for [`cuspidal_d`].
pub const DEFAULT_MAX_D: u32 = 8;

fn d_cache() -> &'static Mutex<HashMap<(DFlavor, u32), QRational>> {
    static CACHE: OnceLock<Mutex<HashMap<(DFlavor, u32), QRational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The rank zero source whose transfer to a minimal object defines `d_s`.
fn d_source(flavor: DFlavor, s: u32) -> (Rational64, Rational64) {
    let s = Rational64::from_integer(s as i64);
    let half = Rational64::new(1, 2);
    match flavor {
        DFlavor::B => (s + half, s + half),
        DFlavor::D => (s, s),
        DFlavor::TwoA => (s * half, (s + 1) * half),
    }
}

/// Normalization of a minimal object. `C(1,1)[q]` and `C(1,1/2)[q^2]` carry an
/// anisotropic rank one torus in the Iwahori quotient, contributing `[2]^{-1}`.
pub fn minimal_tau(m_minus: Rational64, m_plus: Rational64) -> QRational {
    let one = Rational64::from_integer(1);
    let (a, b) = (m_minus.abs(), m_plus.abs());
    let pair = |x: Rational64, y: Rational64| (a == x && b == y) || (a == y && b == x);
    if pair(one, one) || pair(one, Rational64::new(1, 2)) {
        QRational::qint_power(2, -1)
    } else {
        QRational::one()
    }
}

/// q-factor of the residue at the image of the rank zero algebra
/// `C_0(m_-, m_+)` in its minimal object, normalized there.
pub fn transfer_normalization(m_minus: Rational64, m_plus: Rational64) -> Result<QRational> {
    let phi = to_minimal_raw(0, m_minus, m_plus)?;
    let p = phi.map_point(&ResidualPoint::empty())?;
    let AlgebraLabel::C { m_minus: tm, m_plus: tp, .. } = phi.target.label else {
        unreachable!("minimal objects are of type C")
    };
    let target = phi.target.specialized().with_tau(minimal_tau(tm, tp));
    Ok(residue_qrational(&target, &p)?.q_factor())
}

/// The cuspidal building block `d_s` of the given flavor, as a q-rational
/// function with trivial scalar.
pub fn cuspidal_d(flavor: DFlavor, s: u32) -> Result<QRational> {
    cuspidal_d_bounded(flavor, s, DEFAULT_MAX_D)
}

pub fn cuspidal_d_bounded(flavor: DFlavor, s: u32, max_s: u32) -> Result<QRational> {
    if s > max_s {
        return Err(HeckeError::Capability(format!("d_{s} exceeds the configured bound {max_s}")));
    }
    if s == 0 {
        return Ok(QRational::one());
    }
    if let Some(d) = d_cache().lock().expect("d cache").get(&(flavor, s)) {
        return Ok(d.clone());
    }
    let (mm, mp) = d_source(flavor, s);
    let d = transfer_normalization(mm, mp)?;
    d_cache().lock().expect("d cache").insert((flavor, s), d.clone());
    Ok(d)
}

/// The normalization `tau` of `C_r(m_-, m_+)` as a product of building blocks
/// determined by the class.
pub fn normalization(m_minus: Rational64, m_plus: Rational64) -> Result<QRational> {
    let ClassData { class, a, b } = classify_parameters(m_minus, m_plus)?;
    use DFlavor::*;
    Ok(match class {
        ParamClass::I => cuspidal_d(TwoA, a)?.mul(&cuspidal_d(TwoA, b)?),
        ParamClass::II => cuspidal_d(D, a)?.mul(&cuspidal_d(B, b)?),
        ParamClass::III => cuspidal_d(B, a)?.mul(&cuspidal_d(B, b)?),
        ParamClass::IV => cuspidal_d(D, a)?.mul(&cuspidal_d(D, b)?),
        ParamClass::V => cuspidal_d(TwoA, a)?.mul(&cuspidal_d(B, b)?.substitute_power(2)),
        ParamClass::VI => cuspidal_d(TwoA, a)?.mul(&cuspidal_d(D, b)?.substitute_power(2)),
    })
}

/// The closed product `prod_{i=1}^{floor x} v^{2(x-i)i} / (1 + q^{2(x-i)})^i`
/// taken for `x = |m_- - m_+|` and for `x = |m_- + m_+|`.
pub fn d_product(m_minus: Rational64, m_plus: Rational64) -> Result<LaurentFunction> {
    let (mm, mp) = (m_minus.abs(), m_plus.abs());
    let mut out = LaurentFunction::one();
    for x in [(mm - mp).abs(), mm + mp] {
        let top = x.floor().to_integer();
        for i in 1..=top {
            let y = x - Rational64::from_integer(i);
            let num_exp = Rational64::from_integer(2 * i) * y;
            let den_exp = Rational64::from_integer(4) * y;
            if !num_exp.is_integer() || !den_exp.is_integer() {
                return Err(HeckeError::Domain(format!("fractional exponent in d_({m_minus},{m_plus})")));
            }
            let mono = LaurentFunction::monomial(q_int(1), num_exp.to_integer());
            let one_plus = LaurentFunction::one().add(&LaurentFunction::monomial(q_int(1), den_exp.to_integer()));
            out = out.mul(&mono).checked_div(&one_plus.pow(i)?)?;
        }
    }
    Ok(out)
}

/// `d_product` reduced to its q-factor; zero exponents contribute scalars only.
pub fn d_product_qfactor(m_minus: Rational64, m_plus: Rational64) -> Result<QRational> {
    let f = d_product(m_minus, m_plus)?;
    if f.is_zero() {
        return Err(HeckeError::Domain("zero product".into()));
    }
    Ok(f.qrational_split()?.q_factor())
}

// ---------------------------------------------------------------------------
// Group families, inner forms and cuspidal unipotent types

/// Adjoint group families covered by the type tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `PGL_{n+1}`.
    Pgl,
    /// `PU_{2n}`.
    PuEven,
    /// `PU_{2n+1}`.
    PuOdd,
    /// `SO_{2n+1}`.
    SoOdd,
    /// `PCSp_{2n}`.
    Pcsp,
    /// `P(CO^0_{2n})`.
    PcoPlus,
    /// `P((CO^*_{2n})^0)`, Iwahori-Matsumoto algebra of rank `n - 1`.
    PcoStar,
    /// `3D4`; `n` is ignored.
    ThreeD4,
    /// Split `G2`; `n` is ignored.
    G2Split,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Pgl,
        Family::PuEven,
        Family::PuOdd,
        Family::SoOdd,
        Family::Pcsp,
        Family::PcoPlus,
        Family::PcoStar,
        Family::ThreeD4,
        Family::G2Split,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Pgl => "PGL",
            Family::PuEven => "PU_even",
            Family::PuOdd => "PU_odd",
            Family::SoOdd => "SO_odd",
            Family::Pcsp => "PCSp",
            Family::PcoPlus => "PCO_plus",
            Family::PcoStar => "PCO_star",
            Family::ThreeD4 => "3D4",
            Family::G2Split => "G2-split",
        }
    }

    /// The inner forms, as elements of `Omega / (1 - theta) Omega`.
    pub fn inner_forms(&self, n: u32) -> Vec<InnerForm> {
        use InnerForm::*;
        match self {
            Family::Pgl => (0..=n).map(|k| if k == 0 { E } else { Cyclic(k) }).collect(),
            Family::PuEven | Family::SoOdd | Family::Pcsp => vec![E, Eta],
            Family::PcoPlus => vec![E, Eta, Rho, RhoEta],
            Family::PcoStar => vec![E, RhoBar],
            Family::PuOdd | Family::ThreeD4 | Family::G2Split => vec![E],
        }
    }

    /// Order of the centre of the dual group fixed by the Frobenius.
    pub fn dual_center_order(&self, n: u32) -> u32 {
        match self {
            Family::Pgl => n + 1,
            Family::PuEven | Family::SoOdd | Family::Pcsp | Family::PcoStar => 2,
            Family::PcoPlus => 4,
            Family::PuOdd | Family::ThreeD4 | Family::G2Split => 1,
        }
    }

    /// Smallest rank `n` the family is defined for.
    pub fn min_rank(&self) -> u32 {
        match self {
            Family::Pgl | Family::PuEven | Family::PuOdd | Family::SoOdd => 1,
            Family::Pcsp => 2,
            Family::PcoPlus | Family::PcoStar => 4,
            Family::ThreeD4 | Family::G2Split => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = HeckeError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "pgl" => Family::Pgl,
            "pueven" => Family::PuEven,
            "puodd" => Family::PuOdd,
            "soodd" | "so" => Family::SoOdd,
            "pcsp" => Family::Pcsp,
            "pcoplus" | "pco0" | "pco" => Family::PcoPlus,
            "pcostar" => Family::PcoStar,
            "3d4" => Family::ThreeD4,
            "g2split" | "g2" => Family::G2Split,
            _ => return Err(HeckeError::Parse(format!("unknown family {s:?}"))),
        })
    }
}

/// An inner form label. `Cyclic(k)` is `u^k` in the cyclic group of `PGL_{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InnerForm {
    E,
    Eta,
    Rho,
    RhoEta,
    RhoBar,
    Cyclic(u32),
}

impl fmt::Display for InnerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerForm::E => f.write_str("e"),
            InnerForm::Eta => f.write_str("eta"),
            InnerForm::Rho => f.write_str("rho"),
            InnerForm::RhoEta => f.write_str("rho_eta"),
            InnerForm::RhoBar => f.write_str("rho_bar"),
            InnerForm::Cyclic(k) => write!(f, "u^{k}"),
        }
    }
}

impl std::str::FromStr for InnerForm {
    type Err = HeckeError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "e" | "split" | "1" => InnerForm::E,
            "eta" => InnerForm::Eta,
            "rho" => InnerForm::Rho,
            "rho_eta" | "rhoeta" => InnerForm::RhoEta,
            "rho_bar" | "rhobar" => InnerForm::RhoBar,
            _ => {
                let k = t
                    .strip_prefix("u^")
                    .or_else(|| t.strip_prefix('u'))
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| HeckeError::Parse(format!("unknown inner form {s:?}")))?;
                if k == 0 {
                    InnerForm::E
                } else {
                    InnerForm::Cyclic(k)
                }
            }
        })
    }
}

/// The label of a cuspidal unipotent type within its family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeLabel {
    /// `(a, b)`: classical pair of cuspidal blocks on both sides.
    Pair { a: u32, b: u32 },
    /// `(s, t)`: two swapped blocks plus a unitary block.
    Twisted { s: u32, t: u32 },
    /// Division algebra of the given degree with `d + 1` copies.
    Division { degree: u32, copies: u32 },
    /// Exceptional types by name.
    Named(&'static str),
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeLabel::Pair { a, b } => write!(f, "(a,b)=({a},{b})"),
            TypeLabel::Twisted { s, t } => write!(f, "(s,t)=({s},{t})"),
            TypeLabel::Division { degree, copies } => write!(f, "D{degree}^{copies}"),
            TypeLabel::Named(s) => f.write_str(s),
        }
    }
}

/// A cuspidal unipotent type together with its normalized Hecke algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnipotentType {
    pub family: Family,
    pub n: u32,
    pub inner_form: InnerForm,
    pub label: TypeLabel,
    pub algebra: AlgebraLabel,
    pub base: u32,
    /// `|Omega_1|`, the number of copies of the algebra.
    pub omega1: u32,
    /// The rational part of `tau(1)`.
    pub tau_q: Rational64,
    /// `tau(1)` without the split torus factor: `tau_q` times the q-factor.
    pub tau: QRational,
}

pub(crate) fn fmt_rat(x: Rational64) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl UnipotentType {
    /// The normalized algebra, undeformed.
    pub fn hecke(&self) -> Result<ParamHeckeAlgebra> {
        let h = match self.algebra {
            AlgebraLabel::C { r, m_minus, m_plus } => ParamHeckeAlgebra::c_type(r, m_minus, m_plus, self.base)?,
            AlgebraLabel::A { n } => ParamHeckeAlgebra::a_type(n, self.base)?,
            AlgebraLabel::G2 { m_long, m_short } => ParamHeckeAlgebra::g2(m_long, m_short, self.base)?,
            AlgebraLabel::F4 { m_long, m_short } => ParamHeckeAlgebra::f4(m_long, m_short, self.base)?,
        };
        Ok(h.with_tau(self.tau.clone()))
    }

    pub fn rank(&self) -> usize {
        match self.algebra {
            AlgebraLabel::C { r, .. } => r,
            AlgebraLabel::A { n } => n,
            AlgebraLabel::G2 { .. } => 2,
            AlgebraLabel::F4 { .. } => 4,
        }
    }

    /// `(m_-, m_+)` for classical algebras.
    pub fn params(&self) -> Option<(Rational64, Rational64)> {
        match self.algebra {
            AlgebraLabel::C { m_minus, m_plus, .. } => Some((m_minus, m_plus)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, mm, mp) = match self.algebra {
            AlgebraLabel::C { m_minus, m_plus, .. } => ("C", fmt_rat(m_minus), fmt_rat(m_plus)),
            AlgebraLabel::A { .. } => ("A", "1".to_string(), "1".to_string()),
            AlgebraLabel::G2 { m_long, m_short } => ("G2", fmt_rat(m_long), fmt_rat(m_short)),
            AlgebraLabel::F4 { m_long, m_short } => ("F4", fmt_rat(m_long), fmt_rat(m_short)),
        };
        serde_json::json!({
            "family": self.family.name(),
            "n": self.n,
            "inner_form": self.inner_form.to_string(),
            "label": self.label.to_string(),
            "algebra": {
                "kind": kind,
                "r": self.rank(),
                "m_minus": mm,
                "m_plus": mp,
                "base": self.base,
                "name": self.hecke().map(|h| h.name()).unwrap_or_default(),
            },
            "omega1": self.omega1,
            "tau_q_rational": fmt_rat(self.tau_q),
            "tau": self.tau.to_string(),
        })
    }
}

/// Rational part of the degree of the cuspidal unipotent character of a
/// classical finite group: `B_{s^2+s}` gives `2^{-s}`, `D_{s^2}` and
/// `2D_{s^2}` give `2^{1-s}` for `s > 0`, trivial blocks give `1`.
fn cuspidal_rational_b(s: u32) -> Rational64 {
    Rational64::new(1, 1 << s)
}

fn cuspidal_rational_d(s: u32) -> Rational64 {
    if s == 0 {
        Rational64::from_integer(1)
    } else {
        Rational64::new(1, 1 << (s - 1))
    }
}

fn pow2(e: i64) -> Rational64 {
    if e >= 0 {
        Rational64::from_integer(1 << e)
    } else {
        Rational64::new(1, 1 << (-e))
    }
}

fn triangular(t: u32) -> u32 {
    t * (t + 1) / 2
}

/// `|Omega_1|` as the ratio of the cuspidal rational part to `tau_Q`.
fn omega_from_ratio(cusp: Rational64, tau_q: Rational64) -> Result<u32> {
    let w = cusp / tau_q;
    if !w.is_integer() || w.to_integer() < 1 {
        return Err(HeckeError::Domain(format!("inconsistent |Omega_1| = {w}")));
    }
    Ok(w.to_integer() as u32)
}

struct TypeBuilder {
    family: Family,
    n: u32,
}

impl TypeBuilder {
    fn classical(
        &self,
        inner_form: InnerForm,
        label: TypeLabel,
        r: u32,
        m: (Rational64, Rational64),
        base: u32,
        omega1: u32,
        tau_q: Rational64,
    ) -> Result<UnipotentType> {
        let (m_minus, m_plus) = m;
        let qpart = normalization(m_minus, m_plus)?.q_factor();
        let tau = qpart.mul(&QRational::from_scalar(crate::laurent::r64_to_q(tau_q)));
        Ok(UnipotentType {
            family: self.family,
            n: self.n,
            inner_form,
            label,
            algebra: AlgebraLabel::C { r: r as usize, m_minus, m_plus },
            base,
            omega1,
            tau_q,
            tau,
        })
    }
}

fn quarter(num: i64) -> Rational64 {
    Rational64::new(num, 4)
}

/// Twisted `(s, t)` types: `2(r + 1) = n - 2 sq(s) - T(t) + shift` with
/// `m_+ = (c + 2t + 4s)/4`, `m_- = |c' - 2t + 4s|/4` as chosen by the caller.
fn twisted_pairs(n: u32, sq: impl Fn(u32) -> u32, shift: i64) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for s in 0.. {
        if 2 * sq(s) > n + shift as u32 {
            break;
        }
        for t in 0.. {
            let used = 2 * sq(s) as i64 + triangular(t) as i64;
            let twice = n as i64 - used + shift;
            if twice < 2 {
                if used > n as i64 + shift {
                    break;
                }
                continue;
            }
            if twice % 2 == 0 {
                out.push((s, t, (twice / 2 - 1) as u32));
            }
        }
    }
    out
}

/// All cuspidal unipotent types of the inner form `inner_form` of the family
/// at rank `n`, with their normalized Hecke algebras.
pub fn enumerate_cuspidal_types(family: Family, n: u32, inner_form: InnerForm) -> Result<Vec<UnipotentType>> {
    if n < family.min_rank() {
        return Err(HeckeError::Capability(format!("{family} needs n >= {}", family.min_rank())));
    }
    if !family.inner_forms(n).contains(&inner_form) {
        return Err(HeckeError::Capability(format!("{family} of rank {n} has no inner form {inner_form}")));
    }
    let tb = TypeBuilder { family, n };
    let half = Rational64::new(1, 2);
    let int = |x: i64| Rational64::from_integer(x);
    let mut out = Vec::new();
    match family {
        Family::Pgl => {
            let k = match inner_form {
                InnerForm::E => 0,
                InnerForm::Cyclic(k) => k,
                _ => unreachable!(),
            };
            let order = (n + 1) / gcd(k, n + 1);
            let d = (n + 1) / order - 1;
            let tau = QRational::from_scalar(crate::laurent::q_frac(1, order as i64)).mul(&QRational::qint_power(order as u64, -1));
            out.push(UnipotentType {
                family,
                n,
                inner_form,
                label: TypeLabel::Division { degree: order, copies: d + 1 },
                algebra: AlgebraLabel::A { n: d as usize },
                base: order,
                omega1: order,
                tau_q: Rational64::new(1, order as i64),
                tau,
            });
        }
        Family::PuEven | Family::PuOdd => {
            let big_n = if family == Family::PuEven { 2 * n } else { 2 * n + 1 };
            let tau_q = Rational64::new(1, family.dual_center_order(n) as i64);
            for b in 0.. {
                if triangular(b) > big_n {
                    break;
                }
                for a in 0..=b {
                    let used = triangular(a) + triangular(b);
                    if used > big_n || (big_n - used) % 2 != 0 {
                        continue;
                    }
                    let form = if family == Family::PuOdd || triangular(a) % 2 == 0 { InnerForm::E } else { InnerForm::Eta };
                    if form != inner_form {
                        continue;
                    }
                    let r = (big_n - used) / 2;
                    let m = (Rational64::new((b - a) as i64, 2), Rational64::new(1 + (a + b) as i64, 2));
                    let omega1 = if family == Family::PuEven && a == b && r == 0 { 2 } else { 1 };
                    out.push(tb.classical(inner_form, TypeLabel::Pair { a, b }, r, m, 2, omega1, tau_q)?);
                }
            }
        }
        Family::SoOdd => {
            let want_odd = inner_form == InnerForm::Eta;
            for a in 0.. {
                if a * a > n {
                    break;
                }
                if (a % 2 == 1) != want_odd {
                    continue;
                }
                for b in 0.. {
                    if a * a + b * b + b > n {
                        break;
                    }
                    let r = n - a * a - b * b - b;
                    let m_plus = half + int((a + b) as i64);
                    let m_minus = (half - int(a as i64) + int(b as i64)).abs();
                    let tau_q = pow2(-((a + b) as i64));
                    let cusp = cuspidal_rational_d(a) * cuspidal_rational_b(b);
                    let omega1 = omega_from_ratio(cusp, tau_q)?;
                    out.push(tb.classical(inner_form, TypeLabel::Pair { a, b }, r, (m_minus, m_plus), 1, omega1, tau_q)?);
                }
            }
        }
        Family::Pcsp => match inner_form {
            InnerForm::E => {
                for b in 0.. {
                    if b * b + b > n {
                        break;
                    }
                    for a in 0..=b {
                        let used = a * a + a + b * b + b;
                        if used > n {
                            continue;
                        }
                        let r = n - used;
                        let m = (int((b - a) as i64), int(1 + (a + b) as i64));
                        let omega1 = if a == b && r == 0 { 2 } else { 1 };
                        let cusp = cuspidal_rational_b(a) * cuspidal_rational_b(b);
                        let tau_q = cusp / int(omega1 as i64);
                        out.push(tb.classical(inner_form, TypeLabel::Pair { a, b }, r, m, 1, omega1, tau_q)?);
                    }
                }
            }
            _ => {
                for (s, t, r) in twisted_pairs(n, |s| s * s + s, 2) {
                    let m_plus = quarter(3 + 2 * t as i64 + 4 * s as i64);
                    let m_minus = quarter(1 - 2 * t as i64 + 4 * s as i64).abs();
                    let tau_q = pow2(-(s as i64) - 1);
                    let omega1 = omega_from_ratio(cuspidal_rational_b(s), tau_q)?;
                    out.push(tb.classical(inner_form, TypeLabel::Twisted { s, t }, r, (m_minus, m_plus), 2, omega1, tau_q)?);
                }
            }
        },
        Family::PcoPlus => match inner_form {
            InnerForm::E | InnerForm::Eta => {
                let parity = if inner_form == InnerForm::E { 0 } else { 1 };
                for b in 0.. {
                    if b * b > n {
                        break;
                    }
                    if b % 2 != parity {
                        continue;
                    }
                    for a in (parity..=b).step_by(2) {
                        if a * a + b * b > n {
                            continue;
                        }
                        let r = n - a * a - b * b;
                        let m = (int((b - a) as i64), int((a + b) as i64));
                        let m_plus = (a + b) as i64;
                        let tau_q = if (a == b && r == 0) || (a == 0 && b == 0) { pow2(-m_plus) } else { pow2(1 - m_plus) };
                        let cusp = cuspidal_rational_d(a) * cuspidal_rational_d(b);
                        let omega1 = omega_from_ratio(cusp, tau_q)?;
                        out.push(tb.classical(inner_form, TypeLabel::Pair { a, b }, r, m, 1, omega1, tau_q)?);
                    }
                }
            }
            _ => {
                for (s, t, r) in twisted_pairs(n, |s| s * s, 2) {
                    let t_ok = if n % 2 == 0 { t % 4 == 0 || t % 4 == 3 } else { t % 4 == 1 || t % 4 == 2 };
                    if s % 2 != n % 2 || !t_ok {
                        continue;
                    }
                    let m_plus = quarter(1 + 2 * t as i64 + 4 * s as i64);
                    let m_minus = quarter(1 + 2 * t as i64 - 4 * s as i64).abs();
                    let tau_q = pow2(-(s as i64) - 1);
                    let omega1 = omega_from_ratio(cuspidal_rational_d(s), tau_q)?;
                    out.push(tb.classical(inner_form, TypeLabel::Twisted { s, t }, r, (m_minus, m_plus), 2, omega1, tau_q)?);
                }
            }
        },
        Family::PcoStar => {
            // Iwahori-Matsumoto algebra C_{n-1}(1,1)[q].
            let im = n - 1;
            match inner_form {
                InnerForm::E => {
                    for a in (0..).step_by(2) {
                        if a * a > im + 1 {
                            break;
                        }
                        for b in (1..).step_by(2) {
                            if a * a + b * b > im + 1 {
                                break;
                            }
                            let r = im + 1 - a * a - b * b;
                            let m = (int((a as i64 - b as i64).abs()), int((a + b) as i64));
                            let tau_q = pow2(1 - (a + b) as i64);
                            let cusp = cuspidal_rational_d(a) * cuspidal_rational_d(b);
                            let omega1 = omega_from_ratio(cusp, tau_q)?;
                            out.push(tb.classical(inner_form, TypeLabel::Pair { a, b }, r, m, 1, omega1, tau_q)?);
                        }
                    }
                }
                _ => {
                    for (s, t, r) in twisted_pairs(im, |s| s * s, 3) {
                        let t_ok = if im % 2 == 0 { t % 4 == 1 || t % 4 == 2 } else { t % 4 == 0 || t % 4 == 3 };
                        if s % 2 != im % 2 || !t_ok {
                            continue;
                        }
                        let m_plus = quarter(1 + 2 * t as i64 + 4 * s as i64);
                        let m_minus = quarter(1 + 2 * t as i64 - 4 * s as i64).abs();
                        let tau_q = pow2(-(s as i64));
                        let omega1 = omega_from_ratio(cuspidal_rational_d(s), tau_q)?;
                        out.push(tb.classical(inner_form, TypeLabel::Twisted { s, t }, r, (m_minus, m_plus), 2, omega1, tau_q)?);
                    }
                }
            }
        }
        Family::ThreeD4 | Family::G2Split => out.extend(exceptional_types(family)?),
    }
    out.sort_by(|x, y| x.label.cmp(&y.label));
    Ok(out)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Volumes and exceptional cuspidal data

/// Reductive quotients of parahoric subgroups, for volume computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientType {
    SplitTorus(u32),
    /// The anisotropic torus of norm one elements of degree `m`, rank `m - 1`.
    NormOneTorus(u32),
    /// `PGL_1` of a division algebra of degree `d`, including `|Omega| = d`.
    DivisionAlgebraUnits(u32),
    A(u32),
    TwoA(u32),
    B(u32),
    C(u32),
    D(u32),
    TwoD(u32),
    G2,
    F4,
    ThreeD4,
}

/// Degrees `d_i` with the Frobenius eigenvalue signs `e_i = +-1`, and `N`.
fn degrees(t: QuotientType) -> Result<(Vec<(i64, i64)>, i64)> {
    use QuotientType::*;
    Ok(match t {
        A(n) => ((2..=n as i64 + 1).map(|d| (d, 1)).collect(), (n * (n + 1) / 2) as i64),
        TwoA(n) => ((2..=n as i64 + 1).map(|d| (d, if d % 2 == 0 { 1 } else { -1 })).collect(), (n * (n + 1) / 2) as i64),
        B(n) | C(n) => ((1..=n as i64).map(|i| (2 * i, 1)).collect(), (n * n) as i64),
        D(n) | TwoD(n) if n >= 2 => {
            let mut ds: Vec<(i64, i64)> = (1..n as i64).map(|i| (2 * i, 1)).collect();
            ds.push((n as i64, if matches!(t, TwoD(_)) { -1 } else { 1 }));
            (ds, (n * (n - 1)) as i64)
        }
        G2 => (vec![(2, 1), (6, 1)], 6),
        F4 => (vec![(2, 1), (6, 1), (8, 1), (12, 1)], 24),
        _ => return Err(HeckeError::Capability(format!("no degree data for {t:?}"))),
    })
}

/// `v^{-dim} |P(F_q)|` for the reductive quotient `P`, that is
/// `v^N prod_i (v^{d_i} - e_i v^{-d_i})`.
pub fn group_order_volume(t: QuotientType) -> Result<LaurentFunction> {
    let vmv = |k: i64, sign: i64| {
        LaurentFunction::from_terms(&[(k, crate::laurent::Q::from_integer(1.into())), (-k, q_int(-sign))])
    };
    Ok(match t {
        QuotientType::SplitTorus(k) => vmv(1, 1).pow(k as i64)?,
        QuotientType::NormOneTorus(m) => crate::laurent::qint(m as i64)?,
        QuotientType::DivisionAlgebraUnits(d) => crate::laurent::qint(d as i64)?.scale(&q_int(d as i64)),
        QuotientType::ThreeD4 => {
            // Degrees 2, 6 and 4 twice; the two 4s carry the primitive cube roots
            // of unity, whose product (v^4 - w v^-4)(v^4 - w^2 v^-4) = v^8 + 1 + v^-8.
            let triality = LaurentFunction::from_terms(&[(8, q_int(1)), (0, q_int(1)), (-8, q_int(1))]);
            LaurentFunction::monomial(q_int(1), 12).mul(&vmv(2, 1)).mul(&vmv(6, 1)).mul(&triality)
        }
        _ => {
            let (ds, big_n) = degrees(t)?;
            let mut acc = LaurentFunction::monomial(q_int(1), big_n);
            for (d, e) in ds {
                acc = acc.mul(&vmv(d, e));
            }
            acc
        }
    })
}

/// A unipotent degree `c q^k prod Phi_d(q)^{e_d}` as a function of `v`.
pub fn unipotent_degree(c: Rational64, q_power: i64, phis: &[(u64, i64)]) -> LaurentFunction {
    let mut cp = crate::laurent::CycloProduct::monomial(crate::laurent::r64_to_q(c), 2 * q_power);
    for &(d, e) in phis {
        for f in crate::laurent::cyclotomic_of_power(d, 2) {
            cp.mul_phi(f, e);
        }
    }
    cp.to_laurent()
}

/// `deg / vol` reduced to a q-rational number.
fn cuspidal_tau(deg: &LaurentFunction, vol: &LaurentFunction) -> Result<QRational> {
    let cp = deg.checked_div(vol)?.to_cyclo()?.balanced()?;
    cp.to_qrational()
}

/// Cuspidal unipotent characters of `G2(F_q)` and `3D4(F_q)`: name, degree
/// data `(c, q^k, Phi_d^e)`.
pub fn exceptional_cuspidals(family: Family) -> Vec<(&'static str, Rational64, i64, Vec<(u64, i64)>)> {
    match family {
        Family::G2Split => vec![
            ("G2[1]", Rational64::new(1, 6), 1, vec![(1, 2), (6, 1)]),
            ("G2[-1]", Rational64::new(1, 2), 1, vec![(1, 2), (3, 1)]),
            ("G2[theta]", Rational64::new(1, 3), 1, vec![(1, 2), (2, 2)]),
            ("G2[theta^2]", Rational64::new(1, 3), 1, vec![(1, 2), (2, 2)]),
        ],
        Family::ThreeD4 => vec![
            ("3D4[1]", Rational64::new(1, 2), 3, vec![(1, 2), (12, 1)]),
            ("3D4[-1]", Rational64::new(1, 2), 3, vec![(1, 2), (3, 2)]),
        ],
        _ => Vec::new(),
    }
}

fn exceptional_types(family: Family) -> Result<Vec<UnipotentType>> {
    let one = Rational64::from_integer(1);
    let (algebra, quotient, iwahori_tau) = match family {
        Family::G2Split => (AlgebraLabel::G2 { m_long: one, m_short: one }, QuotientType::G2, QRational::one()),
        _ => (
            AlgebraLabel::G2 { m_long: Rational64::from_integer(3), m_short: one },
            QuotientType::ThreeD4,
            QRational::qint_power(3, -1),
        ),
    };
    let mut out = vec![UnipotentType {
        family,
        n: 0,
        inner_form: InnerForm::E,
        label: TypeLabel::Named("iwahori"),
        algebra,
        base: 1,
        omega1: 1,
        tau_q: one,
        tau: iwahori_tau,
    }];
    let vol = group_order_volume(quotient)?;
    for (name, c, k, phis) in exceptional_cuspidals(family) {
        let tau = cuspidal_tau(&unipotent_degree(c, k, &phis), &vol)?;
        out.push(UnipotentType {
            family,
            n: 0,
            inner_form: InnerForm::E,
            label: TypeLabel::Named(name),
            algebra: AlgebraLabel::C { r: 0, m_minus: Rational64::from_integer(0), m_plus: Rational64::from_integer(0) },
            base: 1,
            omega1: 1,
            tau_q: crate::laurent::q_to_r64(&tau.scalar.abs()).unwrap_or(one),
            tau,
        });
    }
    Ok(out)
}
