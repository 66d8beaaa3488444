//! The mu-function as an explicit multiset of factors, pole orders, regularized
//! residues and residual points.
//!
//! Over all roots `alpha` of `R_0` (both signs) the mu-function is, up to a
//! monomial and a sign,
//!
//! ```text
//!   prod (1 - alpha) / (1 - q^{-b m_+} alpha)
//!   prod over roots with m_- of (1 + alpha) / (1 + q^{-b m_-} alpha)
//! ```
//!
//! Monomials are never tracked: every residue is balanced at the end so that it
//! is symmetric under `v -> 1/v` up to sign.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HeckeError, Result};
use crate::laurent::{cyclotomic_product, divisors, frac_part, q_from_r64, q_int, CycloProduct, LaurentFunction, QRational};
use crate::linalg;
use crate::rootdata::{Affine, AlgebraLabel, CartanType, ParamHeckeAlgebra};
use crate::tableaux::Partition;

/// `1 - sign * v^shift * chi(t)` with `chi` a character in the chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MuFactor {
    pub character: Vec<i64>,
    pub sign: i8,
    /// Exponent of `v`, affine in the deformation parameters.
    pub shift: Affine,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuFactorSet {
    pub numerator: Vec<MuFactor>,
    pub denominator: Vec<MuFactor>,
}

impl MuFactorSet {
    /// Removes factors occurring in both numerator and denominator.
    fn cancel(mut self) -> Self {
        let mut den: Vec<Option<MuFactor>> = self.denominator.into_iter().map(Some).collect();
        let mut num = Vec::new();
        for f in self.numerator {
            if let Some(slot) = den.iter_mut().find(|d| d.as_ref() == Some(&f)) {
                *slot = None;
            } else {
                num.push(f);
            }
        }
        self.numerator = num;
        self.denominator = den.into_iter().flatten().collect();
        self
    }
}

pub fn mu_factors(h: &ParamHeckeAlgebra) -> MuFactorSet {
    let b = Rational64::from_integer(2 * h.base as i64);
    let mut numerator = Vec::new();
    let mut denominator = Vec::new();
    for (alpha, p) in h.roots.positive.iter().zip(&h.params) {
        let neg: Vec<i64> = alpha.iter().map(|c| -c).collect();
        for ch in [alpha.clone(), neg] {
            numerator.push(MuFactor { character: ch.clone(), sign: 1, shift: Affine::zero() });
            denominator.push(MuFactor { character: ch.clone(), sign: 1, shift: p.plus.scale(-b) });
            if let Some(m) = p.minus {
                numerator.push(MuFactor { character: ch.clone(), sign: -1, shift: Affine::zero() });
                denominator.push(MuFactor { character: ch, sign: -1, shift: m.scale(-b) });
            }
        }
    }
    MuFactorSet { numerator, denominator }.cancel()
}

/// One coordinate `exp(2 pi i angle) * v^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub angle: Rational64,
    pub exp: Affine,
}

impl Coord {
    pub fn new(angle: Rational64, exp: Affine) -> Self {
        Coord { angle: frac_part(angle), exp }
    }

    pub fn real(exp: Affine) -> Self {
        Coord::new(Rational64::zero(), exp)
    }

    pub fn inverse(&self) -> Coord {
        Coord::new(-self.angle, self.exp.neg())
    }

    fn key(&self) -> (Rational64, Rational64, Rational64, Rational64) {
        (self.exp.c, self.exp.em, self.exp.ep, -self.angle)
    }
}

impl Ord for Coord {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key().cmp(&o.key())
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.angle.is_zero() {
            if self.angle == Rational64::new(1, 2) {
                write!(f, "-")?;
            } else {
                write!(f, "e({})*", self.angle)?;
            }
        }
        write!(f, "v^({})", self.exp)
    }
}

/// Serialized coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordRecord {
    pub zeta_order: i64,
    pub zeta_power: i64,
    pub v_exponent_const: String,
    pub v_exponent_eps_minus: String,
    pub v_exponent_eps_plus: String,
}

/// A point of the torus in the chart of its algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub coords: Vec<Coord>,
    pub generic: bool,
}

impl ResidualPoint {
    pub fn new(coords: Vec<Coord>) -> Self {
        let generic = coords.iter().any(|c| !c.exp.is_constant());
        ResidualPoint { coords, generic }
    }

    pub fn empty() -> Self {
        ResidualPoint { coords: Vec::new(), generic: false }
    }

    /// `chi(r)` as (angle, v-exponent).
    pub fn eval(&self, ch: &[i64]) -> Coord {
        let mut angle = Rational64::zero();
        let mut exp = Affine::zero();
        for (&a, c) in ch.iter().zip(&self.coords) {
            if a != 0 {
                let k = Rational64::from_integer(a);
                angle += c.angle * k;
                exp = exp.add(&c.exp.scale(k));
            }
        }
        Coord::new(angle, exp)
    }

    /// Sets the deformation parameters to zero.
    pub fn specialize(&self) -> Self {
        ResidualPoint::new(self.coords.iter().map(|c| Coord::new(c.angle, c.exp.at_zero())).collect())
    }

    /// Unitary part is `+-1` in every coordinate.
    pub fn is_real(&self) -> bool {
        self.coords.iter().all(|c| c.angle.is_zero() || c.angle == Rational64::new(1, 2))
    }

    /// Unitary part trivial.
    pub fn is_positive_real(&self) -> bool {
        self.coords.iter().all(|c| c.angle.is_zero())
    }

    pub fn records(&self) -> Vec<CoordRecord> {
        self.coords
            .iter()
            .map(|c| CoordRecord {
                zeta_order: *c.angle.denom(),
                zeta_power: *c.angle.numer(),
                v_exponent_const: c.exp.c.to_string(),
                v_exponent_eps_minus: c.exp.em.to_string(),
                v_exponent_eps_plus: c.exp.ep.to_string(),
            })
            .collect()
    }
}

impl fmt::Display for ResidualPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Vanish {
    Identically,
    AtZero,
    No,
}

/// Value of a factor at a point: `1 - exp(2 pi i angle) v^exp`.
fn factor_at(f: &MuFactor, r: &ResidualPoint) -> Coord {
    let x = r.eval(&f.character);
    let extra = if f.sign < 0 { Rational64::new(1, 2) } else { Rational64::zero() };
    Coord::new(x.angle + extra, x.exp.add(&f.shift))
}

fn vanishing(c: &Coord) -> Vanish {
    if !c.angle.is_zero() || !c.exp.c.is_zero() {
        Vanish::No
    } else if c.exp.is_constant() {
        Vanish::Identically
    } else {
        Vanish::AtZero
    }
}

fn check_dims(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> Result<()> {
    if r.coords.len() != h.roots.dim() {
        return Err(HeckeError::Domain(format!(
            "point has {} coordinates, algebra {} needs {}",
            r.coords.len(),
            h.name(),
            h.roots.dim()
        )));
    }
    Ok(())
}

/// Denominator factors vanishing identically minus numerator factors vanishing
/// identically (in the deformation parameters when the point is generic).
pub fn pole_order(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> Result<i64> {
    check_dims(h, r)?;
    Ok(pole_order_unchecked(&mu_factors(h), r))
}

fn pole_order_unchecked(mu: &MuFactorSet, r: &ResidualPoint) -> i64 {
    let count = |fs: &[MuFactor]| fs.iter().filter(|f| vanishing(&factor_at(f, r)) == Vanish::Identically).count() as i64;
    count(&mu.denominator) - count(&mu.numerator)
}

/// Derivative coefficient of the exponent along `eps_- = t, eps_+ = ratio * t`.
fn slope(e: &Affine, ratio: Rational64) -> Rational64 {
    e.em + e.ep * ratio
}

/// `v^b - v^{-b}` in factored form.
pub fn torus_factor(b: u32) -> CycloProduct {
    let b = b as u64;
    let mut t = CycloProduct::monomial(q_int(1), -(b as i64));
    for d in divisors(2 * b) {
        t.mul_phi(d, 1);
    }
    t
}

/// Product of `(1 - exp(2 pi i angle) v^exp)^mult` over non-vanishing factors,
/// evaluated at zero deformation. The unitary parts must combine to a real
/// number.
pub fn constant_product(factors: &[(Coord, i64)]) -> Result<CycloProduct> {
    let mut cyc: Vec<(Rational64, i64, i64)> = Vec::new();
    let mut vpow = Rational64::zero();
    let mut unit_angle = Rational64::zero();
    for (c, mult) in factors {
        let a = c.exp.c;
        if !a.is_integer() {
            return Err(HeckeError::Capability(format!("fractional v-exponent {a}")));
        }
        let a = a.to_integer();
        if a == 0 && c.angle.is_zero() {
            return Err(HeckeError::Domain("vanishing constant factor".into()));
        }
        if a < 0 {
            // 1 - z v^a = -z v^a (1 - z^{-1} v^{-a})
            unit_angle += (c.angle + Rational64::new(1, 2)) * Rational64::from_integer(*mult);
            vpow += Rational64::from_integer(a * mult);
            cyc.push((-c.angle, -a, *mult));
        } else {
            cyc.push((c.angle, a, *mult));
        }
    }
    let unit = frac_part(unit_angle);
    let sign = if unit.is_zero() {
        1
    } else if unit == Rational64::new(1, 2) {
        -1
    } else {
        return Err(HeckeError::Domain("non-real constant product".into()));
    };
    let mut out = cyclotomic_product(&cyc)?;
    out.scalar *= q_int(sign);
    out.vpow += vpow.to_integer();
    Ok(out)
}

/// The regularized residue `tau * (v^b - v^{-b})^{-rank} * mu^({r})(r)`, balanced.
pub fn residue_cyclo(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> Result<CycloProduct> {
    check_dims(h, r)?;
    let mu = mu_factors(h);
    let rank = h.rank() as i64;
    let order = pole_order_unchecked(&mu, r);
    if order != rank {
        return Err(HeckeError::NotResidual(format!("pole order {order} at {r}, rank {rank}")));
    }
    let mut constants: Vec<(Coord, i64)> = Vec::new();
    let mut vanish_num = Vec::new();
    let mut vanish_den = Vec::new();
    for (fs, sgn) in [(&mu.numerator, 1i64), (&mu.denominator, -1i64)] {
        for f in fs.iter() {
            let c = factor_at(f, r);
            match vanishing(&c) {
                Vanish::Identically => {}
                Vanish::AtZero => {
                    if sgn > 0 {
                        vanish_num.push(c.exp);
                    } else {
                        vanish_den.push(c.exp);
                    }
                }
                Vanish::No => constants.push((c, sgn)),
            }
        }
    }
    if vanish_num.len() != vanish_den.len() {
        return Err(HeckeError::Regularity(format!(
            "{} vanishing numerator factors against {} in the denominator at {r}",
            vanish_num.len(),
            vanish_den.len()
        )));
    }
    let mut limit = None;
    for dir in [Rational64::one(), Rational64::new(1, 2)] {
        if vanish_num.iter().chain(&vanish_den).all(|e| !slope(e, dir).is_zero()) {
            let n: Rational64 = vanish_num.iter().map(|e| slope(e, dir)).product();
            let d: Rational64 = vanish_den.iter().map(|e| slope(e, dir)).product();
            limit = Some(n / d);
            break;
        }
    }
    let limit = limit.ok_or_else(|| HeckeError::Regularity(format!("no admissible limit direction at {r}")))?;
    let mut out = constant_product(&constants)?;
    out.scalar *= q_from_r64(limit);
    out = out.mul(&torus_factor(h.base).pow(-rank)).mul(&h.tau().to_cyclo());
    out.balanced()
}

pub fn residue_degree(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> Result<LaurentFunction> {
    Ok(residue_cyclo(h, r)?.to_laurent())
}

/// The residue split as rational constant times q-rational factor.
pub fn residue_qrational(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> Result<QRational> {
    residue_cyclo(h, r)?.to_qrational()
}

// ---------------------------------------------------------------------------
// Weyl orbits

fn apply_matrix(m: &[Vec<i64>], r: &ResidualPoint) -> ResidualPoint {
    ResidualPoint::new(m.iter().map(|row| r.eval(row)).collect())
}

/// The representative of the Weyl orbit used for deduplication. For the
/// signed-permutation charts every coordinate is put in the half with
/// nonnegative exponent and the coordinates are sorted decreasingly; otherwise
/// the orbit is generated and its maximum taken.
pub fn canonical_point(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> ResidualPoint {
    match h.roots.cartan {
        CartanType::B | CartanType::C => {
            let mut cs: Vec<Coord> = r
                .coords
                .iter()
                .map(|c| {
                    let inv = c.inverse();
                    if inv > *c {
                        inv
                    } else {
                        c.clone()
                    }
                })
                .collect();
            cs.sort_by(|a, b| b.cmp(a));
            ResidualPoint::new(cs)
        }
        _ => weyl_orbit(h, r).into_iter().max_by(|a, b| a.coords.cmp(&b.coords)).expect("nonempty orbit"),
    }
}

pub fn weyl_orbit(h: &ParamHeckeAlgebra, r: &ResidualPoint) -> Vec<ResidualPoint> {
    let mats: Vec<Vec<Vec<i64>>> = (0..h.rank()).map(|i| h.roots.reflection_matrix(i)).collect();
    let mut seen: HashSet<ResidualPoint> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(r.clone());
    queue.push_back(r.clone());
    while let Some(p) = queue.pop_front() {
        for m in &mats {
            let q = apply_matrix(m, &p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    let mut out: Vec<ResidualPoint> = seen.into_iter().collect();
    out.sort_by(|a, b| a.coords.cmp(&b.coords));
    out
}

pub fn weyl_equivalent(h: &ParamHeckeAlgebra, a: &ResidualPoint, b: &ResidualPoint) -> bool {
    canonical_point(h, a) == canonical_point(h, b)
}

// ---------------------------------------------------------------------------
// Enumeration

/// Largest rank handled by the subset enumeration.
pub const MAX_ENUMERATION_RANK: usize = 4;

/// One representative per Weyl orbit of residual points of the specialized
/// algebra, sorted.
pub fn residual_points(h: &ParamHeckeAlgebra) -> Result<Vec<ResidualPoint>> {
    enumerate(&h.specialized())
}

/// One representative per Weyl orbit of generic residual points: coordinates
/// affine in the deformation parameters, with pole order equal to the rank
/// identically in them.
pub fn generic_residual_points(h: &ParamHeckeAlgebra) -> Result<Vec<ResidualPoint>> {
    enumerate(h)
}

fn enumerate(h: &ParamHeckeAlgebra) -> Result<Vec<ResidualPoint>> {
    let h = h.clone();
    let n = h.rank();
    if n == 0 {
        return Ok(vec![ResidualPoint::empty()]);
    }
    if n > MAX_ENUMERATION_RANK {
        return Err(HeckeError::Capability(format!(
            "residual point enumeration supports rank <= {MAX_ENUMERATION_RANK}, got {n}"
        )));
    }
    let b2 = Rational64::from_integer(2 * h.base as i64);
    // Root conditions alpha(r) = zeta v^e that make a denominator factor vanish.
    let mut targets: Vec<(usize, Rational64, Affine)> = Vec::new();
    for (k, p) in h.params.iter().enumerate() {
        if !p.plus.is_zero() {
            let e = p.plus.scale(b2);
            targets.push((k, Rational64::zero(), e.clone()));
            targets.push((k, Rational64::zero(), e.neg()));
        }
        if let Some(m) = p.minus {
            if !m.is_zero() {
                let e = m.scale(b2);
                targets.push((k, Rational64::new(1, 2), e.clone()));
                targets.push((k, Rational64::new(1, 2), e.neg()));
            }
        }
    }
    let mu = mu_factors(&h);
    let roots = &h.roots.positive;
    let subsets: Vec<Vec<usize>> = (0..roots.len())
        .combinations(n)
        .filter(|s| {
            let m: Vec<Vec<i64>> = s.iter().map(|&i| roots[i].clone()).collect();
            linalg::rank(&linalg::from_int(&m)) == n
        })
        .collect();
    let raw: HashSet<ResidualPoint> = subsets
        .par_iter()
        .flat_map_iter(|s| {
            let a = linalg::from_int(&s.iter().map(|&i| roots[i].clone()).collect::<Vec<_>>());
            let inv = linalg::inverse(&a).expect("independent roots");
            let lattice = torsion_classes(&inv);
            let per_root: Vec<Vec<(Rational64, Affine)>> = s
                .iter()
                .map(|&i| targets.iter().filter(|t| t.0 == i).map(|t| (t.1, t.2.clone())).collect())
                .collect();
            let mut out = Vec::new();
            for choice in per_root.iter().multi_cartesian_product() {
                let phis: Vec<Rational64> = choice.iter().map(|c| c.0).collect();
                let theta0 = linalg::mat_vec(&inv, &phis);
                let exps: Vec<Affine> = inv
                    .iter()
                    .map(|row| row.iter().zip(&choice).fold(Affine::zero(), |acc, (k, c)| acc.add(&c.1.scale(*k))))
                    .collect();
                for shift in &lattice {
                    let coords = (0..n)
                        .map(|j| Coord::new(theta0[j] + shift[j], exps[j].clone()))
                        .collect::<Vec<_>>();
                    let p = ResidualPoint::new(coords);
                    if pole_order_unchecked(&mu, &p) == n as i64 {
                        out.push(p);
                    }
                }
            }
            out.into_iter()
        })
        .collect();
    let mut raw: Vec<ResidualPoint> = raw.into_iter().collect();
    raw.sort_by(|a, b| a.coords.cmp(&b.coords));
    let mut found: BTreeSet<Vec<Coord>> = BTreeSet::new();
    match h.roots.cartan {
        CartanType::B | CartanType::C => {
            for p in &raw {
                found.insert(canonical_point(&h, p).coords);
            }
        }
        _ => {
            let mut covered: HashSet<ResidualPoint> = HashSet::new();
            for p in &raw {
                if covered.contains(p) {
                    continue;
                }
                let orbit = weyl_orbit(&h, p);
                found.insert(orbit.last().expect("nonempty orbit").coords.clone());
                covered.extend(orbit);
            }
        }
    }
    Ok(found.into_iter().rev().map(ResidualPoint::new).collect())
}

/// Representatives of `A^{-1} Z^n` modulo `Z^n`, given `A^{-1}`.
fn torsion_classes(inv: &linalg::Mat) -> Vec<Vec<Rational64>> {
    let n = inv.len();
    let gens: Vec<Vec<Rational64>> = (0..n).map(|k| (0..n).map(|j| frac_part(inv[j][k])).collect()).collect();
    let mut seen: BTreeSet<Vec<Rational64>> = BTreeSet::new();
    let zero = vec![Rational64::zero(); n];
    seen.insert(zero.clone());
    let mut queue = vec![zero];
    while let Some(x) = queue.pop() {
        for g in &gens {
            let y: Vec<Rational64> = x.iter().zip(g).map(|(a, b)| frac_part(*a + *b)).collect();
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// The generic residual point of `C_r(m_-, m_+)[q^b]` attached to
/// `(pi_-, pi_+)`: coordinates `-q^{b(m_- + eps_- + j - i)}` over the boxes of
/// `pi_-` and `q^{b(m_+ + eps_+ + j - i)}` over the boxes of `pi_+`.
pub fn generic_point(h: &ParamHeckeAlgebra, pi_minus: &Partition, pi_plus: &Partition) -> Result<ResidualPoint> {
    let AlgebraLabel::C { r, m_minus, m_plus } = h.label else {
        return Err(HeckeError::Domain(format!("generic points from partitions need a C-type algebra, got {}", h.name())));
    };
    let size = (pi_minus.size() + pi_plus.size()) as usize;
    if size != r {
        return Err(HeckeError::Domain(format!("partitions of total size {size} for rank {r}")));
    }
    let b2 = Rational64::from_integer(2 * h.base as i64);
    let mut coords = Vec::with_capacity(r);
    for (pi, m, eps, angle) in [
        (pi_minus, m_minus, Affine::eps_minus(), Rational64::new(1, 2)),
        (pi_plus, m_plus, Affine::eps_plus(), Rational64::zero()),
    ] {
        for (i, j) in pi.boxes() {
            let e = Affine::constant(m + Rational64::from_integer(j - i)).add(&eps).scale(b2);
            coords.push(Coord::new(angle, e));
        }
    }
    Ok(ResidualPoint::new(coords))
}
