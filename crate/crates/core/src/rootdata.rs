//! Root systems, parameter functions and spectral diagrams.
//!
//! Terminology follows the convention where the roots of the dual group are
//! called roots: the root system `R_0` of a Hecke algebra lives in the character
//! lattice `X` of the torus `T`, and `alpha(t)` is the value of the character.
//!
//! Charts. Types B, C and D use the standard basis `e_i` of `X`. Types A, G2 and
//! F4 use the basis of simple roots (so `X` is the root lattice). A point of `T`
//! is given by its values on the chart basis.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HeckeError, Result};
use crate::laurent::QRational;
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    G2,
    F4,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CartanType::A => "A",
            CartanType::B => "B",
            CartanType::C => "C",
            CartanType::D => "D",
            CartanType::G2 => "G",
            CartanType::F4 => "F",
        };
        f.write_str(s)
    }
}

/// A reduced root system with a fixed chart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSystem {
    pub cartan: CartanType,
    pub rank: usize,
    pub positive: Vec<Vec<i64>>,
    pub simple: Vec<Vec<i64>>,
    pub weyl_order: u64,
    /// Inner products of chart basis vectors; long roots have length 2 except in
    /// the `e_i` charts, which use the standard form.
    pub gram: Vec<Vec<Rational64>>,
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

impl RootSystem {
    pub fn build(cartan: CartanType, rank: usize) -> Result<RootSystem> {
        let bad = || Err(HeckeError::Domain(format!("invalid rank {rank} for type {cartan}")));
        match cartan {
            CartanType::A => Ok(Self::from_cartan_matrix(cartan, &a_gram(rank), factorial(rank as u64 + 1))),
            CartanType::B | CartanType::C | CartanType::D => {
                if cartan == CartanType::D && rank == 1 {
                    return bad();
                }
                Ok(Self::classical(cartan, rank))
            }
            CartanType::G2 => {
                if rank != 2 {
                    return bad();
                }
                let t = |n: i64, d: i64| Rational64::new(n, d);
                let gram = vec![vec![t(2, 3), t(-1, 1)], vec![t(-1, 1), t(2, 1)]];
                Ok(Self::from_cartan_matrix(cartan, &gram, 12))
            }
            CartanType::F4 => {
                if rank != 4 {
                    return bad();
                }
                let t = |n: i64, d: i64| Rational64::new(n, d);
                let z = t(0, 1);
                let gram = vec![
                    vec![t(2, 1), t(-1, 1), z, z],
                    vec![t(-1, 1), t(2, 1), t(-1, 1), z],
                    vec![z, t(-1, 1), t(1, 1), t(-1, 2)],
                    vec![z, z, t(-1, 2), t(1, 1)],
                ];
                Ok(Self::from_cartan_matrix(cartan, &gram, 1152))
            }
        }
    }

    fn classical(cartan: CartanType, n: usize) -> RootSystem {
        let mut positive = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut a = vec![0; n];
                a[i] = 1;
                a[j] = -1;
                positive.push(a);
                let mut b = vec![0; n];
                b[i] = 1;
                b[j] = 1;
                positive.push(b);
            }
        }
        let short = match cartan {
            CartanType::B => 1,
            CartanType::C => 2,
            _ => 0,
        };
        if short > 0 {
            for i in 0..n {
                let mut a = vec![0; n];
                a[i] = short;
                positive.push(a);
            }
        }
        let mut simple: Vec<Vec<i64>> = (0..n.saturating_sub(1))
            .map(|i| {
                let mut a = vec![0; n];
                a[i] = 1;
                a[i + 1] = -1;
                a
            })
            .collect();
        if n > 0 {
            match cartan {
                CartanType::B => simple.push(unit(n, n - 1)),
                CartanType::C => {
                    let mut a = vec![0; n];
                    a[n - 1] = 2;
                    simple.push(a);
                }
                _ => {
                    let mut a = vec![0; n];
                    a[n - 2] = 1;
                    a[n - 1] = 1;
                    simple.push(a);
                }
            }
        }
        let nn = n as u64;
        let weyl_order = match cartan {
            CartanType::D => (factorial(nn) << nn) / 2,
            _ => factorial(nn) << nn,
        };
        let gram = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational64::one() } else { Rational64::zero() }).collect())
            .collect();
        RootSystem { cartan, rank: n, positive, simple, weyl_order, gram }
    }

    /// Roots in the simple-root chart, generated as the Weyl orbit of the simple roots.
    fn from_cartan_matrix(cartan: CartanType, gram: &[Vec<Rational64>], weyl_order: u64) -> RootSystem {
        let n = gram.len();
        let mut rs = RootSystem {
            cartan,
            rank: n,
            positive: Vec::new(),
            simple: (0..n).map(|i| unit(n, i)).collect(),
            weyl_order,
            gram: gram.to_vec(),
        };
        let mut all: BTreeSet<Vec<i64>> = rs.simple.iter().cloned().collect();
        let mut frontier: Vec<Vec<i64>> = all.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for i in 0..n {
                let y = rs.reflect(i, &x);
                if all.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let mut pos: Vec<Vec<i64>> = all.into_iter().filter(|r| r.iter().all(|&c| c >= 0)).collect();
        pos.sort_by(|a, b| {
            let ha: i64 = a.iter().sum();
            let hb: i64 = b.iter().sum();
            ha.cmp(&hb).then_with(|| b.cmp(a))
        });
        rs.positive = pos;
        rs
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn inner(&self, a: &[i64], b: &[i64]) -> Rational64 {
        let mut s = Rational64::zero();
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    s += self.gram[i][j] * Rational64::from_integer(x * y);
                }
            }
        }
        s
    }

    /// `<x, alpha^vee> = 2 (x, alpha) / (alpha, alpha)`.
    pub fn pairing(&self, x: &[i64], alpha: &[i64]) -> i64 {
        let p = Rational64::from_integer(2) * self.inner(x, alpha) / self.inner(alpha, alpha);
        assert!(p.is_integer(), "non-integral pairing");
        p.to_integer()
    }

    /// The coroot `2 alpha / (alpha, alpha)` expressed in the chart (integral in
    /// all charts used here).
    pub fn coroot(&self, alpha: &[i64]) -> Vec<i64> {
        let n2 = self.inner(alpha, alpha);
        alpha
            .iter()
            .map(|&c| {
                let x = Rational64::from_integer(2 * c) / n2;
                assert!(x.is_integer(), "non-integral coroot");
                x.to_integer()
            })
            .collect()
    }

    pub fn reflect(&self, i: usize, x: &[i64]) -> Vec<i64> {
        let a = &self.simple[i];
        let p = self.pairing(x, a);
        x.iter().zip(a).map(|(xi, ai)| xi - p * ai).collect()
    }

    /// Reflection in an arbitrary root.
    pub fn reflect_in(&self, alpha: &[i64], x: &[i64]) -> Vec<i64> {
        let p = self.pairing(x, alpha);
        x.iter().zip(alpha).map(|(xi, ai)| xi - p * ai).collect()
    }

    /// Row `j` is the chart image of `s_i(basis_j)`; a point `t` moves to
    /// `(s_i t)_j = prod_k t_k^{M[j][k]}`.
    pub fn reflection_matrix(&self, i: usize) -> Vec<Vec<i64>> {
        (0..self.dim()).map(|j| self.reflect(i, &unit(self.dim(), j))).collect()
    }

    /// Coefficients of a vector in the basis of simple roots.
    pub fn simple_coefficients(&self, x: &[i64]) -> Option<Vec<Rational64>> {
        let a = linalg::from_int(&self.simple);
        let b: Vec<Rational64> = x.iter().map(|&c| Rational64::from_integer(c)).collect();
        linalg::solve_row_combination(&a, &b)
    }

    pub fn is_long(&self, alpha: &[i64]) -> bool {
        let n = self.inner(alpha, alpha);
        self.positive.iter().all(|b| self.inner(b, b) <= n)
    }

    pub fn all_roots(&self) -> Vec<Vec<i64>> {
        let mut out = self.positive.clone();
        out.extend(self.positive.iter().map(|r| r.iter().map(|c| -c).collect::<Vec<_>>()));
        out
    }

    pub fn height(&self, x: &[i64]) -> Rational64 {
        self.simple_coefficients(x).map(|c| c.into_iter().sum()).unwrap_or_else(Rational64::zero)
    }
}

fn a_gram(n: usize) -> Vec<Vec<Rational64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    Rational64::from_integer(if i == j {
                        2
                    } else if i.abs_diff(j) == 1 {
                        -1
                    } else {
                        0
                    })
                })
                .collect()
        })
        .collect()
}

pub fn build_root_system(cartan: CartanType, rank: usize) -> Result<RootSystem> {
    RootSystem::build(cartan, rank)
}

/// `c + em * eps_minus + ep * eps_plus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Affine {
    pub c: Rational64,
    pub em: Rational64,
    pub ep: Rational64,
}

impl Affine {
    pub fn constant(c: Rational64) -> Self {
        Affine { c, em: Rational64::zero(), ep: Rational64::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(Rational64::zero())
    }

    pub fn int(c: i64) -> Self {
        Self::constant(Rational64::from_integer(c))
    }

    pub fn eps_minus() -> Self {
        Affine { c: Rational64::zero(), em: Rational64::one(), ep: Rational64::zero() }
    }

    pub fn eps_plus() -> Self {
        Affine { c: Rational64::zero(), em: Rational64::zero(), ep: Rational64::one() }
    }

    pub fn add(&self, o: &Affine) -> Affine {
        Affine { c: self.c + o.c, em: self.em + o.em, ep: self.ep + o.ep }
    }

    pub fn sub(&self, o: &Affine) -> Affine {
        Affine { c: self.c - o.c, em: self.em - o.em, ep: self.ep - o.ep }
    }

    pub fn scale(&self, k: Rational64) -> Affine {
        Affine { c: self.c * k, em: self.em * k, ep: self.ep * k }
    }

    pub fn neg(&self) -> Affine {
        self.scale(-Rational64::one())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero() && self.em.is_zero() && self.ep.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.em.is_zero() && self.ep.is_zero()
    }

    /// Drops the deformation part.
    pub fn at_zero(&self) -> Affine {
        Affine::constant(self.c)
    }

    /// Reads a symbolic form `em * m_- + ep * m_+` at the base point
    /// `(m_-, m_+)`, keeping the deformation directions.
    pub fn instantiate(&self, m_minus: Rational64, m_plus: Rational64) -> Affine {
        Affine { c: self.c + self.em * m_minus + self.ep * m_plus, em: self.em, ep: self.ep }
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.c)?;
        if !self.em.is_zero() {
            write!(f, " + {}*e-", self.em)?;
        }
        if !self.ep.is_zero() {
            write!(f, " + {}*e+", self.ep)?;
        }
        Ok(())
    }
}

/// Parameters of one positive root, in units of `q^b`. A root with `minus`
/// contributes the factor pair `(1 + alpha)/(1 + q^{-b m_-} alpha)` in addition
/// to `(1 - alpha)/(1 - q^{-b m_+} alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootParam {
    pub minus: Option<Affine>,
    pub plus: Affine,
}

/// Which algebra a parameter datum describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraLabel {
    /// `C_r(m_-, m_+)`, root datum with `R_0` of type `B_r`.
    C { r: usize, m_minus: Rational64, m_plus: Rational64 },
    /// `A_n` with equal parameters.
    A { n: usize },
    /// `G2(m_long, m_short)`.
    G2 { m_long: Rational64, m_short: Rational64 },
    /// `F4(m_long, m_short)`.
    F4 { m_long: Rational64, m_short: Rational64 },
}

/// A normalized affine Hecke algebra `(R, m, q^b, tau)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamHeckeAlgebra {
    pub label: AlgebraLabel,
    pub roots: RootSystem,
    /// Parameters aligned with `roots.positive`.
    pub params: Vec<RootParam>,
    pub base: u32,
    #[serde(skip)]
    pub tau: Option<QRational>,
}

fn fmt_param(x: Rational64) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl ParamHeckeAlgebra {
    /// `C_r(m_-, m_+)[q^b]` with deformation `m_- + eps_-`, `m_+ + eps_+` on
    /// the short roots `e_i` and parameter `1` on `e_i +- e_j`.
    pub fn c_type(r: usize, m_minus: Rational64, m_plus: Rational64, base: u32) -> Result<Self> {
        let roots = RootSystem::build(CartanType::B, r)?;
        let params = roots
            .positive
            .iter()
            .map(|a| {
                if a.iter().filter(|&&c| c != 0).count() == 1 {
                    RootParam {
                        minus: Some(Affine::constant(m_minus).add(&Affine::eps_minus())),
                        plus: Affine::constant(m_plus).add(&Affine::eps_plus()),
                    }
                } else {
                    RootParam { minus: None, plus: Affine::int(1) }
                }
            })
            .collect();
        Ok(ParamHeckeAlgebra { label: AlgebraLabel::C { r, m_minus, m_plus }, roots, params, base, tau: None })
    }

    /// `A_n[q^b]`, deformed by `eps_+`.
    pub fn a_type(n: usize, base: u32) -> Result<Self> {
        let roots = RootSystem::build(CartanType::A, n)?;
        let params = roots
            .positive
            .iter()
            .map(|_| RootParam { minus: None, plus: Affine::int(1).add(&Affine::eps_plus()) })
            .collect();
        Ok(ParamHeckeAlgebra { label: AlgebraLabel::A { n }, roots, params, base, tau: None })
    }

    fn exceptional(label: AlgebraLabel, cartan: CartanType, rank: usize, ml: Rational64, ms: Rational64, base: u32) -> Result<Self> {
        let roots = RootSystem::build(cartan, rank)?;
        let params = roots
            .positive
            .iter()
            .map(|a| {
                if roots.is_long(a) {
                    RootParam { minus: None, plus: Affine::constant(ml).add(&Affine::eps_minus()) }
                } else {
                    RootParam { minus: None, plus: Affine::constant(ms).add(&Affine::eps_plus()) }
                }
            })
            .collect();
        Ok(ParamHeckeAlgebra { label, roots, params, base, tau: None })
    }

    /// `G2(m_long, m_short)[q^b]`; long roots deform by `eps_-`, short by `eps_+`.
    pub fn g2(m_long: Rational64, m_short: Rational64, base: u32) -> Result<Self> {
        Self::exceptional(AlgebraLabel::G2 { m_long, m_short }, CartanType::G2, 2, m_long, m_short, base)
    }

    /// `F4(m_long, m_short)[q^b]`; long roots deform by `eps_-`, short by `eps_+`.
    pub fn f4(m_long: Rational64, m_short: Rational64, base: u32) -> Result<Self> {
        Self::exceptional(AlgebraLabel::F4 { m_long, m_short }, CartanType::F4, 4, m_long, m_short, base)
    }

    pub fn with_tau(mut self, tau: QRational) -> Self {
        self.tau = Some(tau);
        self
    }

    /// `tau(1)`, defaulting to `1`.
    pub fn tau(&self) -> QRational {
        self.tau.clone().unwrap_or_else(QRational::one)
    }

    pub fn rank(&self) -> usize {
        self.roots.rank
    }

    /// The same algebra with the deformation parameters removed.
    pub fn specialized(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.params {
            p.plus = p.plus.at_zero();
            p.minus = p.minus.map(|m| m.at_zero());
        }
        out
    }

    /// The same root datum with every parameter reduced to its deformation
    /// direction. Generic residual points of this algebra are linear forms in
    /// the parameters; see [`Affine::instantiate`].
    pub fn symbolic(&self) -> Self {
        let strip = |x: &mut Affine| {
            if !x.is_constant() {
                x.c = Rational64::zero();
            }
        };
        let mut out = self.clone();
        for p in &mut out.params {
            strip(&mut p.plus);
            if let Some(m) = p.minus.as_mut() {
                strip(m);
            }
        }
        out
    }

    pub fn name(&self) -> String {
        let base = if self.base == 1 { "[q]".to_string() } else { format!("[q^{}]", self.base) };
        let body = match self.label {
            AlgebraLabel::C { r, m_minus, m_plus } => format!("C{r}({},{})", fmt_param(m_minus), fmt_param(m_plus)),
            AlgebraLabel::A { n } => format!("A{n}"),
            AlgebraLabel::G2 { m_long, m_short } => format!("G2({},{})", fmt_param(m_long), fmt_param(m_short)),
            AlgebraLabel::F4 { m_long, m_short } => format!("F4({},{})", fmt_param(m_long), fmt_param(m_short)),
        };
        format!("{body}{base}")
    }

    /// Checks that the parameters are constant on Weyl orbits, using the
    /// simple reflections as generators.
    pub fn parameters_weyl_invariant(&self) -> bool {
        let find = |x: &[i64]| -> Option<usize> {
            let neg: Vec<i64> = x.iter().map(|c| -c).collect();
            self.roots.positive.iter().position(|p| p == x || *p == neg)
        };
        for i in 0..self.rank() {
            for (k, a) in self.roots.positive.iter().enumerate() {
                let b = self.roots.reflect(i, a);
                match find(&b) {
                    Some(j) if self.params[j] == self.params[k] => {}
                    _ => return false,
                }
            }
        }
        true
    }

    pub fn spectral_diagram(&self) -> SpectralDiagram {
        spectral_diagram(self)
    }
}

impl fmt::Display for ParamHeckeAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses a parameter written as an integer, fraction or decimal.
pub fn parse_param(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let err = || HeckeError::Parse(format!("bad parameter {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| err())?;
        let b: i64 = b.trim().parse().map_err(|_| err())?;
        if b == 0 {
            return Err(err());
        }
        return Ok(Rational64::new(a, b));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip_val: i64 = if ip.is_empty() || ip == "-" { 0 } else { ip.parse().map_err(|_| err())? };
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) || fp.len() > 12 {
            return Err(err());
        }
        let den = 10i64.pow(fp.len() as u32);
        let frac = Rational64::new(fp.parse::<i64>().map_err(|_| err())?, den);
        let ipr = Rational64::from_integer(ip_val);
        return Ok(if neg { ipr - frac } else { ipr + frac });
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| err())
}

impl FromStr for ParamHeckeAlgebra {
    type Err = HeckeError;

    /// Accepts `C2(0.5,0.5)[q]`, `C_3(1/2,3/2)[q^2]`, `A2[q^3]`, `G2(3,1)[q]`, `F4(2,1)[q]`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || HeckeError::Parse(format!("bad algebra literal {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (body, base) = match t.find('[') {
            Some(i) => {
                let b = t[i..].strip_prefix("[q").and_then(|x| x.strip_suffix(']')).ok_or_else(err)?;
                let base = if b.is_empty() {
                    1
                } else {
                    b.strip_prefix('^').ok_or_else(err)?.parse::<u32>().map_err(|_| err())?
                };
                (&t[..i], base)
            }
            None => (&t[..], 1),
        };
        if base == 0 {
            return Err(err());
        }
        let (head, args) = match body.find('(') {
            Some(i) => {
                let a = body[i + 1..].strip_suffix(')').ok_or_else(err)?;
                let args: Vec<Rational64> = a.split(',').map(parse_param).collect::<Result<_>>()?;
                (&body[..i], args)
            }
            None => (body, Vec::new()),
        };
        let head = head.replace('_', "");
        let letter = head.chars().next().ok_or_else(err)?;
        let rank: usize = head[1..].parse().map_err(|_| err())?;
        match (letter, args.len()) {
            ('C', 2) => Self::c_type(rank, args[0], args[1], base),
            ('A', 0) => Self::a_type(rank, base),
            ('G', 2) if rank == 2 => Self::g2(args[0], args[1], base),
            ('F', 2) if rank == 4 => Self::f4(args[0], args[1], base),
            _ => Err(err()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramNode {
    pub id: usize,
    pub mark: i64,
    /// Parameter weight in units of `q`: the value `q^weight` the gradient takes
    /// at the distinguished point attached to this node alone.
    pub weight: Rational64,
    /// Gradient of the dual affine simple root, a character in the chart.
    pub gradient: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramEdge {
    pub a: usize,
    pub b: usize,
    /// `<g_a, g_b^vee> <g_b, g_a^vee>`; `4` marks the doubled edge of affine rank one.
    pub bond: i64,
}

/// The affine diagram of the coroot system with marks and parameter weights.
/// Node `0` is the affine node with gradient `-theta^vee`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralDiagram {
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<DiagramEdge>,
    /// Node permutations preserving all bonds; each lists the image of every node.
    pub automorphisms: Vec<Vec<usize>>,
}

impl SpectralDiagram {
    /// `sum_i n_i g_i`, zero exactly when `sum n_i a_i^vee = 1`.
    pub fn weighted_gradient_sum(&self) -> Vec<i64> {
        let dim = self.nodes.first().map_or(0, |n| n.gradient.len());
        let mut s = vec![0; dim];
        for n in &self.nodes {
            for (x, g) in s.iter_mut().zip(&n.gradient) {
                *x += n.mark * g;
            }
        }
        s
    }

    pub fn marks(&self) -> Vec<i64> {
        self.nodes.iter().map(|n| n.mark).collect()
    }
}

pub fn spectral_diagram(h: &ParamHeckeAlgebra) -> SpectralDiagram {
    let rs = &h.roots;
    let r = rs.rank;
    let b = Rational64::from_integer(h.base as i64);
    if r == 0 {
        return SpectralDiagram {
            nodes: vec![DiagramNode { id: 0, mark: 1, weight: Rational64::zero(), gradient: Vec::new() }],
            edges: Vec::new(),
            automorphisms: vec![vec![0]],
        };
    }
    let param_of = |root: &[i64]| -> RootParam {
        let k = rs.positive.iter().position(|p| p == root).expect("positive root");
        h.params[k]
    };
    // Value of the gradient alpha^vee at the point where alpha takes q^{b m(alpha)}.
    let node_weight = |root: &[i64], m: Rational64| -> Rational64 {
        let scale = Rational64::from_integer(2) / rs.inner(root, root);
        b * m * scale
    };
    let simple_coroots: Vec<Vec<i64>> = rs.simple.iter().map(|a| rs.coroot(a)).collect();
    // Highest coroot: the coroot of maximal height in the simple coroots.
    let cm = linalg::from_int(&simple_coroots);
    let mut best: Option<(Rational64, Vec<i64>, Vec<Rational64>)> = None;
    for a in &rs.positive {
        let c = rs.coroot(a);
        let cv: Vec<Rational64> = c.iter().map(|&x| Rational64::from_integer(x)).collect();
        let coeff = linalg::solve_row_combination(&cm, &cv).expect("coroot in span");
        let ht: Rational64 = coeff.iter().copied().sum();
        if best.as_ref().is_none_or(|(h0, _, _)| ht > *h0) {
            best = Some((ht, a.clone(), coeff));
        }
    }
    let (_, theta_root, theta_coeff) = best.expect("nonempty root system");
    let theta = rs.coroot(&theta_root);
    let mut nodes = Vec::with_capacity(r + 1);
    let p0 = param_of(&theta_root);
    let m0 = match (h.label, p0.minus) {
        (AlgebraLabel::C { .. }, Some(m)) => m.c,
        _ => p0.plus.c,
    };
    nodes.push(DiagramNode {
        id: 0,
        mark: 1,
        weight: node_weight(&theta_root, m0),
        gradient: theta.iter().map(|c| -c).collect(),
    });
    for (i, a) in rs.simple.iter().enumerate() {
        let c = theta_coeff[i];
        assert!(c.is_integer() && c.is_positive(), "marks are positive integers");
        nodes.push(DiagramNode {
            id: i + 1,
            mark: c.to_integer(),
            weight: node_weight(a, param_of(a).plus.c),
            gradient: simple_coroots[i].clone(),
        });
    }
    // Bonds are computed in the coroot system, whose inner product is the same form.
    let bond = |x: &[i64], y: &[i64]| -> i64 {
        let xy = rs.inner(x, y);
        let v = Rational64::from_integer(4) * xy * xy / (rs.inner(x, x) * rs.inner(y, y));
        v.to_integer()
    };
    let n = nodes.len();
    let mut bonds = vec![vec![0i64; n]; n];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let bij = bond(&nodes[i].gradient, &nodes[j].gradient);
            bonds[i][j] = bij;
            bonds[j][i] = bij;
            if bij != 0 {
                edges.push(DiagramEdge { a: i, b: j, bond: bij });
            }
        }
    }
    // Bond multiplicities do not record orientation; the length of each
    // gradient does, so automorphisms also preserve it.
    let lens: Vec<Rational64> = nodes.iter().map(|nd| rs.inner(&nd.gradient, &nd.gradient)).collect();
    let automorphisms = graph_automorphisms(&bonds, &lens);
    SpectralDiagram { nodes, edges, automorphisms }
}

fn graph_automorphisms(bonds: &[Vec<i64>], lens: &[Rational64]) -> Vec<Vec<usize>> {
    fn go(
        k: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        bonds: &[Vec<i64>],
        lens: &[Rational64],
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = bonds.len();
        if k == n {
            out.push(perm.clone());
            return;
        }
        for c in 0..n {
            if used[c] || lens[c] != lens[k] {
                continue;
            }
            if (0..k).all(|j| bonds[k][j] == bonds[c][perm[j]]) {
                used[c] = true;
                perm.push(c);
                go(k + 1, perm, used, bonds, lens, out);
                perm.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, &mut Vec::new(), &mut vec![false; bonds.len()], bonds, lens, &mut out);
    out.sort();
    out
}
