//! Exact rational functions in `v`, q-integers and q-rational numbers.
//!
//! `q = v^2` throughout. A [`LaurentFunction`] is stored as `v^k P(v)/Q(v)` with
//! `P`, `Q` coprime polynomials over the rationals, both with nonzero constant
//! term, and `Q` monic. This form is unique, so structural equality is equality
//! of functions.
//!
//! [`CycloProduct`] is a factored representation `c v^k prod Phi_d(v)^{e_d}` used
//! on the hot paths (residues), where multiplying dense polynomials would be
//! wasteful. [`QRational`] is the unique `scalar * prod [n]_q^{e_n}` form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{HeckeError, Result};

/// Exact rational numbers used for coefficients.
pub type Q = BigRational;

/// Default upper bound for the cyclotomic trial division.
pub const DEFAULT_MAX_CYCLOTOMIC: u64 = 200;

/// Bound for cyclotomic trial division, overridable by `HECKE_STM_MAX_CYCLOTOMIC`.
pub fn max_cyclotomic() -> u64 {
    std::env::var("HECKE_STM_MAX_CYCLOTOMIC")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&d| d >= 2)
        .unwrap_or(DEFAULT_MAX_CYCLOTOMIC)
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Converts a small rational into an exact big rational.
pub fn q_from_r64(r: Rational64) -> Q {
    Q::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

// ---------------------------------------------------------------------------
// Dense polynomials over Q (index = degree), always trimmed.

type Poly = Vec<Q>;

fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn padd(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let mut out: Poly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Q::zero);
            let y = b.get(i).cloned().unwrap_or_else(Q::zero);
            x + y
        })
        .collect();
    trim(&mut out);
    out
}

fn pneg(a: &Poly) -> Poly {
    a.iter().map(|c| -c).collect()
}

fn pmul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn pscale(a: &Poly, c: &Q) -> Poly {
    let mut out: Poly = a.iter().map(|x| x * c).collect();
    trim(&mut out);
    out
}

/// Shifts a polynomial up by `k` degrees.
fn pshift(a: &Poly, k: usize) -> Poly {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); k];
    out.extend(a.iter().cloned());
    out
}

fn pdivrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut r = a.clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead = b.last().unwrap().clone();
    let mut quot = vec![Q::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        quot[shift] = c;
        // The leading coefficient cancels exactly.
        r.pop();
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}

fn pmonic(a: &Poly) -> Poly {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = l.recip();
            pscale(a, &inv)
        }
    }
}

fn pgcd(a: &Poly, b: &Poly) -> Poly {
    let mut x = pmonic(a);
    let mut y = pmonic(b);
    while !y.is_empty() {
        let (_, r) = pdivrem(&x, &y);
        x = y;
        y = pmonic(&r);
    }
    pmonic(&x)
}

fn peval(a: &Poly, x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in a.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn low_zeros(a: &Poly) -> usize {
    a.iter().take_while(|c| c.is_zero()).count()
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials and arithmetic helpers.

pub fn euler_phi(n: u64) -> u64 {
    let mut n0 = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n0 {
        if n0 % p == 0 {
            while n0 % p == 0 {
                n0 /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n0 > 1 {
        result -= result / n0;
    }
    result
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Phi_d(1) for d >= 2: p when d is a power of the prime p, else 1.
fn cyclotomic_at_one(d: u64) -> u64 {
    assert!(d >= 2);
    let mut m = d;
    let mut p = 2;
    while m % p != 0 {
        p += 1;
    }
    while m % p == 0 {
        m /= p;
    }
    if m == 1 {
        p
    } else {
        1
    }
}

fn cyclo_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Integer coefficients of the cyclotomic polynomial Phi_n, lowest degree first.
pub fn cyclotomic_coeffs(n: u64) -> Arc<Vec<i64>> {
    assert!(n >= 1);
    if let Some(c) = cyclo_cache().lock().unwrap().get(&n) {
        return c.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut cur: Vec<i64> = vec![0; n as usize + 1];
    cur[0] = -1;
    cur[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let div = cyclotomic_coeffs(d);
        cur = int_exact_div(&cur, &div);
    }
    let arc = Arc::new(cur);
    cyclo_cache().lock().unwrap().insert(n, arc.clone());
    arc
}

fn int_exact_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    // b is monic.
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let da = r.len() - 1;
    let mut q = vec![0i64; da - db + 1];
    for i in (0..=da - db).rev() {
        let c = r[i + db];
        q[i] = c;
        if c != 0 {
            for (j, bc) in b.iter().enumerate() {
                r[i + j] -= c * bc;
            }
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

fn cyclotomic_poly(n: u64) -> Poly {
    cyclotomic_coeffs(n).iter().map(|&c| q_int(c)).collect()
}

/// The factorization Phi_d(x^a) = prod Phi_e(x) over e with e / gcd(e, a) = d, a >= 1.
pub fn cyclotomic_of_power(d: u64, a: u64) -> Vec<u64> {
    assert!(d >= 1 && a >= 1);
    divisors(d * a)
        .into_iter()
        .filter(|&e| e / e.gcd(&a) == d)
        .collect()
}

// ---------------------------------------------------------------------------
// LaurentFunction

/// An exact rational function of `v` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentFunction {
    shift: i64,
    num: Poly,
    den: Poly,
}

impl LaurentFunction {
    pub fn zero() -> Self {
        LaurentFunction { shift: 0, num: Vec::new(), den: vec![Q::one()] }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * v^k`.
    pub fn monomial(c: Q, k: i64) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentFunction { shift: k, num: vec![c], den: vec![Q::one()] }
    }

    /// The variable `v`.
    pub fn v() -> Self {
        Self::monomial(Q::one(), 1)
    }

    /// `q = v^2`.
    pub fn q() -> Self {
        Self::monomial(Q::one(), 2)
    }

    /// Builds `sum c_e v^e` from sparse terms.
    pub fn from_terms(terms: &[(i64, Q)]) -> Self {
        let nonzero: Vec<&(i64, Q)> = terms.iter().filter(|(_, c)| !c.is_zero()).collect();
        if nonzero.is_empty() {
            return Self::zero();
        }
        let lo = nonzero.iter().map(|(e, _)| *e).min().unwrap();
        let hi = nonzero.iter().map(|(e, _)| *e).max().unwrap();
        let mut p = vec![Q::zero(); (hi - lo + 1) as usize];
        for (e, c) in nonzero {
            p[(e - lo) as usize] += c;
        }
        Self::from_parts(lo, p, vec![Q::one()])
    }

    /// Canonicalizes `v^shift * num / den`.
    fn from_parts(mut shift: i64, mut num: Poly, mut den: Poly) -> Self {
        trim(&mut num);
        trim(&mut den);
        assert!(!den.is_empty(), "zero denominator");
        if num.is_empty() {
            return Self::zero();
        }
        let zn = low_zeros(&num);
        let zd = low_zeros(&den);
        num.drain(..zn);
        den.drain(..zd);
        shift += zn as i64 - zd as i64;
        if den.len() > 1 && num.len() > 1 {
            let g = pgcd(&num, &den);
            if g.len() > 1 {
                num = pdivrem(&num, &g).0;
                den = pdivrem(&den, &g).0;
            }
        }
        let lead = den.last().unwrap().clone();
        if !lead.is_one() {
            let inv = lead.recip();
            num = pscale(&num, &inv);
            den = pscale(&den, &inv);
        }
        LaurentFunction { shift, num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_laurent_polynomial(&self) -> bool {
        self.den.len() == 1
    }

    /// Numerator terms of `v^shift * P` as (exponent, coefficient).
    pub fn numerator_terms(&self) -> Vec<(i64, Q)> {
        sparse_terms(&self.num, self.shift)
    }

    /// Denominator terms of the monic `Q` as (exponent, coefficient).
    pub fn denominator_terms(&self) -> Vec<(i64, Q)> {
        sparse_terms(&self.den, 0)
    }

    pub fn neg(&self) -> Self {
        LaurentFunction { shift: self.shift, num: pneg(&self.num), den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let k = self.shift.min(other.shift);
        let (sa, sb) = ((self.shift - k) as usize, (other.shift - k) as usize);
        if self.den == other.den {
            let num = padd(&pshift(&self.num, sa), &pshift(&other.num, sb));
            return Self::from_parts(k, num, self.den.clone());
        }
        let a = pshift(&pmul(&self.num, &other.den), sa);
        let b = pshift(&pmul(&other.num, &self.den), sb);
        Self::from_parts(k, padd(&a, &b), pmul(&self.den, &other.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // Cross-cancel first to keep degrees small.
        let g1 = pgcd(&self.num, &other.den);
        let g2 = pgcd(&other.num, &self.den);
        let n1 = if g1.len() > 1 { pdivrem(&self.num, &g1).0 } else { self.num.clone() };
        let d2 = if g1.len() > 1 { pdivrem(&other.den, &g1).0 } else { other.den.clone() };
        let n2 = if g2.len() > 1 { pdivrem(&other.num, &g2).0 } else { other.num.clone() };
        let d1 = if g2.len() > 1 { pdivrem(&self.den, &g2).0 } else { self.den.clone() };
        Self::from_parts(self.shift + other.shift, pmul(&n1, &n2), pmul(&d1, &d2))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentFunction { shift: self.shift, num: pscale(&self.num, c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(HeckeError::Domain("inverse of zero".into()));
        }
        Ok(Self::from_parts(-self.shift, self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Substitutes `v -> v^{-1}`.
    pub fn bar_involution(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let dn = self.num.len() as i64 - 1;
        let dd = self.den.len() as i64 - 1;
        let num: Poly = self.num.iter().rev().cloned().collect();
        let den: Poly = self.den.iter().rev().cloned().collect();
        Self::from_parts(-self.shift - dn + dd, num, den)
    }

    /// Returns `Some(1)` if `f(v^{-1}) = f(v)`, `Some(-1)` if `= -f(v)`, else `None`.
    pub fn bar_symmetry(&self) -> Option<i8> {
        let b = self.bar_involution();
        if b == *self {
            Some(1)
        } else if b == self.neg() {
            Some(-1)
        } else {
            None
        }
    }

    /// Exact value at a nonzero rational point.
    pub fn eval_at(&self, v0: &Q) -> Result<Q> {
        if v0.is_zero() {
            return Err(HeckeError::Domain("evaluation at v = 0".into()));
        }
        let d = peval(&self.den, v0);
        if d.is_zero() {
            return Err(HeckeError::Pole(v0.to_string()));
        }
        let n = peval(&self.num, v0);
        let vk = pow_q(v0, self.shift);
        Ok(n * vk / d)
    }

    /// Factors into `c v^k prod Phi_d(v)^{e_d}` by trial division against Phi_d, d up to
    /// [`max_cyclotomic`].
    pub fn to_cyclo(&self) -> Result<CycloProduct> {
        if self.is_zero() {
            return Err(HeckeError::NotQRational("zero".into()));
        }
        let bound = max_cyclotomic();
        let (num_rest, num_e) = strip_cyclotomic(&self.num, bound);
        let (den_rest, den_e) = strip_cyclotomic(&self.den, bound);
        if num_rest.len() != 1 || den_rest.len() != 1 {
            return Err(HeckeError::NotQRational(format!(
                "non-cyclotomic factor remains after trial division up to Phi_{bound}"
            )));
        }
        let mut phi = BTreeMap::new();
        for (d, e) in num_e {
            *phi.entry(d).or_insert(0) += e;
        }
        for (d, e) in den_e {
            *phi.entry(d).or_insert(0) -= e;
        }
        phi.retain(|_, e| *e != 0);
        Ok(CycloProduct { scalar: &num_rest[0] / &den_rest[0], vpow: self.shift, phi })
    }

    /// The unique `scalar * prod [n]_q^{e_n}` representation.
    pub fn qrational_split(&self) -> Result<QRational> {
        if self.is_zero() {
            return Err(HeckeError::NotQRational("zero".into()));
        }
        if self.bar_symmetry().is_none() {
            return Err(HeckeError::NotQRational("not symmetric under v -> 1/v".into()));
        }
        match self.eval_at(&Q::one()) {
            Err(_) => return Err(HeckeError::NotQRational("pole at v = 1".into())),
            Ok(x) if x.is_zero() => return Err(HeckeError::NotQRational("zero at v = 1".into())),
            Ok(_) => {}
        }
        self.to_cyclo()?.to_qrational()
    }
}

fn pow_q(x: &Q, e: i64) -> Q {
    let base = if e < 0 { x.recip() } else { x.clone() };
    let mut acc = Q::one();
    for _ in 0..e.unsigned_abs() {
        acc *= &base;
    }
    acc
}

fn sparse_terms(p: &Poly, shift: i64) -> Vec<(i64, Q)> {
    p.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64 + shift, c.clone()))
        .collect()
}

fn strip_cyclotomic(p: &Poly, bound: u64) -> (Poly, Vec<(u64, i64)>) {
    let mut rest = p.clone();
    let mut out = Vec::new();
    for d in 1..=bound {
        if rest.len() <= 1 {
            break;
        }
        if euler_phi(d) as usize > rest.len() - 1 {
            continue;
        }
        let phi = cyclotomic_poly(d);
        let mut e = 0;
        loop {
            if rest.len() < phi.len() {
                break;
            }
            let (quot, r) = pdivrem(&rest, &phi);
            if !r.is_empty() {
                break;
            }
            rest = quot;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
    }
    (rest, out)
}

impl fmt::Display for LaurentFunction {
    /// Sparse `exp:coef` pairs; a denominator is appended after ` / ` when nontrivial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |terms: Vec<(i64, Q)>| -> String {
            let inner: Vec<String> = terms.iter().map(|(e, c)| format!("{e}:{c}")).collect();
            format!("{{{}}}", inner.join(", "))
        };
        write!(f, "{}", show(self.numerator_terms()))?;
        if !self.is_laurent_polynomial() {
            write!(f, " / {}", show(self.denominator_terms()))?;
        }
        Ok(())
    }
}

impl FromStr for LaurentFunction {
    type Err = HeckeError;

    fn from_str(s: &str) -> Result<Self> {
        let parse_side = |part: &str| -> Result<LaurentFunction> {
            let t = part.trim();
            let inner = t
                .strip_prefix('{')
                .and_then(|x| x.strip_suffix('}'))
                .ok_or_else(|| HeckeError::Parse(format!("expected {{...}}, got {t}")))?;
            let mut terms = Vec::new();
            for item in inner.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                let (e, c) = item
                    .split_once(':')
                    .ok_or_else(|| HeckeError::Parse(format!("bad term {item}")))?;
                let e: i64 = e.trim().parse().map_err(|_| HeckeError::Parse(format!("bad exponent {e}")))?;
                let c: Q = c.trim().parse().map_err(|_| HeckeError::Parse(format!("bad coefficient {c}")))?;
                terms.push((e, c));
            }
            Ok(LaurentFunction::from_terms(&terms))
        };
        match s.split_once(" / ") {
            None => parse_side(s),
            Some((n, d)) => {
                let den = parse_side(d)?;
                parse_side(n)?.checked_div(&den)
            }
        }
    }
}

/// The q-integer `[n]_q = (v^n - v^{-n}) / (v - v^{-1})`.
pub fn qint(n: i64) -> Result<LaurentFunction> {
    if n <= 0 {
        return Err(HeckeError::Domain(format!("q-integer index must be positive, got {n}")));
    }
    let terms: Vec<(i64, Q)> = (0..n).map(|i| (n - 1 - 2 * i, Q::one())).collect();
    Ok(LaurentFunction::from_terms(&terms))
}

// ---------------------------------------------------------------------------
// CycloProduct

/// `scalar * v^vpow * prod_d Phi_d(v)^{phi[d]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloProduct {
    pub scalar: Q,
    pub vpow: i64,
    pub phi: BTreeMap<u64, i64>,
}

impl CycloProduct {
    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        assert!(!c.is_zero(), "CycloProduct scalar must be nonzero");
        CycloProduct { scalar: c, vpow: 0, phi: BTreeMap::new() }
    }

    pub fn monomial(c: Q, k: i64) -> Self {
        let mut out = Self::constant(c);
        out.vpow = k;
        out
    }

    /// `Phi_d(v)^e`.
    pub fn phi_power(d: u64, e: i64) -> Self {
        let mut out = Self::one();
        out.mul_phi(d, e);
        out
    }

    pub fn mul_phi(&mut self, d: u64, e: i64) {
        let slot = self.phi.entry(d).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.phi.remove(&d);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.scalar *= &other.scalar;
        out.vpow += other.vpow;
        for (&d, &e) in &other.phi {
            out.mul_phi(d, e);
        }
        out
    }

    pub fn inv(&self) -> Self {
        CycloProduct {
            scalar: self.scalar.recip(),
            vpow: -self.vpow,
            phi: self.phi.iter().map(|(&d, &e)| (d, -e)).collect(),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let n = e.unsigned_abs();
        CycloProduct {
            scalar: pow_q(&base.scalar, n as i64),
            vpow: base.vpow * n as i64,
            phi: base.phi.iter().map(|(&d, &x)| (d, x * n as i64)).filter(|(_, x)| *x != 0).collect(),
        }
    }

    /// `v^{-2c} f(v^{-1}) = +-f(v)` holds with `2c` returned here.
    pub fn twice_center(&self) -> i64 {
        let mut t = 2 * self.vpow;
        for (&d, &e) in &self.phi {
            t += e * euler_phi(d) as i64;
        }
        t
    }

    /// Divides by the monomial making the function bar-symmetric up to sign.
    pub fn balanced(&self) -> Result<Self> {
        let t = self.twice_center();
        if t % 2 != 0 {
            return Err(HeckeError::NotQRational("half-integral center".into()));
        }
        let mut out = self.clone();
        out.vpow -= t / 2;
        Ok(out)
    }

    pub fn value_at_one_is_regular(&self) -> bool {
        self.phi.get(&1).copied().unwrap_or(0) == 0
    }

    pub fn to_laurent(&self) -> LaurentFunction {
        let mut num = LaurentFunction::monomial(self.scalar.clone(), self.vpow);
        let mut den = LaurentFunction::one();
        for (&d, &e) in &self.phi {
            let p = LaurentFunction::from_parts(0, cyclotomic_poly(d), vec![Q::one()]);
            for _ in 0..e.abs() {
                if e > 0 {
                    num = num.mul(&p);
                } else {
                    den = den.mul(&p);
                }
            }
        }
        num.checked_div(&den).expect("nonzero denominator")
    }

    /// Greedy split into q-integers, largest index first.
    pub fn to_qrational(&self) -> Result<QRational> {
        for d in [1u64, 2] {
            if self.phi.get(&d).copied().unwrap_or(0) != 0 {
                return Err(HeckeError::NotQRational(format!("factor Phi_{d} is not q-rational")));
            }
        }
        let mut phi = self.phi.clone();
        let mut vpow = self.vpow;
        let mut factors = BTreeMap::new();
        while let Some((&d, &e)) = phi.iter().next_back() {
            if d % 2 == 1 {
                return Err(HeckeError::NotQRational(format!("Phi_{d} cannot be covered by a q-integer")));
            }
            let n = d / 2;
            for dd in divisors(2 * n) {
                if dd >= 3 {
                    let slot = phi.entry(dd).or_insert(0);
                    *slot -= e;
                    if *slot == 0 {
                        phi.remove(&dd);
                    }
                }
            }
            vpow -= e * (1 - n as i64);
            factors.insert(n, e);
        }
        if vpow != 0 {
            return Err(HeckeError::NotQRational("not symmetric under v -> 1/v".into()));
        }
        Ok(QRational { scalar: self.scalar.clone(), factors })
    }
}

/// Product of `(1 - exp(2 pi i theta) v^a)^count` over the given factors.
///
/// The net multiset must be closed under the Galois action on roots of unity, so
/// each orbit collapses to `Phi_d(v^a)`. Factors with `theta = 0, a = 0` vanish
/// and are rejected.
pub fn cyclotomic_product(factors: &[(Rational64, i64, i64)]) -> Result<CycloProduct> {
    let mut net: BTreeMap<(i64, Rational64), i64> = BTreeMap::new();
    for &(theta, a, count) in factors {
        let t = frac_part(theta);
        *net.entry((a, t)).or_insert(0) += count;
    }
    net.retain(|_, c| *c != 0);
    // Group by (a, order of the root of unity).
    let mut groups: BTreeMap<(i64, u64), Vec<(Rational64, i64)>> = BTreeMap::new();
    for (&(a, t), &c) in &net {
        groups.entry((a, *t.denom() as u64)).or_default().push((t, c));
    }
    let mut out = CycloProduct::one();
    for ((a, d), members) in groups {
        let count = members[0].1;
        if members.len() as u64 != euler_phi(d) || members.iter().any(|(_, c)| *c != count) {
            return Err(HeckeError::Domain(format!(
                "factor multiset not Galois closed at order {d}, exponent {a}"
            )));
        }
        out = out.mul(&orbit_product(d, a)?.pow(count));
    }
    Ok(out)
}

/// prod over primitive d-th roots zeta of (1 - zeta v^a).
fn orbit_product(d: u64, a: i64) -> Result<CycloProduct> {
    if a == 0 {
        if d == 1 {
            return Err(HeckeError::Domain("vanishing constant factor".into()));
        }
        return Ok(CycloProduct::constant(q_int(cyclotomic_at_one(d) as i64)));
    }
    let abs = a.unsigned_abs();
    let mut out = CycloProduct::one();
    for e in cyclotomic_of_power(d, abs) {
        out.mul_phi(e, 1);
    }
    if d == 1 {
        if a > 0 {
            // 1 - x = -Phi_1(x)
            out.scalar = -out.scalar;
        } else {
            // 1 - x^{-1} = x^{-1} Phi_1(x)
            out.vpow += a;
        }
    } else if a < 0 {
        out.vpow += a * euler_phi(d) as i64;
    }
    Ok(out)
}

/// Representative of `x mod 1` in [0, 1).
pub fn frac_part(x: Rational64) -> Rational64 {
    let f = x - Rational64::from_integer(x.floor().to_integer());
    if f < Rational64::zero() {
        f + Rational64::one()
    } else {
        f
    }
}

// ---------------------------------------------------------------------------
// QRational

/// `scalar * prod_n [n]_q^{e_n}` with `n >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QRational {
    pub scalar: Q,
    pub factors: BTreeMap<u64, i64>,
}

impl QRational {
    pub fn one() -> Self {
        Self::from_scalar(Q::one())
    }

    pub fn from_scalar(scalar: Q) -> Self {
        QRational { scalar, factors: BTreeMap::new() }
    }

    /// `[n]_q^e`.
    pub fn qint_power(n: u64, e: i64) -> Self {
        let mut out = Self::one();
        if n >= 2 && e != 0 {
            out.factors.insert(n, e);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.scalar *= &other.scalar;
        for (&n, &e) in &other.factors {
            let slot = out.factors.entry(n).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.factors.remove(&n);
            }
        }
        out
    }

    pub fn inv(&self) -> Self {
        QRational {
            scalar: self.scalar.recip(),
            factors: self.factors.iter().map(|(&n, &e)| (n, -e)).collect(),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let n = e.unsigned_abs() as i64;
        QRational {
            scalar: pow_q(&base.scalar, n),
            factors: base.factors.iter().map(|(&k, &x)| (k, x * n)).filter(|(_, x)| *x != 0).collect(),
        }
    }

    /// The q-factor with the scalar dropped.
    pub fn q_factor(&self) -> Self {
        QRational { scalar: Q::one(), factors: self.factors.clone() }
    }

    pub fn abs(&self) -> Self {
        QRational { scalar: self.scalar.abs(), factors: self.factors.clone() }
    }

    /// Substitutes `v -> v^k` in the q-factor, `[n](v^k) = [nk]/[k]`.
    pub fn substitute_power(&self, k: u64) -> Self {
        let mut out = Self::from_scalar(self.scalar.clone());
        for (&n, &e) in &self.factors {
            out = out.mul(&Self::qint_power(n * k, e)).mul(&Self::qint_power(k, -e));
        }
        out
    }

    pub fn to_cyclo(&self) -> CycloProduct {
        let mut out = CycloProduct::constant(self.scalar.clone());
        for (&n, &e) in &self.factors {
            out.vpow += e * (1 - n as i64);
            for d in divisors(2 * n) {
                if d >= 3 {
                    out.mul_phi(d, e);
                }
            }
        }
        out
    }

    pub fn to_laurent(&self) -> LaurentFunction {
        self.to_cyclo().to_laurent()
    }

    /// Value at `v = 1`, i.e. `scalar * prod n^{e_n}`.
    pub fn value_at_one(&self) -> Q {
        let mut acc = self.scalar.clone();
        for (&n, &e) in &self.factors {
            acc *= pow_q(&q_int(n as i64), e);
        }
        acc
    }
}

impl fmt::Display for QRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scalar)?;
        if !self.factors.is_empty() {
            let parts: Vec<String> = self.factors.iter().map(|(n, e)| format!("[{n}]^{e}")).collect();
            write!(f, " * {}", parts.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for QRational {
    type Err = HeckeError;

    fn from_str(s: &str) -> Result<Self> {
        let (sc, rest) = match s.split_once(" * ") {
            Some((a, b)) => (a, b),
            None => (s, ""),
        };
        let scalar: Q = sc.trim().parse().map_err(|_| HeckeError::Parse(format!("bad scalar {sc}")))?;
        let mut out = QRational::from_scalar(scalar);
        for tok in rest.split_whitespace() {
            let (n, e) = tok
                .strip_prefix('[')
                .and_then(|t| t.split_once("]^"))
                .ok_or_else(|| HeckeError::Parse(format!("bad factor {tok}")))?;
            let n: u64 = n.parse().map_err(|_| HeckeError::Parse(format!("bad index {n}")))?;
            let e: i64 = e.parse().map_err(|_| HeckeError::Parse(format!("bad exponent {e}")))?;
            out = out.mul(&QRational::qint_power(n, e));
        }
        Ok(out)
    }
}

/// Formats a rational without a trailing `/1`.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Rational power of two `2^e` for integer `e`.
pub fn pow2(e: i64) -> Q {
    pow_q(&q_int(2), e)
}

/// Returns `e` when `x = 2^e`, else `None`.
pub fn log2_exact(x: &Q) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let n = x.numer();
    let d = x.denom();
    let pow_of_two = |b: &BigInt| -> Option<i64> {
        let bits = b.bits();
        if *b == (BigInt::one() << (bits - 1)) {
            Some(bits as i64 - 1)
        } else {
            None
        }
    };
    if d.is_one() {
        pow_of_two(n)
    } else if n.is_one() {
        pow_of_two(d).map(|e| -e)
    } else {
        None
    }
}

pub fn r64_to_q(r: Rational64) -> Q {
    q_from_r64(r)
}

pub fn q_to_r64(x: &Q) -> Option<Rational64> {
    Some(Rational64::new(x.numer().to_i64()?, x.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lf(s: &str) -> LaurentFunction {
        s.parse().unwrap()
    }

    #[test]
    fn qint_small_values() {
        assert_eq!(qint(1).unwrap(), LaurentFunction::one());
        assert_eq!(qint(2).unwrap(), lf("{-1:1, 1:1}"));
        assert_eq!(qint(3).unwrap(), lf("{-2:1, 0:1, 2:1}"));
        assert!(qint(0).is_err());
        assert!(qint(-3).is_err());
    }

    #[test]
    fn qint_matches_defining_quotient() {
        for n in 1..12 {
            let top = LaurentFunction::from_terms(&[(n, Q::one()), (-n, -Q::one())]);
            let bottom = LaurentFunction::from_terms(&[(1, Q::one()), (-1, -Q::one())]);
            assert_eq!(top.checked_div(&bottom).unwrap(), qint(n).unwrap());
        }
    }

    #[test]
    fn bar_examples() {
        assert_eq!(lf("{2:1}").bar_involution(), lf("{-2:1}"));
        assert_eq!(qint(3).unwrap().bar_involution(), qint(3).unwrap());
        assert_eq!(lf("{0:2, 1:1}").bar_involution(), lf("{-1:1, 0:2}"));
        let f = lf("{0:1, 3:2} / {0:1, 1:5}");
        assert_eq!(f.bar_involution().bar_involution(), f);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(qint(2).unwrap().eval_at(&q_int(2)).unwrap(), q_frac(5, 2));
        assert_eq!(qint(3).unwrap().eval_at(&Q::one()).unwrap(), q_int(3));
        let f = LaurentFunction::one().checked_div(&lf("{1:1, -1:-1}")).unwrap();
        assert!(matches!(f.eval_at(&Q::one()), Err(HeckeError::Pole(_))));
        for n in 1..=50 {
            assert_eq!(qint(n).unwrap().eval_at(&Q::one()).unwrap(), q_int(n));
        }
    }

    #[test]
    fn split_examples() {
        let f = qint(2).unwrap().scale(&q_frac(3, 2));
        let s = f.qrational_split().unwrap();
        assert_eq!(s.scalar, q_frac(3, 2));
        assert_eq!(s.factors, BTreeMap::from([(2, 1)]));

        let g = qint(3).unwrap().scale(&q_int(3)).inv().unwrap();
        let s = g.qrational_split().unwrap();
        assert_eq!(s.scalar, q_frac(1, 3));
        assert_eq!(s.factors, BTreeMap::from([(3, -1)]));
        assert_eq!(s.to_string(), "1/3 * [3]^-1");

        assert!(lf("{1:1, -1:-1}").qrational_split().is_err());
        assert!(LaurentFunction::zero().qrational_split().is_err());
        assert!(lf("{0:1, 1:1}").qrational_split().is_err());
        // v^2 + 3 + v^-2 is symmetric and regular but not cyclotomic.
        assert!(lf("{-2:1, 0:3, 2:1}").qrational_split().is_err());
    }

    #[test]
    fn split_round_trip_and_string_form() {
        let x = QRational::qint_power(4, 2).mul(&QRational::qint_power(6, -1)).mul(&QRational::from_scalar(q_frac(-2, 7)));
        let back = x.to_laurent().qrational_split().unwrap();
        assert_eq!(back, x);
        let parsed: QRational = x.to_string().parse().unwrap();
        assert_eq!(parsed, x);
    }

    #[test]
    fn cyclotomic_basics() {
        assert_eq!(*cyclotomic_coeffs(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_coeffs(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_coeffs(12), vec![1, 0, -1, 0, 1]);
        assert!(cyclotomic_coeffs(105).iter().any(|&c| c == -2));
        assert_eq!(cyclotomic_of_power(3, 2), vec![3, 6]);
        assert_eq!(cyclotomic_of_power(2, 2), vec![4]);
    }

    #[test]
    fn galois_closed_products() {
        // (1 - i v)(1 + i v) = 1 + v^2 = Phi_4(v)
        let f = cyclotomic_product(&[(Rational64::new(1, 4), 1, 1), (Rational64::new(3, 4), 1, 1)]).unwrap();
        assert_eq!(f.to_laurent(), lf("{0:1, 2:1}"));
        // (1 + v^-1) = v^-1 (1 + v)
        let g = cyclotomic_product(&[(Rational64::new(1, 2), -1, 1)]).unwrap();
        assert_eq!(g.to_laurent(), lf("{-1:1, 0:1}"));
        // (1 - v^-2)
        let h = cyclotomic_product(&[(Rational64::new(0, 1), -2, 1)]).unwrap();
        assert_eq!(h.to_laurent(), lf("{-2:-1, 0:1}"));
        // constant factors (1 - zeta) over a primitive cube root orbit give 3
        let c = cyclotomic_product(&[(Rational64::new(1, 3), 0, 1), (Rational64::new(2, 3), 0, 1)]).unwrap();
        assert_eq!(c.to_laurent(), LaurentFunction::constant(q_int(3)));
        assert!(cyclotomic_product(&[(Rational64::new(1, 4), 1, 1)]).is_err());
    }

    #[test]
    fn display_parse_round_trip() {
        let f = lf("{0:1, 3:2/3} / {0:1, 1:5}");
        let g: LaurentFunction = f.to_string().parse().unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn log2_helper() {
        assert_eq!(log2_exact(&q_frac(1, 8)), Some(-3));
        assert_eq!(log2_exact(&q_int(4)), Some(2));
        assert_eq!(log2_exact(&Q::one()), Some(0));
        assert_eq!(log2_exact(&q_int(3)), None);
    }
}
