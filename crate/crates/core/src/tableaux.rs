//! Partitions, m-tableaux, jumps, distinguished unipotent partitions and
//! Slooten symbols.
//!
//! For a partition `pi` and a parameter `m >= 0` the m-tableau fills box `(i, j)`
//! (row `i`, column `j`, both 1-based) with `m + j - i`; its contents are the
//! absolute values. Let `h(x)` count contents equal to `x`, `H(x) = h(x)` for
//! `x > 0` and `H(0) = 2 h(0)`. The extended multiplicity
//! `E(x) = H(x) + max(0, m - x)` is nonincreasing on the grid `x in Z>=0`
//! (integral `m`) or `x in 1/2 + Z>=0` (half-integral `m`); its jumps are the
//! points where it drops, each by exactly one in the generic case. A jump `x`
//! gives the part `2x + 1` of the unipotent partition `u`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::binomial;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HeckeError, Result};

/// A partition stored with weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct parts.
    pub fn distinct_count(&self) -> usize {
        let mut p = self.0.clone();
        p.dedup();
        p.len()
    }

    /// Concatenation rearranged as a partition.
    pub fn union(&self, other: &Partition) -> Partition {
        let mut all = self.0.clone();
        all.extend_from_slice(&other.0);
        Partition::new(all)
    }

    /// Number of parts the two partitions have in common (as sets of part values).
    pub fn common_parts(&self, other: &Partition) -> usize {
        let mut a = self.0.clone();
        a.dedup();
        a.iter().filter(|x| other.0.contains(x)).count()
    }

    /// Boxes `(i, j)`, 1-based.
    pub fn boxes(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for (i, &row) in self.0.iter().enumerate() {
            for j in 0..row {
                out.push((i as i64 + 1, j as i64 + 1));
            }
        }
        out
    }

    /// Parts in nondecreasing order, the convention used for display.
    pub fn ascending(&self) -> Vec<u32> {
        let mut p = self.0.clone();
        p.reverse();
        p
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ascending().iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All partitions of `n`, in reverse lexicographic order of their parts.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn go(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            go(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Parity class of a parameter: integral, half-integral, or neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grid {
    Integral,
    HalfIntegral,
}

pub fn grid_of(m: Rational64) -> Result<Grid> {
    let two_m = m * Rational64::from_integer(2);
    if !two_m.is_integer() {
        return Err(HeckeError::Domain(format!("parameter {m} is not in Z/2")));
    }
    if m.is_integer() {
        Ok(Grid::Integral)
    } else {
        Ok(Grid::HalfIntegral)
    }
}

/// Signed contents `m + j - i`; the generic content adds `epsilon` to each.
pub fn signed_contents(pi: &Partition, m: Rational64) -> Vec<Rational64> {
    pi.boxes()
        .into_iter()
        .map(|(i, j)| m + Rational64::from_integer(j - i))
        .collect()
}

/// Contents `|m + j - i|` of the m-tableau, sorted ascending.
pub fn m_tableau_contents(pi: &Partition, m: Rational64) -> Vec<Rational64> {
    let mut c: Vec<Rational64> = signed_contents(pi, m).into_iter().map(|x| x.abs()).collect();
    c.sort();
    c
}

/// Nonnegative grid points `x_0, x_0 + 1, ...` for the given parameter.
fn grid_start(g: Grid) -> Rational64 {
    match g {
        Grid::Integral => Rational64::zero(),
        Grid::HalfIntegral => Rational64::new(1, 2),
    }
}

fn content_histogram(contents: &[Rational64], g: Grid) -> Result<BTreeMap<Rational64, i64>> {
    let start = grid_start(g);
    let mut h = BTreeMap::new();
    for &c in contents {
        let c = c.abs();
        if !(c - start).is_integer() {
            return Err(HeckeError::Domain(format!("content {c} off the parameter grid")));
        }
        *h.entry(c).or_insert(0) += 1;
    }
    Ok(h)
}

fn extended(h: &BTreeMap<Rational64, i64>, m: Rational64, x: Rational64) -> i64 {
    let hx = h.get(&x).copied().unwrap_or(0);
    let big_h = if x.is_zero() { 2 * hx } else { hx };
    let slack = m - x;
    let delta = if slack > Rational64::zero() { slack.to_integer() } else { 0 };
    big_h + delta
}

/// Jump set of a content vector at parameter `m` (integral or half-integral).
pub fn jumps(contents: &[Rational64], m: Rational64) -> Result<Vec<Rational64>> {
    let g = grid_of(m)?;
    let h = content_histogram(contents, g)?;
    let top = contents.iter().map(|c| c.abs()).chain(std::iter::once(m)).max().unwrap();
    let mut out = Vec::new();
    let mut x = grid_start(g);
    while x <= top {
        let d = extended(&h, m, x) - extended(&h, m, x + Rational64::one());
        match d {
            0 => {}
            1 => out.push(x),
            _ => {
                return Err(HeckeError::NonGeneric(format!("multiplicity drop {d} at {x} for m = {m}")))
            }
        }
        x += Rational64::one();
    }
    Ok(out)
}

/// The unipotent partition with parts `2x + 1` over the jumps `x`.
pub fn unipotent_from_jumps(js: &[Rational64]) -> Partition {
    Partition::new(
        js.iter()
            .map(|x| (Rational64::from_integer(2) * x + Rational64::one()).to_integer() as u32)
            .collect(),
    )
}

/// `u` attached to `pi` at parameter `m`.
pub fn unipotent_of(pi: &Partition, m: Rational64) -> Result<Partition> {
    Ok(unipotent_from_jumps(&jumps(&m_tableau_contents(pi, m), m)?))
}

/// `m^2` for integral `m`, `m^2 - 1/4` for half-integral `m`: the size of `u` at rank 0.
pub fn base_size(m: Rational64) -> Result<i64> {
    let sq = m * m;
    let s = match grid_of(m)? {
        Grid::Integral => sq,
        Grid::HalfIntegral => sq - Rational64::new(1, 4),
    };
    Ok(s.to_integer())
}

/// Rank `n` with `|u| = 2n + base_size(m)`, if `u` is distinguished for `m`.
pub fn rank_of(u: &Partition, m: Rational64) -> Option<u32> {
    let g = grid_of(m).ok()?;
    let mut seen = u.parts().to_vec();
    seen.dedup();
    if seen.len() != u.len() {
        return None;
    }
    let want_even = g == Grid::HalfIntegral;
    if u.parts().iter().any(|&p| (p % 2 == 0) != want_even) {
        return None;
    }
    let min_len = match g {
        Grid::Integral => m,
        Grid::HalfIntegral => m - Rational64::new(1, 2),
    };
    if Rational64::from_integer(u.len() as i64) < min_len {
        return None;
    }
    let rest = u.size() as i64 - base_size(m).ok()?;
    if rest < 0 || rest % 2 != 0 {
        return None;
    }
    // Nonnegativity of the multiplicities is the remaining realizability condition.
    multiplicities_from_u(u, m).ok()?;
    Some((rest / 2) as u32)
}

/// Which parity of distinct parts to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Odd,
    Even,
}

/// Partitions of `n` into distinct parts of the given parity, length `>= min_length`.
/// Ordered by length, then lexicographically on ascending parts.
pub fn enumerate_distinguished(n: u32, flavor: Flavor, min_length: usize) -> Vec<Partition> {
    fn go(rest: u32, next: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        let mut p = next;
        while p <= rest {
            cur.push(p);
            go(rest - p, p + 2, cur, out);
            cur.pop();
            p += 2;
        }
    }
    let first = match flavor {
        Flavor::Odd => 1,
        Flavor::Even => 2,
    };
    let mut raw = Vec::new();
    go(n, first, &mut Vec::new(), &mut raw);
    raw.retain(|p| p.len() >= min_length);
    raw.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    raw.into_iter().map(Partition::new).collect()
}

/// All `u` distinguished for `m` with rank `n`.
pub fn distinguished_for(m: Rational64, n: u32) -> Result<Vec<Partition>> {
    let g = grid_of(m)?;
    let size = 2 * n as i64 + base_size(m)?;
    let flavor = if g == Grid::Integral { Flavor::Odd } else { Flavor::Even };
    Ok(enumerate_distinguished(size as u32, flavor, 0)
        .into_iter()
        .filter(|u| rank_of(u, m) == Some(n))
        .collect())
}

/// Tables `h`, `H` and `Delta` for a distinguished `u` at parameter `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityTable {
    pub m: Rational64,
    /// `h(x)`: multiplicity of `x` among the contents.
    pub h: BTreeMap<Rational64, i64>,
}

impl MultiplicityTable {
    pub fn h(&self, x: Rational64) -> i64 {
        self.h.get(&x).copied().unwrap_or(0)
    }

    pub fn big_h(&self, x: Rational64) -> i64 {
        if x.is_zero() {
            2 * self.h(x)
        } else {
            self.h(x)
        }
    }

    /// `max(0, m - x)`.
    pub fn delta(&self, x: Rational64) -> i64 {
        let s = self.m - x;
        if s > Rational64::zero() {
            s.to_integer()
        } else {
            0
        }
    }
}

fn multiplicities_from_u(u: &Partition, m: Rational64) -> Result<MultiplicityTable> {
    let g = grid_of(m)?;
    let js: Vec<Rational64> = u
        .parts()
        .iter()
        .map(|&p| Rational64::new(p as i64 - 1, 2))
        .collect();
    let start = grid_start(g);
    let top = js.iter().copied().chain(std::iter::once(m)).max().unwrap_or(m);
    let mut h = BTreeMap::new();
    let mut x = start;
    while x <= top {
        // E(x) counts jumps at or above x.
        let e = js.iter().filter(|&&y| y >= x).count() as i64;
        let slack = m - x;
        let delta = if slack > Rational64::zero() { slack.to_integer() } else { 0 };
        let big_h = e - delta;
        if big_h < 0 {
            return Err(HeckeError::Domain(format!("u = {u} not distinguished for m = {m}")));
        }
        let hx = if x.is_zero() {
            if big_h % 2 != 0 {
                return Err(HeckeError::Domain(format!("u = {u} has odd H(0) at m = {m}")));
            }
            big_h / 2
        } else {
            big_h
        };
        if hx > 0 {
            h.insert(x, hx);
        }
        x += Rational64::one();
    }
    Ok(MultiplicityTable { m, h })
}

/// Multiplicity tables for `u` at `m`, read off from the jumps of `u`.
pub fn h_multiplicity(u: &Partition, m: Rational64) -> Result<MultiplicityTable> {
    if rank_of(u, m).is_none() {
        return Err(HeckeError::Domain(format!("u = {u} not distinguished for m = {m}")));
    }
    multiplicities_from_u(u, m)
}

/// All partitions `pi` of the right size whose m-tableau has jumps giving `u`.
pub fn partitions_for(u: &Partition, m: Rational64) -> Result<Vec<Partition>> {
    let n = rank_of(u, m).ok_or_else(|| HeckeError::Domain(format!("u = {u} not distinguished for m = {m}")))?;
    Ok(partitions(n)
        .into_iter()
        .filter(|pi| unipotent_of(pi, m).ok().as_ref() == Some(u))
        .collect())
}

/// A two-row symbol; `defect = |top| - |bottom|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlootenSymbol {
    pub top: Vec<u32>,
    pub bottom: Vec<u32>,
    pub defect: i64,
}

impl fmt::Display for SlootenSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |r: &[u32]| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "[{} / {}]", row(&self.top), row(&self.bottom))
    }
}

/// Defect `ceil(m)`.
pub fn symbol_defect(m: Rational64) -> i64 {
    m.ceil().to_integer()
}

/// Symbol entries: the parts of `u`, padded by a `0` part when the count has the
/// wrong parity for the defect (only possible for half-integral `m`).
pub fn symbol_entries(u: &Partition, m: Rational64) -> Vec<u32> {
    let d = symbol_defect(m);
    let mut e = u.ascending();
    if (e.len() as i64 - d) % 2 != 0 {
        e.insert(0, 0);
    }
    e
}

/// All symbols of defect `ceil(m)` on the entries of `u`, distinguished by which
/// entries go to the bottom row; a `0` entry always stays on top.
pub fn slooten_symbols(u: &Partition, m: Rational64) -> Result<Vec<SlootenSymbol>> {
    if rank_of(u, m).is_none() {
        return Err(HeckeError::Domain(format!("u = {u} not distinguished for m = {m}")));
    }
    let d = symbol_defect(m);
    let entries = symbol_entries(u, m);
    let total = entries.len() as i64;
    let l = (total - d) / 2;
    if l < 0 {
        return Err(HeckeError::Domain(format!("too few parts in {u} for defect {d}")));
    }
    let movable: Vec<u32> = entries.iter().copied().filter(|&x| x != 0).collect();
    let mut out = Vec::new();
    for pick in itertools::Itertools::combinations(movable.iter().copied(), l as usize) {
        let top: Vec<u32> = entries.iter().copied().filter(|x| !pick.contains(x)).collect();
        out.push(SlootenSymbol { top, bottom: pick, defect: d });
    }
    out.sort();
    Ok(out)
}

/// Closed count: `C(2l + d, l)` entries-choose-bottom, or `C(2l + d - 1, l)` with a `0` part.
pub fn symbol_count_formula(u: &Partition, m: Rational64) -> u64 {
    let d = symbol_defect(m);
    let entries = symbol_entries(u, m);
    let has_zero = entries.first() == Some(&0);
    let l = (entries.len() as i64 - d) / 2;
    if l < 0 {
        return 0;
    }
    let n = (2 * l + d - if has_zero { 1 } else { 0 }) as u64;
    binomial(n, l as u64)
}

/// Swaps the two rows, the involution relating defect `d` and `-d` symbols.
pub fn swap_rows(s: &SlootenSymbol) -> SlootenSymbol {
    SlootenSymbol { top: s.bottom.clone(), bottom: s.top.clone(), defect: -s.defect }
}
