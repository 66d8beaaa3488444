use hecke_core::tableaux::{
    distinguished_for, enumerate_distinguished, h_multiplicity, jumps, m_tableau_contents, partitions, partitions_for,
    rank_of, signed_contents, slooten_symbols, swap_rows, symbol_count_formula, unipotent_of, Flavor, Partition,
};
use hecke_core::HeckeError;
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn p(parts: &[u32]) -> Partition {
    Partition::new(parts.to_vec())
}

fn params() -> Vec<Rational64> {
    (0..=6).map(|k| r(k, 2)).collect()
}

/// Partition numbers by the pentagonal recurrence.
fn partition_number(n: i64) -> u64 {
    let mut p = vec![0i64; n as usize + 1];
    p[0] = 1;
    for k in 1..=n {
        let mut s = 0;
        for j in 1.. {
            let g1 = j * (3 * j - 1) / 2;
            if g1 > k {
                break;
            }
            let sign = if j % 2 == 1 { 1 } else { -1 };
            s += sign * p[(k - g1) as usize];
            let g2 = j * (3 * j + 1) / 2;
            if g2 <= k {
                s += sign * p[(k - g2) as usize];
            }
        }
        p[k as usize] = s;
    }
    p[n as usize] as u64
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn partition_counts() {
    for n in 0..=14 {
        assert_eq!(partitions(n).len() as u64, partition_number(n as i64), "p({n})");
    }
}

#[test]
fn tableau_examples() {
    assert_eq!(signed_contents(&p(&[2]), r(1, 1)), vec![r(1, 1), r(2, 1)]);
    assert_eq!(m_tableau_contents(&p(&[1, 1]), r(0, 1)), vec![r(0, 1), r(1, 1)]);
    assert_eq!(unipotent_of(&p(&[2]), r(1, 1)).unwrap(), p(&[5]));
    assert_eq!(unipotent_of(&Partition::empty(), r(1, 1)).unwrap(), p(&[1]));
    assert_eq!(unipotent_of(&Partition::empty(), r(3, 2)).unwrap(), p(&[2]));
    assert!(matches!(unipotent_of(&p(&[2, 1]), r(1, 1)), Err(HeckeError::NonGeneric(_))));
    // Two boxes of content 0 at m = 0: the multiplicity drops by more than one.
    assert!(matches!(jumps(&[r(0, 1), r(0, 1)], r(0, 1)), Err(HeckeError::NonGeneric(_))));
    assert!(matches!(jumps(&[r(1, 2); 3], r(1, 2)), Err(HeckeError::NonGeneric(_))));
    // Contents off the parameter grid.
    assert!(matches!(jumps(&[r(1, 2)], r(1, 1)), Err(HeckeError::Domain(_))));
}

#[test]
fn rank_zero_partitions() {
    // u with |u| = m^2 (integral) or m^2 - 1/4 (half-integral) are the cuspidal ones.
    assert_eq!(distinguished_for(r(2, 1), 0).unwrap(), vec![p(&[1, 3])]);
    assert_eq!(distinguished_for(r(5, 2), 0).unwrap(), vec![p(&[2, 4])]);
    assert_eq!(distinguished_for(r(0, 1), 0).unwrap(), vec![Partition::empty()]);
    assert_eq!(rank_of(&p(&[1, 3, 5]), r(3, 1)), Some(0));
    assert_eq!(rank_of(&p(&[1, 3, 5]), r(1, 1)), Some(4));
    assert_eq!(rank_of(&p(&[3, 3]), r(1, 1)), None);
    assert_eq!(rank_of(&p(&[2]), r(1, 1)), None);
}

#[test]
fn symbol_example() {
    // u = (1,3,5), m = 1: l = 1, d = 1, three symbols.
    let s = slooten_symbols(&p(&[1, 3, 5]), r(1, 1)).unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(symbol_count_formula(&p(&[1, 3, 5]), r(1, 1)), 3);
    // u = (5), m = 1: l = 0, a single symbol.
    assert_eq!(slooten_symbols(&p(&[5]), r(1, 1)).unwrap().len(), 1);
    assert_eq!(symbol_count_formula(&p(&[5]), r(1, 1)), 1);
    assert!(slooten_symbols(&p(&[3, 3]), r(1, 1)).is_err());
}

/// The symbol counts: `C(2l + d, l)`, or `C(2l + d - 1, l)` when a zero entry
/// has to be added, compared with direct enumeration for all distinguished
/// `u` with `|u| <= 15` and `m <= 3`.
#[test]
fn symbol_counts() {
    let mut checked = 0;
    for m in params() {
        let flavor = if m.is_integer() { Flavor::Odd } else { Flavor::Even };
        for size in 0..=15 {
            for u in enumerate_distinguished(size, flavor, 0) {
                if rank_of(&u, m).is_none() {
                    continue;
                }
                let d = m.ceil().to_integer();
                let mut k = u.len() as i64;
                let zero = (k - d) % 2 != 0;
                if zero {
                    k += 1;
                }
                let l = ((k - d) / 2) as u64;
                let want = binomial((2 * l as i64 + d - zero as i64) as u64, l);
                let symbols = slooten_symbols(&u, m).unwrap();
                assert_eq!(symbols.len() as u64, want, "u = {u}, m = {m}");
                assert_eq!(symbol_count_formula(&u, m), want);
                for s in &symbols {
                    assert_eq!(s.top.len() as i64 - s.bottom.len() as i64, d);
                    assert_eq!(swap_rows(&swap_rows(s)), *s);
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 90, "only {checked} cases");
}

/// `#(u) = m + H(0)` with `H(0) = 2 h(0)` counted from the tableau of `pi`
/// (integral `m`), and `#(u) = m - 1/2 + h(1/2)` for half-integral `m`.
#[test]
fn jumps_identity() {
    for m in params() {
        for n in 0..=8 {
            for pi in partitions(n) {
                let Ok(u) = unipotent_of(&pi, m) else { continue };
                let c = m_tableau_contents(&pi, m);
                let count = |x: Rational64| c.iter().filter(|&&y| y == x).count() as i64;
                let rhs = if m.is_integer() { m + 2 * count(r(0, 1)) } else { m - r(1, 2) + count(r(1, 2)) };
                assert_eq!(r(u.distinct_count() as i64, 1), rhs, "pi = {pi}, m = {m}");
                assert_eq!(rank_of(&u, m), Some(n), "pi = {pi}, m = {m}");
                let t = h_multiplicity(&u, m).unwrap();
                assert_eq!(t.big_h(r(0, 1)), 2 * count(r(0, 1)));
            }
        }
    }
}

#[test]
fn distinguished_enumeration() {
    // Distinct odd parts summing to 9: (9), (1,3,5).
    assert_eq!(enumerate_distinguished(9, Flavor::Odd, 0).len(), 2);
    // Distinct even parts summing to 12: (12), (2,10), (4,8), (2,4,6).
    assert_eq!(enumerate_distinguished(12, Flavor::Even, 0).len(), 4);
    assert_eq!(enumerate_distinguished(12, Flavor::Even, 3).len(), 1);
}

proptest! {
    #[test]
    fn generic_tableaux_give_distinguished_partitions(n in 0u32..9, idx in 0usize..200, k in 0i64..7) {
        let m = r(k, 2);
        let ps = partitions(n);
        let pi = &ps[idx % ps.len()];
        if let Ok(u) = unipotent_of(pi, m) {
            let odd = m.is_integer();
            prop_assert!(u.parts().iter().all(|&x| (x % 2 == 1) == odd));
            prop_assert_eq!(u.distinct_count(), u.len());
            prop_assert_eq!(rank_of(&u, m), Some(n));
            prop_assert!(partitions_for(&u, m).unwrap().contains(pi));
        }
    }

    #[test]
    fn contents_are_symmetric_under_conjugation_at_zero(n in 0u32..9, idx in 0usize..200) {
        // At m = 0 the contents j - i change sign under conjugation.
        let ps = partitions(n);
        let pi = &ps[idx % ps.len()];
        let mut t = vec![0u32; pi.parts().first().copied().unwrap_or(0) as usize];
        for &x in pi.parts() {
            for c in t.iter_mut().take(x as usize) {
                *c += 1;
            }
        }
        let conj = Partition::new(t);
        prop_assert_eq!(m_tableau_contents(pi, r(0, 1)), m_tableau_contents(&conj, r(0, 1)));
    }
}
