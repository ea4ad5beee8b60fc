//! Index sets, subsets of `{1,…,n}` as bitmasks, transforms on the subset
//! lattice, multi-indices and perfect matchings of labelled legs.
//!
//! Orders are fixed so that golden files are reproducible:
//! subsets are listed by increasing mask value, multi-indices in
//! graded-lexicographic order (`(1,0)` before `(0,1)`), and matchings by
//! pairing the first free leg with each later leg in turn.

use std::fmt;
use std::ops::{AddAssign, SubAssign};

use num::bigint::BigUint;
use num::One;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported `n`; subsets are `u64` masks.
pub const MAX_POINTS: usize = 63;

/// `N = {1,…,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    n: usize,
}

impl IndexSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_POINTS {
            return Err(Error::domain(format!(
                "index set size must be in 1..={MAX_POINTS}, got {n}"
            )));
        }
        Ok(IndexSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn full(&self) -> SubsetMask {
        SubsetMask {
            n: self.n,
            bits: full_bits(self.n),
        }
    }
}

fn full_bits(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of `{1,…,n}`; element `i` is bit `i-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetMask {
    n: usize,
    bits: u64,
}

impl SubsetMask {
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        IndexSet::new(n)?;
        if bits & !full_bits(n) != 0 {
            return Err(Error::domain(format!(
                "mask {bits:#b} has elements outside {{1,…,{n}}}"
            )));
        }
        Ok(SubsetMask { n, bits })
    }

    /// Builds a subset from 1-based members.
    pub fn from_members(n: usize, members: &[usize]) -> Result<Self> {
        IndexSet::new(n)?;
        let mut bits = 0u64;
        for &m in members {
            if m == 0 || m > n {
                return Err(Error::domain(format!("element {m} not in {{1,…,{n}}}")));
            }
            bits |= 1 << (m - 1);
        }
        Ok(SubsetMask { n, bits })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_bits(n, 0)
    }

    pub fn parent(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n && self.bits & (1 << (i - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }

    /// 1-based members in increasing order.
    pub fn members(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.contains(i)).collect()
    }

    pub fn complement(&self) -> SubsetMask {
        SubsetMask {
            n: self.n,
            bits: !self.bits & full_bits(self.n),
        }
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

/// All subsets of `{1,…,n}` with at least `min_size` elements, by mask value.
pub fn enumerate_subsets(n: IndexSet, min_size: usize) -> Vec<SubsetMask> {
    (0..=full_bits(n.len()))
        .filter(|b| b.count_ones() as usize >= min_size)
        .map(|bits| SubsetMask { n: n.len(), bits })
        .collect()
}

/// Values on every subset of a common `{1,…,n}`, stored densely by mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetFunction<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Clone + Default> SubsetFunction<T> {
    pub fn zeros(n: usize) -> Result<Self> {
        IndexSet::new(n)?;
        if n > 24 {
            return Err(Error::domain(format!(
                "dense subset function on n = {n} is too large"
            )));
        }
        Ok(SubsetFunction {
            n,
            values: vec![T::default(); 1 << n],
        })
    }

    /// Collects entries keyed by subset; unspecified subsets are zero.
    /// All keys must share one parent.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SubsetMask, T)>,
    {
        let mut parent = None;
        let mut collected = Vec::new();
        for (k, v) in entries {
            match parent {
                None => parent = Some(k.n),
                Some(p) if p != k.n => {
                    return Err(Error::domain(format!(
                        "subsets of {{1,…,{p}}} and {{1,…,{}}} mixed",
                        k.n
                    )))
                }
                _ => {}
            }
            collected.push((k, v));
        }
        let n = parent.ok_or_else(|| Error::domain("no entries to infer the parent set"))?;
        let mut out = Self::zeros(n)?;
        for (k, v) in collected {
            out.values[k.bits as usize] = v;
        }
        Ok(out)
    }

    pub fn from_vec(n: usize, values: Vec<T>) -> Result<Self> {
        IndexSet::new(n)?;
        if values.len() != 1usize << n {
            return Err(Error::domain(format!(
                "expected {} values for n = {n}, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(SubsetFunction { n, values })
    }
}

impl<T> SubsetFunction<T> {
    pub fn parent(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: &SubsetMask) -> Result<&T> {
        if s.n != self.n {
            return Err(Error::domain(format!(
                "subset of {{1,…,{}}} used on a function over {{1,…,{}}}",
                s.n, self.n
            )));
        }
        Ok(&self.values[s.bits as usize])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, &T)> {
        let n = self.n;
        self.values.iter().enumerate().map(move |(b, v)| {
            (
                SubsetMask {
                    n,
                    bits: b as u64,
                },
                v,
            )
        })
    }
}

// Both transforms sweep one coordinate at a time (the usual O(n 2^n) scheme).
fn sweep<T: Clone>(values: &mut [T], n: usize, step: impl Fn(&mut T, &T)) {
    for bit in 0..n {
        let e = 1usize << bit;
        for mask in 0..values.len() {
            if mask & e != 0 {
                let lower = values[mask ^ e].clone();
                step(&mut values[mask], &lower);
            }
        }
    }
}

/// `out[I] = Σ_{K ⊆ I} values[K]`.
pub fn zeta_transform<T>(values: &SubsetFunction<T>) -> SubsetFunction<T>
where
    T: Clone + for<'a> AddAssign<&'a T>,
{
    let mut out = values.values.clone();
    sweep(&mut out, values.n, |x, y| *x += y);
    SubsetFunction {
        n: values.n,
        values: out,
    }
}

/// `out[I] = Σ_{K ⊆ I} (−1)^{|I∖K|} values[K]`, the inverse of
/// [`zeta_transform`].
pub fn moebius_transform<T>(values: &SubsetFunction<T>) -> SubsetFunction<T>
where
    T: Clone + for<'a> SubAssign<&'a T>,
{
    let mut out = values.values.clone();
    sweep(&mut out, values.n, |x, y| *x -= y);
    SubsetFunction {
        n: values.n,
        values: out,
    }
}

/// A multi-index `α = (α_1,…,α_m)` with order `|α| = Σ α_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// `α! = Π α_i!`.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `x^α`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", c.join(","))
    }
}

/// All `α` of length `m` with `|α| ≤ max_order`, graded-lexicographic.
pub fn enumerate_multi_indices(m: usize, max_order: u32) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, left: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
        if left == 1 {
            prefix.push(remaining);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            fill(prefix, left - 1, remaining - a, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    for order in 0..=max_order {
        fill(&mut Vec::with_capacity(m), m, order, &mut out);
    }
    out
}

/// `C(max_order + m, m)`; zero when `max_order < 0`.
pub fn count_multi_indices(m: usize, max_order: i64) -> u64 {
    if max_order < 0 || m == 0 {
        return 0;
    }
    let s = max_order as u128;
    let mut c: u128 = 1;
    for i in 1..=(m as u128) {
        c = c * (s + i) / i;
    }
    u64::try_from(c).unwrap_or(u64::MAX)
}

/// A labelled leg: the point it sits on and its position among that point's legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leg {
    pub point: usize,
    pub id: usize,
}

/// One perfect matching of `legs`; `matches` holds index pairs into `legs`
/// with the smaller index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingDiagram {
    pub legs: Vec<Leg>,
    pub matches: Vec<(usize, usize)>,
}

impl PairingDiagram {
    /// True if some match joins two legs on the same point.
    pub fn has_self_contraction(&self) -> bool {
        self.matches
            .iter()
            .any(|&(a, b)| self.legs[a].point == self.legs[b].point)
    }

    /// Partner of each leg, as an involution without fixed points.
    pub fn involution(&self) -> Vec<usize> {
        let mut inv = vec![usize::MAX; self.legs.len()];
        for &(a, b) in &self.matches {
            inv[a] = b;
            inv[b] = a;
        }
        inv
    }
}

/// Legs for `powers[i]` insertions at point `i + 1`.
pub fn legs_for_powers(powers: &[u32]) -> Vec<Leg> {
    powers
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| (0..k as usize).map(move |id| Leg { point: i + 1, id }))
        .collect()
}

/// All `(L−1)!!` perfect matchings of the legs; empty for odd `L`.
pub fn enumerate_pairings(legs: &[Leg]) -> Vec<PairingDiagram> {
    let mut out = Vec::new();
    if legs.len() % 2 == 1 {
        return out;
    }
    let mut used = vec![false; legs.len()];
    let mut current = Vec::with_capacity(legs.len() / 2);
    for_each_matching(&mut used, &mut current, &mut |m| {
        out.push(PairingDiagram {
            legs: legs.to_vec(),
            matches: m.to_vec(),
        })
    });
    out
}

/// Visits every perfect matching of `used.len()` slots without materializing them.
pub fn for_each_matching(
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    visit: &mut dyn FnMut(&[(usize, usize)]),
) {
    let Some(first) = used.iter().position(|u| !u) else {
        visit(current);
        return;
    };
    used[first] = true;
    for j in first + 1..used.len() {
        if !used[j] {
            used[j] = true;
            current.push((first, j));
            for_each_matching(used, current, visit);
            current.pop();
            used[j] = false;
        }
    }
    used[first] = false;
}

/// `(2k−1)!!` for `p = 2k`, zero for odd `p`, one for `p = 0`.
pub fn double_factorial_odd(p: u32) -> BigUint {
    if p % 2 == 1 {
        return BigUint::from(0u32);
    }
    (1..p)
        .step_by(2)
        .fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}
